#include "rankseg/multiclass.hpp"

#include <algorithm>
#include <limits>

#include "rankseg/error.hpp"
#include "rankseg/poisson_binomial.hpp"
#include "rankseg/rank_binary.hpp"

namespace rankseg {
namespace {

constexpr double kResidualGuard = 1e-12;

struct ClassSummary {
  double kept_sum = 0.0;
  std::size_t kept_count = 0;
  double mu = 0.0;
};

double kept_probability(const MulticlassProbMap& probs, std::span<const std::uint32_t> kept,
                        std::size_t c) {
  std::vector<double> values(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) values[i] = probs.at(c, kept[i]);
  return pb_mean(values);
}

std::uint32_t argmax_column(const MulticlassProbMap& probs, std::size_t j) noexcept {
  std::uint32_t best = 0;
  double best_p = probs.at(0, j);
  for (std::size_t c = 1; c < probs.classes(); ++c) {
    if (probs.at(c, j) > best_p) {
      best_p = probs.at(c, j);
      best = static_cast<std::uint32_t>(c);
    }
  }
  return best;
}

double score(ScoreKind kind, double p, const ClassSummary& s) noexcept {
  switch (kind) {
    case ScoreKind::rma_dice: return rma_dice_increment(p, s.kept_sum, s.kept_count, s.mu);
    case ScoreKind::rma_iou: return rma_iou_increment(p, s.kept_sum, s.kept_count, s.mu);
    case ScoreKind::prob: return p;
    case ScoreKind::wprob:
      return s.kept_count == 0 ? p : p / static_cast<double>(s.kept_count);
  }
  return p;
}

}  // namespace

const char* to_string(Metric metric) noexcept {
  return metric == Metric::dice ? "dice" : "iou";
}

const char* to_string(ScoreKind kind) noexcept {
  switch (kind) {
    case ScoreKind::rma_dice: return "rma-dice";
    case ScoreKind::rma_iou: return "rma-iou";
    case ScoreKind::prob: return "prob";
    case ScoreKind::wprob: return "wprob";
  }
  return "unknown";
}

LabelMap argmax_prob(const MulticlassProbMap& probs) {
  const std::size_t d = probs.pixels();
  std::vector<std::uint32_t> labels(d);
  const long long n = static_cast<long long>(d);
#pragma omp parallel for schedule(static) if (d >= 1 << 14)
  for (long long j = 0; j < n; ++j) {
    labels[static_cast<std::size_t>(j)] = argmax_column(probs, static_cast<std::size_t>(j));
  }
  return LabelMap(std::move(labels), probs.classes(), probs.dims());
}

OverlapPartition per_class_positives(const MulticlassProbMap& probs, Metric metric) {
  const std::size_t classes = probs.classes();
  const std::size_t d = probs.pixels();
  OverlapPartition part;
  part.positives.resize(classes);
  part.kept.resize(classes);

  const long long nc = static_cast<long long>(classes);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long cc = 0; cc < nc; ++cc) {
    const auto c = static_cast<std::size_t>(cc);
    const auto curve = metric == Metric::dice ? rankdice_rma_curve(probs.row(c))
                                              : rankiou_rma_curve(probs.row(c));
    auto& selected = part.positives[c];
    selected.assign(curve.order.begin(),
                    curve.order.begin() + static_cast<std::ptrdiff_t>(curve.tau_star));
    std::sort(selected.begin(), selected.end());
  }

  std::vector<std::uint32_t> cover(d, 0);
  for (const auto& selected : part.positives) {
    for (auto j : selected) ++cover[j];
  }
  for (std::size_t c = 0; c < classes; ++c) {
    for (auto j : part.positives[c]) {
      if (cover[j] == 1) part.kept[c].push_back(j);
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    if (cover[j] >= 2) part.overlap.push_back(static_cast<std::uint32_t>(j));
    if (cover[j] == 0) part.unassigned.push_back(static_cast<std::uint32_t>(j));
  }
  return part;
}

double rma_dice_increment(double p, double kept_sum, std::size_t kept_count, double mu) noexcept {
  const double k = static_cast<double>(kept_count);
  return 2.0 * (p + kept_sum) / (k + mu + 2.0) - 2.0 * kept_sum / (k + mu + 1.0);
}

double rma_iou_increment(double p, double kept_sum, std::size_t kept_count, double mu) noexcept {
  const double k = static_cast<double>(kept_count);
  const double gained = p + kept_sum;
  if (gained <= 0.0) return 0.0;
  const double with_pixel = k + mu - gained;
  if (with_pixel <= kResidualGuard) return std::numeric_limits<double>::infinity();
  const double without = kept_sum > 0.0 ? kept_sum / (k + mu - kept_sum) : 0.0;
  return gained / with_pixel - without;
}

double rma_score_dice(const MulticlassProbMap& probs, std::span<const std::uint32_t> kept,
                      double mu_c, std::size_t c, std::size_t j) {
  return rma_dice_increment(probs.at(c, j), kept_probability(probs, kept, c), kept.size(), mu_c);
}

double rma_score_iou(const MulticlassProbMap& probs, std::span<const std::uint32_t> kept,
                     double mu_c, std::size_t c, std::size_t j) {
  return rma_iou_increment(probs.at(c, j), kept_probability(probs, kept, c), kept.size(), mu_c);
}

double wprob_score(const MulticlassProbMap& probs, std::span<const std::uint32_t> kept,
                   std::size_t c, std::size_t j) {
  const double p = probs.at(c, j);
  return kept.empty() ? p : p / static_cast<double>(kept.size());
}

LabelMap resolve_overlaps(const MulticlassProbMap& probs, const OverlapPartition& partition,
                          ScoreKind kind) {
  const std::size_t classes = probs.classes();
  if (partition.kept.size() != classes || partition.positives.size() != classes) {
    throw Error(ErrorCode::shape_mismatch, "partition class count does not match the map");
  }
  std::vector<ClassSummary> summary(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    summary[c].kept_sum = kept_probability(probs, partition.kept[c], c);
    summary[c].kept_count = partition.kept[c].size();
    summary[c].mu = pb_mean(probs.row(c));
  }

  std::vector<std::uint32_t> labels(probs.pixels(), 0);
  for (std::size_t c = 0; c < classes; ++c) {
    for (auto j : partition.kept[c]) labels[j] = static_cast<std::uint32_t>(c);
  }

  const auto& overlap = partition.overlap;
  const long long n_overlap = static_cast<long long>(overlap.size());
#pragma omp parallel for schedule(static) if (overlap.size() >= 4096)
  for (long long i = 0; i < n_overlap; ++i) {
    const std::size_t j = overlap[static_cast<std::size_t>(i)];
    std::uint32_t best = 0;
    double best_score = score(kind, probs.at(0, j), summary[0]);
    for (std::size_t c = 1; c < classes; ++c) {
      const double s = score(kind, probs.at(c, j), summary[c]);
      if (s > best_score) {
        best_score = s;
        best = static_cast<std::uint32_t>(c);
      }
    }
    labels[j] = best;
  }

  for (auto j : partition.unassigned) labels[j] = argmax_column(probs, j);
  return LabelMap(std::move(labels), classes, probs.dims());
}

LabelMap rankseg_rma_multiclass(const MulticlassProbMap& probs, Metric metric, ScoreKind kind) {
  return resolve_overlaps(probs, per_class_positives(probs, metric), kind);
}

}  // namespace rankseg
