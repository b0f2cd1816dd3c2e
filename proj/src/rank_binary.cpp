#include "rankseg/rank_binary.hpp"

#include <algorithm>
#include <cmath>

#include "rankseg/error.hpp"
#include "rankseg/fft.hpp"
#include "rankseg/poisson_binomial.hpp"

namespace rankseg {
namespace {

struct Keyed {
  double p;
  std::uint32_t index;
};

class RunningSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    carry_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

void check_cap(std::size_t d, const ExactOptions& options, const char* rule, const char* hint) {
  if (d > options.cap) {
    throw Error(ErrorCode::cap_exceeded,
                std::string(rule) + ": d = " + std::to_string(d) + " exceeds the exact-rule cap of " +
                    std::to_string(options.cap) + "; use " + hint + " or raise --exact-cap");
  }
}

BinaryMask top_mask(const VolumeCurve& curve, const Shape& dims) {
  std::vector<std::uint8_t> bits(curve.order.size(), 0);
  for (std::size_t k = 0; k < curve.tau_star; ++k) bits[curve.order[k]] = 1;
  return BinaryMask(std::move(bits), dims);
}

VolumeCurve start_curve(Objective kind, RankedProbs&& ranked) {
  VolumeCurve curve;
  curve.kind = kind;
  curve.order = std::move(ranked.order);
  curve.cumsum = std::move(ranked.cumsum);
  curve.values.assign(curve.order.size() + 1, 0.0);
  return curve;
}

std::vector<double> nonzero_components(std::span<const double> probs, const VolumeCurve& curve,
                                       std::size_t nonzero) {
  std::vector<double> comps(nonzero);
  for (std::size_t k = 0; k < nonzero; ++k) comps[k] = probs[curve.order[k]];
  return comps;
}

// PMF of the nonzero components without the one at rank `skip`, falling back
// to a rebuild when deconvolution is numerically unsafe.
PBDistribution leave_one_out_or_rebuild(const PBDistribution& full, std::span<const double> comps,
                                        std::size_t skip) {
  try {
    return pb_leave_one_out(full, comps[skip]);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::unstable) throw;
    std::vector<double> reduced;
    reduced.reserve(comps.size() - 1);
    for (std::size_t k = 0; k < comps.size(); ++k) {
      if (k != skip) reduced.push_back(comps[k]);
    }
    return pb_pmf_dp(reduced);
  }
}

}  // namespace

const char* to_string(Objective kind) noexcept {
  switch (kind) {
    case Objective::dice_exact: return "dice_exact";
    case Objective::dice_ba: return "dice_ba";
    case Objective::dice_rma: return "dice_rma";
    case Objective::iou_exact: return "iou_exact";
    case Objective::iou_rma: return "iou_rma";
  }
  return "unknown";
}

double VolumeCurve::best_value() const noexcept {
  if (tau_star == 0 && empty_value) return *empty_value;
  return values.empty() ? 0.0 : values[tau_star];
}

RankedProbs rank_probabilities(std::span<const double> probs) {
  const std::size_t d = probs.size();
  std::vector<Keyed> keyed;
  keyed.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    if (probs[j] > 0.0) keyed.push_back({probs[j], static_cast<std::uint32_t>(j)});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return a.p > b.p || (a.p == b.p && a.index < b.index);
  });

  RankedProbs ranked;
  ranked.nonzero = keyed.size();
  ranked.order.reserve(d);
  for (const auto& k : keyed) ranked.order.push_back(k.index);
  for (std::size_t j = 0; j < d; ++j) {
    if (!(probs[j] > 0.0)) ranked.order.push_back(static_cast<std::uint32_t>(j));
  }

  ranked.cumsum.resize(d + 1);
  ranked.cumsum[0] = 0.0;
  RunningSum running;
  for (std::size_t k = 0; k < keyed.size(); ++k) {
    running.add(keyed[k].p);
    ranked.cumsum[k + 1] = running.value();
  }
  std::fill(ranked.cumsum.begin() + static_cast<std::ptrdiff_t>(keyed.size() + 1),
            ranked.cumsum.end(), running.value());
  ranked.mean = pb_mean(probs);
  return ranked;
}

std::size_t select_volume(std::span<const double> values, std::size_t nonzero,
                          std::optional<double> empty_value) noexcept {
  std::size_t best_tau = 0;
  double best = 0.0;
  const std::size_t last = std::min(nonzero, values.empty() ? 0 : values.size() - 1);
  for (std::size_t tau = 1; tau <= last; ++tau) {
    if (best_tau == 0 || values[tau] > best) {
      best = values[tau];
      best_tau = tau;
    }
  }
  if (best_tau != 0 && !(best > 0.0)) return 0;
  if (best_tau != 0 && empty_value && *empty_value >= best) return 0;
  return best_tau;
}

BinaryMask threshold_rule(const BinaryProbMap& probs, double threshold) {
  std::vector<std::uint8_t> bits(probs.size());
  for (std::size_t j = 0; j < probs.size(); ++j) bits[j] = probs[j] >= threshold ? 1 : 0;
  return BinaryMask(std::move(bits), probs.dims());
}

BinaryMask argmax_rule(const BinaryProbMap& probs) {
  std::vector<std::uint8_t> bits(probs.size());
  for (std::size_t j = 0; j < probs.size(); ++j) bits[j] = probs[j] > 1.0 - probs[j] ? 1 : 0;
  return BinaryMask(std::move(bits), probs.dims());
}

VolumeCurve rankdice_rma_curve(std::span<const double> probs) {
  auto ranked = rank_probabilities(probs);
  const double mu = ranked.mean;
  const std::size_t nonzero = ranked.nonzero;
  auto curve = start_curve(Objective::dice_rma, std::move(ranked));
  const std::size_t d = probs.size();
  for (std::size_t tau = 1; tau <= d; ++tau) {
    curve.values[tau] = 2.0 * curve.cumsum[tau] / (static_cast<double>(tau) + mu + 1.0);
  }
  curve.tau_star = select_volume(curve.values, nonzero);
  return curve;
}

VolumeCurve rankiou_rma_curve(std::span<const double> probs) {
  auto ranked = rank_probabilities(probs);
  const double mu = ranked.mean;
  const std::size_t nonzero = ranked.nonzero;
  auto curve = start_curve(Objective::iou_rma, std::move(ranked));
  const std::size_t d = probs.size();
  for (std::size_t tau = 1; tau <= d; ++tau) {
    const double q = curve.cumsum[tau];
    // mu - q is the expected volume outside the top tau; clamp rounding below zero
    curve.values[tau] = q / (static_cast<double>(tau) + std::max(mu - q, 0.0));
  }
  curve.tau_star = select_volume(curve.values, nonzero);
  return curve;
}

RuleResult rankdice_rma(const BinaryProbMap& probs) {
  auto curve = rankdice_rma_curve(probs.probs());
  auto mask = top_mask(curve, probs.dims());
  return {std::move(mask), std::move(curve)};
}

RuleResult rankiou_rma(const BinaryProbMap& probs) {
  auto curve = rankiou_rma_curve(probs.probs());
  auto mask = top_mask(curve, probs.dims());
  return {std::move(mask), std::move(curve)};
}

RuleResult rankdice_ba(const BinaryProbMap& probs) {
  const std::size_t d = probs.size();
  auto ranked = rank_probabilities(probs.probs());
  const std::size_t m = ranked.nonzero;
  auto curve = start_curve(Objective::dice_ba, std::move(ranked));

  const auto comps = nonzero_components(probs.probs(), curve, m);
  const auto gamma = pb_pmf_tree(comps);

  // S(tau) = sum_l P(Gamma = l) * 2 / (tau + l + 1) for all tau at once.
  std::vector<double> reciprocal(d + m + 1);
  for (std::size_t k = 0; k < reciprocal.size(); ++k) {
    reciprocal[k] = 2.0 / (static_cast<double>(k) + 1.0);
  }
  const auto inner = fft::cross_correlate(gamma.pmf(), reciprocal, d + 1);
  for (std::size_t tau = 1; tau <= d; ++tau) curve.values[tau] = inner[tau] * curve.cumsum[tau];

  curve.tau_star = select_volume(curve.values, m);
  auto mask = top_mask(curve, probs.dims());
  return {std::move(mask), std::move(curve)};
}

RuleResult rankdice_exact(const BinaryProbMap& probs, const ExactOptions& options) {
  const std::size_t d = probs.size();
  check_cap(d, options, "rankdice-exact", "rankdice-rma or rankdice-ba");
  auto ranked = rank_probabilities(probs.probs());
  const std::size_t m = ranked.nonzero;
  auto curve = start_curve(Objective::dice_exact, std::move(ranked));

  const auto comps = nonzero_components(probs.probs(), curve, m);
  const auto full = pb_pmf_dp(comps);
  if (options.credit_empty) curve.empty_value = full[0];

  // weighted[l] accumulates sum_{k <= tau} p_{j_k} P(Gamma_{-j_k} = l), so that
  // pi(J_tau) = 2 sum_l weighted[l] / (tau + l + 1).
  std::vector<double> weighted(std::max<std::size_t>(m, 1), 0.0);
  for (std::size_t tau = 1; tau <= d; ++tau) {
    if (tau <= m) {
      const auto loo = leave_one_out_or_rebuild(full, comps, tau - 1);
      const double p = comps[tau - 1];
      for (std::size_t l = 0; l < loo.pmf().size(); ++l) weighted[l] += p * loo[l];
    }
    RunningSum acc;
    const double shift = static_cast<double>(tau) + 1.0;
    for (std::size_t l = 0; l < weighted.size(); ++l) {
      acc.add(weighted[l] / (shift + static_cast<double>(l)));
    }
    curve.values[tau] = 2.0 * acc.value();
  }

  curve.tau_star = select_volume(curve.values, m, curve.empty_value);
  auto mask = top_mask(curve, probs.dims());
  return {std::move(mask), std::move(curve)};
}

RuleResult rankiou_exact(const BinaryProbMap& probs, const ExactOptions& options) {
  const std::size_t d = probs.size();
  check_cap(d, options, "rankiou-exact", "rankiou-rma");
  auto ranked = rank_probabilities(probs.probs());
  const std::size_t m = ranked.nonzero;
  auto curve = start_curve(Objective::iou_exact, std::move(ranked));

  // Complement PMF of Gamma_{-J_tau}, grown one Bernoulli per step from tau = d down.
  std::vector<double> outside{1.0};
  outside.reserve(m + 1);
  for (std::size_t tau = d; tau >= 1; --tau) {
    const double t = static_cast<double>(tau);
    RunningSum acc;
    for (std::size_t l = 0; l < outside.size(); ++l) {
      acc.add(outside[l] / (t + static_cast<double>(l)));
    }
    curve.values[tau] = curve.cumsum[tau] * acc.value();

    const double p = probs[curve.order[tau - 1]];
    if (p > 0.0) {
      const double q = 1.0 - p;
      outside.push_back(0.0);
      for (std::size_t l = outside.size() - 1; l > 0; --l) {
        outside[l] = outside[l] * q + outside[l - 1] * p;
      }
      outside[0] *= q;
    }
  }
  if (options.credit_empty) curve.empty_value = outside[0];

  curve.tau_star = select_volume(curve.values, m, curve.empty_value);
  auto mask = top_mask(curve, probs.dims());
  return {std::move(mask), std::move(curve)};
}

double expected_dice(const BinaryProbMap& probs, const BinaryMask& mask,
                     const ExactOptions& options) {
  if (mask.size() != probs.size()) {
    throw Error(ErrorCode::shape_mismatch, "expected_dice: mask and map sizes differ");
  }
  std::vector<double> comps;
  std::vector<std::size_t> selected;  // positions in comps of selected nonzero pixels
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] > 0.0) {
      if (mask[j]) selected.push_back(comps.size());
      comps.push_back(probs[j]);
    }
  }
  if (comps.size() > options.cap) {
    throw Error(ErrorCode::cap_exceeded, "expected_dice: " + std::to_string(comps.size()) +
                                             " nonzero probabilities exceed the cap of " +
                                             std::to_string(options.cap));
  }
  const auto full = pb_pmf_dp(comps);
  const std::size_t volume = mask.count();
  if (volume == 0) return full[0];

  RunningSum acc;
  const double shift = static_cast<double>(volume) + 1.0;
  for (std::size_t k : selected) {
    const auto loo = leave_one_out_or_rebuild(full, comps, k);
    acc.add(2.0 * comps[k] * reciprocal_moment(loo, shift));
  }
  return acc.value();
}

double expected_iou(const BinaryProbMap& probs, const BinaryMask& mask,
                    const ExactOptions& options) {
  if (mask.size() != probs.size()) {
    throw Error(ErrorCode::shape_mismatch, "expected_iou: mask and map sizes differ");
  }
  std::vector<double> inside;
  std::vector<double> outside;
  std::size_t nonzero = 0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] > 0.0) ++nonzero;
    if (mask[j]) {
      inside.push_back(probs[j]);
    } else if (probs[j] > 0.0) {
      outside.push_back(probs[j]);
    }
  }
  if (nonzero > options.cap) {
    throw Error(ErrorCode::cap_exceeded, "expected_iou: " + std::to_string(nonzero) +
                                             " nonzero probabilities exceed the cap of " +
                                             std::to_string(options.cap));
  }
  const auto rest = pb_pmf_dp(outside);
  if (inside.empty()) return rest[0];
  return pb_mean(inside) * reciprocal_moment(rest, static_cast<double>(inside.size()));
}

}  // namespace rankseg
