#include "rankseg/reference.hpp"

#include <numbers>

namespace rankseg::reference {

std::vector<fft::Complex> naive_dft(std::span<const fft::Complex> data, bool inverse) {
  const std::size_t n = data.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<fft::Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    fft::Complex sum{};
    for (std::size_t t = 0; t < n; ++t) {
      // reduce k t mod n before scaling, to keep the angle small
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>((k * t) % n) /
                           static_cast<double>(n);
      sum += data[t] * std::polar(1.0, angle);
    }
    out[k] = inverse ? sum / static_cast<double>(n) : sum;
  }
  return out;
}

std::vector<double> direct_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (k >= i && k - i < b.size()) out[k] += a[i] * b[k - i];
    }
  }
  return out;
}

std::vector<double> pb_pmf_cf_direct(std::span<const double> probs) {
  const std::size_t m = probs.size();
  const std::size_t n = m + 1;
  std::vector<fft::Complex> cf(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto w = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) /
                                       static_cast<double>(n));
    fft::Complex z(1.0, 0.0);
    for (double p : probs) z *= (1.0 - p) + p * w;
    cf[k] = z;
  }
  const auto inverted = naive_dft(cf, false);
  std::vector<double> pmf(n);
  for (std::size_t l = 0; l < n; ++l) pmf[l] = inverted[l].real() / static_cast<double>(n);
  return pmf;
}

VolumeCurve rankdice_ba_direct(const BinaryProbMap& probs) {
  const std::size_t d = probs.size();
  const auto ranked = rank_probabilities(probs.probs());
  std::vector<double> comps;
  for (std::size_t k = 0; k < ranked.nonzero; ++k) comps.push_back(probs[ranked.order[k]]);
  const auto gamma = pb_pmf_dp(comps);

  VolumeCurve curve;
  curve.kind = Objective::dice_ba;
  curve.order = ranked.order;
  curve.cumsum = ranked.cumsum;
  curve.values.assign(d + 1, 0.0);
  for (std::size_t tau = 1; tau <= d; ++tau) {
    double inner = 0.0;
    for (std::size_t l = 0; l < gamma.pmf().size(); ++l) {
      inner += 2.0 * gamma[l] / static_cast<double>(tau + l + 1);
    }
    curve.values[tau] = inner * curve.cumsum[tau];
  }
  curve.tau_star = select_volume(curve.values, ranked.nonzero);
  return curve;
}

LabelMap argmax_prob(const MulticlassProbMap& probs) {
  std::vector<std::uint32_t> labels(probs.pixels(), 0);
  for (std::size_t j = 0; j < probs.pixels(); ++j) {
    for (std::size_t c = 1; c < probs.classes(); ++c) {
      if (probs.at(c, j) > probs.at(labels[j], j)) labels[j] = static_cast<std::uint32_t>(c);
    }
  }
  return LabelMap(std::move(labels), probs.classes(), probs.dims());
}

LabelMap rankseg_rma_multiclass(const MulticlassProbMap& probs, Metric metric, ScoreKind kind) {
  const std::size_t classes = probs.classes();
  const std::size_t d = probs.pixels();

  std::vector<std::vector<std::uint8_t>> selected(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    const auto row = probs.row(c);
    BinaryProbMap channel(std::vector<double>(row.begin(), row.end()));
    auto result = metric == Metric::dice ? rankdice_rma(channel) : rankiou_rma(channel);
    selected[c].assign(result.mask.bits().begin(), result.mask.bits().end());
  }

  std::vector<std::uint32_t> labels(d, 0);
  std::vector<std::vector<std::uint32_t>> kept(classes);
  std::vector<std::size_t> overlap;
  std::vector<std::size_t> unassigned;
  for (std::size_t j = 0; j < d; ++j) {
    std::size_t claims = 0;
    std::size_t owner = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      if (selected[c][j]) {
        ++claims;
        owner = c;
      }
    }
    if (claims == 1) {
      labels[j] = static_cast<std::uint32_t>(owner);
      kept[owner].push_back(static_cast<std::uint32_t>(j));
    } else if (claims == 0) {
      unassigned.push_back(j);
    } else {
      overlap.push_back(j);
    }
  }

  std::vector<double> mu(classes);
  for (std::size_t c = 0; c < classes; ++c) mu[c] = pb_mean(probs.row(c));
  for (auto j : overlap) {
    std::size_t best = 0;
    double best_score = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      double s = 0.0;
      switch (kind) {
        case ScoreKind::rma_dice: s = rma_score_dice(probs, kept[c], mu[c], c, j); break;
        case ScoreKind::rma_iou: s = rma_score_iou(probs, kept[c], mu[c], c, j); break;
        case ScoreKind::prob: s = probs.at(c, j); break;
        case ScoreKind::wprob: s = wprob_score(probs, kept[c], c, j); break;
      }
      if (c == 0 || s > best_score) {
        best_score = s;
        best = c;
      }
    }
    labels[j] = static_cast<std::uint32_t>(best);
  }
  const auto fallback = reference::argmax_prob(probs);
  for (auto j : unassigned) labels[j] = fallback[j];
  return LabelMap(std::move(labels), classes, probs.dims());
}

}  // namespace rankseg::reference
