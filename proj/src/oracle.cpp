#include "rankseg/oracle.hpp"

#include <bit>
#include <cstdint>
#include <vector>

#include "rankseg/error.hpp"
#include "rankseg/rank_binary.hpp"

namespace rankseg::oracle {
namespace {

using Bits = std::uint32_t;

std::vector<double> outcome_probabilities(std::span<const double> p) {
  const std::size_t d = p.size();
  std::vector<double> prob(std::size_t{1} << d);
  prob[0] = 1.0;
  for (std::size_t j = 0; j < d; ++j) {
    // Extend outcomes over pixels [0, j) by pixel j.
    const std::size_t half = std::size_t{1} << j;
    for (std::size_t y = 0; y < half; ++y) {
      prob[y | half] = prob[y] * p[j];
      prob[y] *= 1.0 - p[j];
    }
  }
  return prob;
}

double metric_value(Metric metric, int tp, int predicted, int actual) noexcept {
  if (predicted == 0 && actual == 0) return 1.0;
  if (metric == Metric::dice) return 2.0 * tp / static_cast<double>(predicted + actual);
  return tp / static_cast<double>(predicted + actual - tp);
}

double expected(std::span<const double> outcomes, Bits mask, Metric metric) noexcept {
  const int predicted = std::popcount(mask);
  double sum = 0.0;
  for (std::size_t y = 0; y < outcomes.size(); ++y) {
    const auto yb = static_cast<Bits>(y);
    sum += outcomes[y] * metric_value(metric, std::popcount(mask & yb), predicted, std::popcount(yb));
  }
  return sum;
}

Bits to_bits(const BinaryMask& mask) {
  Bits bits = 0;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask[j]) bits |= Bits{1} << j;
  }
  return bits;
}

constexpr double kValueTie = 1e-12;

// Among masks of equal value: fewer pixels first, then the smaller ascending
// index list, i.e. at the lowest differing pixel the mask holding it wins.
// This is the order the rank rules' own tie-breaks induce.
bool tie_precedes(Bits a, Bits b) noexcept {
  const int ca = std::popcount(a);
  const int cb = std::popcount(b);
  if (ca != cb) return ca < cb;
  const Bits diff = a ^ b;
  if (diff == 0) return false;
  const Bits lowest = diff & (~diff + 1);
  return (a & lowest) != 0;
}

}  // namespace

double enumerate_expected_metric(const BinaryProbMap& probs, const BinaryMask& mask, Metric metric) {
  if (probs.size() > kEnumerationCap) {
    throw Error(ErrorCode::cap_exceeded, "outcome enumeration is limited to d <= 20");
  }
  if (mask.size() != probs.size()) {
    throw Error(ErrorCode::shape_mismatch, "mask and map sizes differ");
  }
  const auto outcomes = outcome_probabilities(probs.probs());
  return expected(outcomes, to_bits(mask), metric);
}

OptimalMask bayes_optimal_mask(const BinaryProbMap& probs, Metric metric) {
  const std::size_t d = probs.size();
  if (d > kSearchCap) {
    throw Error(ErrorCode::cap_exceeded, "exhaustive mask search is limited to d <= 15");
  }
  const auto outcomes = outcome_probabilities(probs.probs());
  const std::size_t masks = std::size_t{1} << d;
  std::vector<double> values(masks);
  const long long n = static_cast<long long>(masks);
#pragma omp parallel for schedule(static) if (masks >= 256)
  for (long long m = 0; m < n; ++m) {
    values[static_cast<std::size_t>(m)] = expected(outcomes, static_cast<Bits>(m), metric);
  }

  Bits best = 0;
  for (std::size_t m = 1; m < masks; ++m) {
    const auto mb = static_cast<Bits>(m);
    const bool better = values[m] > values[best] + kValueTie;
    const bool tied = !better && values[m] >= values[best] - kValueTie;
    if (better || (tied && tie_precedes(mb, best))) best = mb;
  }
  std::vector<std::uint8_t> bits(d);
  for (std::size_t j = 0; j < d; ++j) bits[j] = (best >> j) & 1U;
  return {BinaryMask(std::move(bits), probs.dims()), values[best]};
}

bool verify_ranking_property(const BinaryProbMap& probs, Metric metric) {
  const auto optimum = bayes_optimal_mask(probs, metric);
  const auto ranked = rank_probabilities(probs.probs());
  const std::size_t tau = optimum.mask.count();
  for (std::size_t k = 0; k < tau; ++k) {
    if (!optimum.mask[ranked.order[k]]) return false;
  }
  return true;
}

}  // namespace rankseg::oracle
