#pragma once

// Brute-force ground truth for tiny instances. Outcomes and masks are
// enumerated as bit patterns (bit j = pixel j).

#include <cstddef>

#include "rankseg/multiclass.hpp"
#include "rankseg/probmap.hpp"

namespace rankseg::oracle {

inline constexpr std::size_t kEnumerationCap = 20;
inline constexpr std::size_t kSearchCap = 15;

/// sum over all 2^d outcomes y of P(y) metric(mask, y); both-empty scores 1.
double enumerate_expected_metric(const BinaryProbMap& probs, const BinaryMask& mask, Metric metric);

struct OptimalMask {
  BinaryMask mask;
  double value;
};

/// Exhaustive argmax over all 2^d masks. Values within 1e-12 count as tied;
/// ties go to the mask with fewer pixels, then to the lexicographically
/// smallest ascending index list.
OptimalMask bayes_optimal_mask(const BinaryProbMap& probs, Metric metric);

/// True iff the exhaustive optimum is a prefix of the canonical ranking.
bool verify_ranking_property(const BinaryProbMap& probs, Metric metric);

}  // namespace rankseg::oracle
