#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "rankseg/probmap.hpp"

namespace rankseg::synthetic {

enum class Kind {
  uniform,  // i.i.d. Uniform(lo, hi)
  blobby,   // box-smoothed noise pushed through a steep logistic
};

std::vector<double> probabilities(std::size_t d, Kind kind, std::uint64_t seed, double lo = 0.0,
                                  double hi = 1.0);

/// Draws Y_j ~ Bernoulli(p_j) independently.
BinaryMask sample_mask(std::span<const double> probs, std::mt19937_64& rng);

}  // namespace rankseg::synthetic
