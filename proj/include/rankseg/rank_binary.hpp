#pragma once

// Binary segmentation decision rules. Every rank-based rule orders pixels by
// descending probability (ties by ascending index), evaluates an objective
// for each volume tau, and keeps the top tau* pixels.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rankseg/probmap.hpp"

namespace rankseg {

enum class Objective { dice_exact, dice_ba, dice_rma, iou_exact, iou_rma };

const char* to_string(Objective kind) noexcept;

inline constexpr std::size_t kDefaultExactCap = 4096;

struct ExactOptions {
  /// Largest d the quadratic-cost rules accept.
  std::size_t cap = kDefaultExactCap;
  /// Let the empty mask compete with its expected metric P(Gamma = 0), as the
  /// brute-force optimum does. Off gives pi(J_0) = 0, so the empty mask is
  /// chosen only when nothing scores above zero.
  bool credit_empty = true;
};

struct RankedProbs {
  std::vector<std::uint32_t> order;  // pixel indices, descending probability
  std::vector<double> cumsum;        // cumsum[tau] = sum of the top tau probabilities
  std::size_t nonzero = 0;           // pixels with p > 0; they are a prefix of order
  double mean = 0.0;                 // sum of all p, compensated
};

/// Stable descending order plus compensated prefix sums.
RankedProbs rank_probabilities(std::span<const double> probs);

struct VolumeCurve {
  Objective kind = Objective::dice_rma;
  std::vector<std::uint32_t> order;
  std::vector<double> cumsum;  // size d + 1
  std::vector<double> values;  // objective per tau in {0..d}; values[0] = 0
  std::size_t tau_star = 0;
  /// Expected metric of the empty mask, P(Gamma = 0). Only the exact rules
  /// set it; when present it competes with values[1..] for the optimum.
  std::optional<double> empty_value;

  /// The objective attained by tau_star (empty_value when tau_star == 0 and set).
  double best_value() const noexcept;
};

struct RuleResult {
  BinaryMask mask;
  VolumeCurve curve;
};

BinaryMask threshold_rule(const BinaryProbMap& probs, double threshold);
/// Two-channel argmax (background 1-p vs foreground p), ties to background.
BinaryMask argmax_rule(const BinaryProbMap& probs);

RuleResult rankdice_exact(const BinaryProbMap& probs, const ExactOptions& options = {});
RuleResult rankdice_ba(const BinaryProbMap& probs);
RuleResult rankdice_rma(const BinaryProbMap& probs);
RuleResult rankiou_exact(const BinaryProbMap& probs, const ExactOptions& options = {});
RuleResult rankiou_rma(const BinaryProbMap& probs);

/// RMA volume curves on a raw row of probabilities (values already in [0,1]).
/// Used by the multiclass path, which works on channel views.
VolumeCurve rankdice_rma_curve(std::span<const double> probs);
VolumeCurve rankiou_rma_curve(std::span<const double> probs);

/// Smallest tau in [1, nonzero] maximizing values; 0 when nothing positive
/// is available or when `empty_value` is at least the best value found.
std::size_t select_volume(std::span<const double> values, std::size_t nonzero,
                          std::optional<double> empty_value = std::nullopt) noexcept;

/// Exact E[Dice(mask, Y)] for independent Y_j ~ Bernoulli(p_j), with
/// Dice(empty, empty) = 1. Work is quadratic in the number of nonzero p_j,
/// which must not exceed options.cap.
double expected_dice(const BinaryProbMap& probs, const BinaryMask& mask,
                     const ExactOptions& options = {});
/// Exact E[IoU(mask, Y)], same conventions as expected_dice.
double expected_iou(const BinaryProbMap& probs, const BinaryMask& mask,
                    const ExactOptions& options = {});

}  // namespace rankseg
