#pragma once

// Non-overlapping multiclass prediction. Each class row is segmented by the
// binary RMA rule; pixels claimed by two or more classes are then assigned
// to the class with the largest score against the frozen non-overlapping sets.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rankseg/probmap.hpp"

namespace rankseg {

enum class Metric { dice, iou };
enum class ScoreKind { rma_dice, rma_iou, prob, wprob };

const char* to_string(Metric metric) noexcept;
const char* to_string(ScoreKind kind) noexcept;

struct OverlapPartition {
  std::vector<std::vector<std::uint32_t>> positives;  // per class, ascending
  std::vector<std::vector<std::uint32_t>> kept;       // positives minus overlap
  std::vector<std::uint32_t> overlap;                 // ascending
  std::vector<std::uint32_t> unassigned;              // in no positives set
};

/// Per-pixel argmax over classes, ties to the lowest class index.
LabelMap argmax_prob(const MulticlassProbMap& probs);

/// Runs the binary RMA rule for `metric` on every class row (classes in
/// parallel) and splits the result into kept / overlap / unassigned pixels.
OverlapPartition per_class_positives(const MulticlassProbMap& probs, Metric metric);

/// Gain in the Dice-RMA objective of adding a pixel with probability `p` to a
/// set holding `kept_count` pixels of total probability `kept_sum`.
double rma_dice_increment(double p, double kept_sum, std::size_t kept_count, double mu) noexcept;
/// IoU-RMA analogue; +infinity when the pixel would exhaust the residual volume.
double rma_iou_increment(double p, double kept_sum, std::size_t kept_count, double mu) noexcept;

double rma_score_dice(const MulticlassProbMap& probs, std::span<const std::uint32_t> kept,
                      double mu_c, std::size_t c, std::size_t j);
double rma_score_iou(const MulticlassProbMap& probs, std::span<const std::uint32_t> kept,
                     double mu_c, std::size_t c, std::size_t j);
/// p_{c,j} / |kept|, or the raw probability when the kept set is empty.
double wprob_score(const MulticlassProbMap& probs, std::span<const std::uint32_t> kept,
                   std::size_t c, std::size_t j);

/// Kept pixels keep their class; overlap pixels take the argmax of `kind`
/// over all classes; unassigned pixels fall back to argmax_prob.
LabelMap resolve_overlaps(const MulticlassProbMap& probs, const OverlapPartition& partition,
                          ScoreKind kind);

LabelMap rankseg_rma_multiclass(const MulticlassProbMap& probs, Metric metric, ScoreKind kind);

}  // namespace rankseg
