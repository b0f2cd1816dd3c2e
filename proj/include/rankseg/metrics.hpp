#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rankseg/probmap.hpp"

namespace rankseg {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& other) noexcept {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct DiceIou {
  double dice = 1.0;
  double iou = 1.0;
};

ConfusionCounts confusion(const LabelMap& pred, const LabelMap& gt, std::uint32_t c);
/// Counts for every class in one pass; result has max(pred, gt) class count entries.
std::vector<ConfusionCounts> confusion_all(const LabelMap& pred, const LabelMap& gt);

/// dice = 2tp / (2tp + fp + fn), iou = tp / (tp + fp + fn); (1, 1) when all are zero.
DiceIou dice_iou_from_counts(const ConfusionCounts& counts) noexcept;

/// A class is present in an image when it occurs in the ground truth or the
/// prediction. The background class is left out of every average by default.
struct PresencePolicy {
  bool exclude_background = true;
  std::uint32_t background = 0;
};

struct ClassScore {
  ConfusionCounts counts;
  DiceIou value;
  bool present = false;
};

struct ImageScores {
  std::string name;
  std::vector<ClassScore> classes;
};

ImageScores score_image(const LabelMap& pred, const LabelMap& gt, std::string name = {});

struct MeanPair {
  double dice = 0.0;
  double iou = 0.0;
};

/// Mean over present classes per image, then over images with any present class.
MeanPair image_level_means(std::span<const ImageScores> images, const PresencePolicy& policy = {});
/// Mean over images where each class is present, then over classes present anywhere.
MeanPair class_level_means(std::span<const ImageScores> images, const PresencePolicy& policy = {});
/// Counts pooled over images per class, then averaged over classes present anywhere.
MeanPair dataset_level(std::span<const ImageScores> images, const PresencePolicy& policy = {});

/// Per-image class means for images with at least one present class, in input
/// order; `kept` receives the matching image indices when non-null.
std::vector<MeanPair> per_image_means(std::span<const ImageScores> images,
                                      const PresencePolicy& policy,
                                      std::vector<std::size_t>* kept = nullptr);

/// Mean of the floor(n q) smallest values. Throws when floor(n q) == 0.
double worst_quantile(std::span<const double> values, double q);

struct MetricReport {
  std::vector<ImageScores> per_image;
  MeanPair image_means;
  MeanPair class_means;
  MeanPair dataset;
  std::map<double, MeanPair> quantiles;  // q -> worst-q means of per-image values
};

MetricReport build_report(std::vector<ImageScores> images, const PresencePolicy& policy,
                          std::span<const double> quantiles);

}  // namespace rankseg
