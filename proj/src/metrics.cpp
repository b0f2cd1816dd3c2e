#include "rankseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rankseg/error.hpp"

namespace rankseg {
namespace {

void check_shapes(const LabelMap& pred, const LabelMap& gt) {
  if (pred.size() != gt.size() || pred.dims() != gt.dims()) {
    throw Error(ErrorCode::shape_mismatch, "prediction and ground truth shapes differ");
  }
}

bool counts(const PresencePolicy& policy, std::size_t c) noexcept {
  return !(policy.exclude_background && c == policy.background);
}

double mean_of(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

ConfusionCounts confusion(const LabelMap& pred, const LabelMap& gt, std::uint32_t c) {
  check_shapes(pred, gt);
  ConfusionCounts cc;
  for (std::size_t j = 0; j < pred.size(); ++j) {
    const bool p = pred[j] == c;
    const bool g = gt[j] == c;
    cc.tp += p && g;
    cc.fp += p && !g;
    cc.fn += !p && g;
  }
  return cc;
}

std::vector<ConfusionCounts> confusion_all(const LabelMap& pred, const LabelMap& gt) {
  check_shapes(pred, gt);
  std::vector<ConfusionCounts> out(std::max(pred.classes(), gt.classes()));
  for (std::size_t j = 0; j < pred.size(); ++j) {
    const auto p = pred[j];
    const auto g = gt[j];
    if (p == g) {
      ++out[p].tp;
    } else {
      ++out[p].fp;
      ++out[g].fn;
    }
  }
  return out;
}

DiceIou dice_iou_from_counts(const ConfusionCounts& cc) noexcept {
  if (cc.tp == 0 && cc.fp == 0 && cc.fn == 0) return {1.0, 1.0};
  const double tp = static_cast<double>(cc.tp);
  const double errors = static_cast<double>(cc.fp + cc.fn);
  return {2.0 * tp / (2.0 * tp + errors), tp / (tp + errors)};
}

ImageScores score_image(const LabelMap& pred, const LabelMap& gt, std::string name) {
  ImageScores image;
  image.name = std::move(name);
  const auto all = confusion_all(pred, gt);
  image.classes.resize(all.size());
  for (std::size_t c = 0; c < all.size(); ++c) {
    auto& entry = image.classes[c];
    entry.counts = all[c];
    entry.value = dice_iou_from_counts(all[c]);
    entry.present = all[c].tp + all[c].fp + all[c].fn > 0;
  }
  return image;
}

std::vector<MeanPair> per_image_means(std::span<const ImageScores> images,
                                      const PresencePolicy& policy,
                                      std::vector<std::size_t>* kept) {
  std::vector<MeanPair> out;
  if (kept) kept->clear();
  for (std::size_t i = 0; i < images.size(); ++i) {
    double dice = 0.0;
    double iou = 0.0;
    std::size_t n = 0;
    for (std::size_t c = 0; c < images[i].classes.size(); ++c) {
      const auto& entry = images[i].classes[c];
      if (!entry.present || !counts(policy, c)) continue;
      dice += entry.value.dice;
      iou += entry.value.iou;
      ++n;
    }
    if (n == 0) continue;
    out.push_back({dice / static_cast<double>(n), iou / static_cast<double>(n)});
    if (kept) kept->push_back(i);
  }
  return out;
}

MeanPair image_level_means(std::span<const ImageScores> images, const PresencePolicy& policy) {
  const auto means = per_image_means(images, policy);
  if (means.empty()) {
    throw Error(ErrorCode::invalid_argument, "image-level means: no image has a present class");
  }
  MeanPair out;
  for (const auto& m : means) {
    out.dice += m.dice;
    out.iou += m.iou;
  }
  out.dice /= static_cast<double>(means.size());
  out.iou /= static_cast<double>(means.size());
  return out;
}

MeanPair class_level_means(std::span<const ImageScores> images, const PresencePolicy& policy) {
  std::size_t classes = 0;
  for (const auto& image : images) classes = std::max(classes, image.classes.size());
  MeanPair out;
  std::size_t used = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (!counts(policy, c)) continue;
    double dice = 0.0;
    double iou = 0.0;
    std::size_t n = 0;
    for (const auto& image : images) {
      if (c >= image.classes.size() || !image.classes[c].present) continue;
      dice += image.classes[c].value.dice;
      iou += image.classes[c].value.iou;
      ++n;
    }
    if (n == 0) continue;
    out.dice += dice / static_cast<double>(n);
    out.iou += iou / static_cast<double>(n);
    ++used;
  }
  if (used == 0) {
    throw Error(ErrorCode::invalid_argument, "class-level means: no class is present");
  }
  out.dice /= static_cast<double>(used);
  out.iou /= static_cast<double>(used);
  return out;
}

MeanPair dataset_level(std::span<const ImageScores> images, const PresencePolicy& policy) {
  std::size_t classes = 0;
  for (const auto& image : images) classes = std::max(classes, image.classes.size());
  MeanPair out;
  std::size_t used = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (!counts(policy, c)) continue;
    ConfusionCounts pooled;
    bool present = false;
    for (const auto& image : images) {
      if (c >= image.classes.size()) continue;
      pooled += image.classes[c].counts;
      present = present || image.classes[c].present;
    }
    if (!present) continue;
    const auto v = dice_iou_from_counts(pooled);
    out.dice += v.dice;
    out.iou += v.iou;
    ++used;
  }
  if (used == 0) throw Error(ErrorCode::invalid_argument, "dataset-level: no class is present");
  out.dice /= static_cast<double>(used);
  out.iou /= static_cast<double>(used);
  return out;
}

double worst_quantile(std::span<const double> values, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorCode::invalid_argument, "quantile must be in (0, 1]");
  // the small offset keeps products such as 100 * 0.29 from flooring one short
  const auto count = static_cast<std::size_t>(
      std::floor(static_cast<double>(values.size()) * q + 1e-9));
  if (count == 0) {
    throw Error(ErrorCode::invalid_argument,
                "worst quantile: floor(n q) = 0 for n = " + std::to_string(values.size()));
  }
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> lowest(count);
  for (std::size_t i = 0; i < count; ++i) lowest[i] = values[idx[i]];
  return mean_of(lowest);
}

MetricReport build_report(std::vector<ImageScores> images, const PresencePolicy& policy,
                          std::span<const double> quantiles) {
  MetricReport report;
  report.image_means = image_level_means(images, policy);
  report.class_means = class_level_means(images, policy);
  report.dataset = dataset_level(images, policy);
  const auto means = per_image_means(images, policy);
  std::vector<double> dice(means.size());
  std::vector<double> iou(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    dice[i] = means[i].dice;
    iou[i] = means[i].iou;
  }
  for (double q : quantiles) report.quantiles[q] = {worst_quantile(dice, q), worst_quantile(iou, q)};
  report.per_image = std::move(images);
  return report;
}

}  // namespace rankseg
