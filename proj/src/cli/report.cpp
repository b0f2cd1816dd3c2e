#include <sstream>

#include "rankseg/cli.hpp"
#include "rankseg/error.hpp"

namespace rankseg::cli {
namespace {

Json pair_json(const MeanPair& pair) {
  Json j;
  j["dice"] = number(pair.dice);
  j["iou"] = number(pair.iou);
  return j;
}

// Aggregates with no present class are reported as null rather than failing the run.
template <class F>
Json aggregate(F&& compute) {
  try {
    return pair_json(compute());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::invalid_argument) throw;
    return nullptr;
  }
}

}  // namespace

Json metric_report_json(const std::vector<ImageScores>& images, const RunConfig& config) {
  PresencePolicy policy;
  policy.exclude_background = config.exclude_background;

  std::vector<std::size_t> kept;
  const auto means = per_image_means(images, policy, &kept);
  std::vector<Json> image_mean(images.size(), nullptr);
  for (std::size_t i = 0; i < kept.size(); ++i) image_mean[kept[i]] = pair_json(means[i]);

  Json per_image = Json::array();
  for (std::size_t i = 0; i < images.size(); ++i) {
    Json entry;
    entry["name"] = images[i].name;
    Json classes = Json::array();
    for (std::size_t c = 0; c < images[i].classes.size(); ++c) {
      const auto& cs = images[i].classes[c];
      Json cj;
      cj["class"] = c;
      cj["tp"] = cs.counts.tp;
      cj["fp"] = cs.counts.fp;
      cj["fn"] = cs.counts.fn;
      cj["present"] = cs.present;
      cj["dice"] = number(cs.value.dice);
      cj["iou"] = number(cs.value.iou);
      classes.push_back(cj);
    }
    entry["classes"] = classes;
    entry["mean"] = image_mean[i];
    per_image.push_back(entry);
  }

  Json aggregates;
  aggregates["image_level"] = aggregate([&] { return image_level_means(images, policy); });
  aggregates["class_level"] = aggregate([&] { return class_level_means(images, policy); });
  aggregates["dataset_level"] = aggregate([&] { return dataset_level(images, policy); });

  std::vector<double> dice(means.size());
  std::vector<double> iou(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    dice[i] = means[i].dice;
    iou[i] = means[i].iou;
  }
  Json quantiles = Json::object();
  for (double q : config.quantiles) {
    std::ostringstream key;
    key << q;
    quantiles[key.str()] = aggregate([&] {
      return MeanPair{worst_quantile(dice, q), worst_quantile(iou, q)};
    });
  }

  Json doc;
  doc["config"] = config_json(config);
  doc["per_image"] = per_image;
  doc["aggregates"] = aggregates;
  doc["quantiles"] = quantiles;
  return doc;
}

}  // namespace rankseg::cli
