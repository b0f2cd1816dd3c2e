#include <chrono>
#include <map>
#include <ostream>

#include "rankseg/cli.hpp"
#include "rankseg/error.hpp"

namespace rankseg::cli {
namespace {

namespace fs = std::filesystem;

std::map<std::string, fs::path> npy_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::io, dir.string() + " is not a directory");
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".npy") {
      out.emplace(entry.path().filename().string(), entry.path());
    }
  }
  return out;
}

}  // namespace

std::optional<Json> evaluate_report(const EvaluateArgs& args, const RunConfig& config,
                                    std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  try {
    validate(config);
    const auto preds = npy_files(args.pred_dir);
    const auto gts = npy_files(args.gt_dir);
    bool missing = false;
    for (const auto& [name, path] : preds) {
      if (!gts.count(name)) {
        err << "rankseg evaluate: no ground truth for " << path.string() << "\n";
        missing = true;
      }
    }
    for (const auto& [name, path] : gts) {
      if (!preds.count(name)) {
        err << "rankseg evaluate: no prediction for " << path.string() << "\n";
        missing = true;
      }
    }
    if (missing) return std::nullopt;
    if (preds.empty()) {
      err << "rankseg evaluate: no .npy files in " << args.pred_dir.string() << "\n";
      return std::nullopt;
    }

    std::vector<ImageScores> images;
    for (const auto& [name, path] : preds) {
      try {
        const auto pred = load_labelmap(path);
        const auto gt = load_labelmap(gts.at(name));
        images.push_back(score_image(pred, gt, name));
      } catch (const std::exception& e) {
        err << "rankseg evaluate: " << name << ": " << e.what() << "\n";
        return std::nullopt;
      }
    }

    auto doc = metric_report_json(images, config);
    Json timings;
    timings["seconds"] =
        number(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    doc["timings"] = timings;
    return doc;
  } catch (const std::exception& e) {
    err << "rankseg evaluate: " << e.what() << "\n";
    return std::nullopt;
  }
}

int cmd_evaluate(const EvaluateArgs& args, const RunConfig& config, std::ostream& out,
                 std::ostream& err) {
  const auto doc = evaluate_report(args, config, err);
  if (!doc) return 1;
  try {
    emit_json(*doc, args.out, out);
  } catch (const std::exception& e) {
    err << "rankseg evaluate: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace rankseg::cli
