#include <glob.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <set>

#include "rankseg/cli.hpp"
#include "rankseg/error.hpp"
#include "rankseg/npy.hpp"

namespace rankseg::cli {
namespace {

namespace fs = std::filesystem;

std::vector<fs::path> expand(const std::vector<std::string>& patterns) {
  std::set<fs::path> found;
  for (const auto& pattern : patterns) {
    std::error_code ec;
    if (fs::is_directory(pattern, ec)) {
      for (const auto& entry : fs::directory_iterator(pattern)) {
        if (entry.is_regular_file() && entry.path().extension() == ".npy") found.insert(entry.path());
      }
      continue;
    }
    if (fs::exists(pattern, ec)) {
      found.insert(pattern);
      continue;
    }
    glob_t matches{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &matches);
    if (rc == 0) {
      for (std::size_t i = 0; i < matches.gl_pathc; ++i) found.insert(matches.gl_pathv[i]);
    }
    globfree(&matches);
    if (rc != 0) throw Error(ErrorCode::io, "no input matches '" + pattern + "'");
  }
  return {found.begin(), found.end()};
}

// A map is read as multiclass when its leading axis has at least two entries
// and every pixel's values along that axis sum to 1.
bool looks_multiclass(const fs::path& path) {
  const auto array = npy::read(path);
  const auto& shape = array.header.shape;
  if (shape.size() < 2 || shape[0] < 2 || !npy::is_floating(array.header.dtype)) return false;
  const auto values = npy::to_doubles(array);
  const std::size_t classes = shape[0];
  const std::size_t pixels = values.size() / classes;
  for (std::size_t j = 0; j < pixels; ++j) {
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum += values[c * pixels + j];
    if (!(std::abs(sum - 1.0) <= kSimplexTolerance)) return false;
  }
  return true;
}

struct FileResult {
  bool ok = false;
  std::string message;
  std::string mode;
  fs::path output;
  double seconds = 0.0;
};

FileResult process(const fs::path& input, const fs::path& out_dir, Mode mode,
                   const RunConfig& config) {
  FileResult result;
  result.output = out_dir / input.filename();
  try {
    const bool multiclass = mode == Mode::multiclass ||
                            (mode == Mode::auto_detect && looks_multiclass(input));
    result.mode = multiclass ? "multiclass" : "binary";
    if (multiclass) {
      const auto probs = load_multiclass_probmap(input);
      const auto start = std::chrono::steady_clock::now();
      const auto labels = predict_multiclass(probs, config);
      result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      save_labelmap(labels, result.output);
    } else {
      const auto probs = load_binary_probmap(input);
      const auto start = std::chrono::steady_clock::now();
      const auto mask = predict_binary(probs, config);
      result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      save_mask(mask, result.output);
    }
    result.ok = true;
  } catch (const std::exception& e) {
    result.message = input.string() + ": " + e.what();
  }
  return result;
}

}  // namespace

BinaryMask predict_binary(const BinaryProbMap& probs, const RunConfig& config) {
  ExactOptions exact;
  exact.cap = config.exact_cap;
  switch (config.rule) {
    case Rule::argmax: return argmax_rule(probs);
    case Rule::threshold: return threshold_rule(probs, config.threshold);
    case Rule::rankdice_exact: return rankdice_exact(probs, exact).mask;
    case Rule::rankdice_ba: return rankdice_ba(probs).mask;
    case Rule::rankdice_rma: return rankdice_rma(probs).mask;
    case Rule::rankiou_exact: return rankiou_exact(probs, exact).mask;
    case Rule::rankiou_rma: return rankiou_rma(probs).mask;
  }
  throw Error(ErrorCode::invalid_argument, "unhandled rule");
}

LabelMap predict_multiclass(const MulticlassProbMap& probs, const RunConfig& config) {
  switch (config.rule) {
    case Rule::argmax: return argmax_prob(probs);
    case Rule::rankdice_rma: return rankseg_rma_multiclass(probs, Metric::dice, config.score);
    case Rule::rankiou_rma: return rankseg_rma_multiclass(probs, Metric::iou, config.score);
    default:
      throw Error(ErrorCode::invalid_argument,
                  std::string("rule ") + to_string(config.rule) +
                      " is binary only; multiclass maps take argmax, rankdice-rma or rankiou-rma");
  }
}

int cmd_predict(const PredictArgs& args, const RunConfig& config, std::ostream& err) {
  std::vector<fs::path> inputs;
  try {
    validate(config);
    inputs = expand(args.inputs);
    fs::create_directories(args.out_dir);
  } catch (const std::exception& e) {
    err << "rankseg predict: " << e.what() << "\n";
    return 1;
  }

  std::set<fs::path> names;
  for (const auto& in : inputs) {
    if (!names.insert(in.filename()).second) {
      err << "rankseg predict: two inputs share the basename " << in.filename() << "\n";
      return 1;
    }
  }

  std::vector<FileResult> results(inputs.size());
  const long long n = static_cast<long long>(inputs.size());
#pragma omp parallel for schedule(dynamic, 1) if (inputs.size() > 1)
  for (long long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    results[k] = process(inputs[k], args.out_dir, args.mode, config);
  }

  int status = 0;
  Json files = Json::array();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Json entry;
    entry["input"] = inputs[i].string();
    if (results[i].ok) {
      entry["output"] = results[i].output.string();
      entry["mode"] = results[i].mode;
    } else {
      err << "rankseg predict: " << results[i].message << "\n";
      entry["error"] = results[i].message;
      status = 1;
    }
    files.push_back(entry);
  }
  Json timings = Json::array();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Json t;
    t["input"] = inputs[i].filename().string();
    t["seconds"] = number(results[i].seconds);
    timings.push_back(t);
  }

  Json manifest;
  manifest["config"] = config_json(config);
  manifest["files"] = files;
  manifest["timings"] = timings;
  try {
    emit_json(manifest, args.out_dir / "manifest.json", err);
  } catch (const std::exception& e) {
    err << "rankseg predict: " << e.what() << "\n";
    return 1;
  }
  return status;
}

}  // namespace rankseg::cli
