#include "rankseg/probmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rankseg/error.hpp"
#include "rankseg/npy.hpp"

namespace rankseg {
namespace {

std::string shape_string(std::span<const std::size_t> dims) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < dims.size(); ++i) out << (i ? ", " : "") << dims[i];
  out << ')';
  return out.str();
}

void clamp_probabilities(std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!(v >= -kRangeSlack && v <= 1.0 + kRangeSlack)) {
      std::ostringstream msg;
      msg << "probability out of range at flat index " << i << ": " << v;
      throw Error(ErrorCode::out_of_range, msg.str());
    }
    values[i] = std::clamp(v, 0.0, 1.0);
  }
}

}  // namespace

std::size_t shape_size(std::span<const std::size_t> dims) noexcept {
  std::size_t n = 1;
  for (auto extent : dims) n *= extent;
  return n;
}

BinaryProbMap::BinaryProbMap(std::vector<double> probs)
    : BinaryProbMap(std::move(probs), Shape{}) {}

BinaryProbMap::BinaryProbMap(std::vector<double> probs, Shape dims)
    : probs_(std::move(probs)), dims_(std::move(dims)) {
  if (dims_.empty()) dims_ = {probs_.size()};
  if (probs_.empty()) throw Error(ErrorCode::shape_mismatch, "probability map is empty");
  if (shape_size(dims_) != probs_.size()) {
    throw Error(ErrorCode::shape_mismatch, "shape " + shape_string(dims_) +
                                               " does not match " +
                                               std::to_string(probs_.size()) + " values");
  }
  clamp_probabilities(probs_);
}

MulticlassProbMap::MulticlassProbMap(std::vector<double> probs, std::size_t classes, Shape dims,
                                     bool normalized)
    : probs_(std::move(probs)),
      classes_(classes),
      pixels_(0),
      dims_(std::move(dims)),
      normalized_(normalized) {
  if (classes_ == 0) throw Error(ErrorCode::shape_mismatch, "class count must be positive");
  if (dims_.empty()) dims_ = {probs_.size() / classes_};
  pixels_ = shape_size(dims_);
  if (pixels_ == 0) throw Error(ErrorCode::shape_mismatch, "probability map is empty");
  if (pixels_ * classes_ != probs_.size()) {
    throw Error(ErrorCode::shape_mismatch,
                std::to_string(classes_) + " x " + shape_string(dims_) + " does not match " +
                    std::to_string(probs_.size()) + " values");
  }
  clamp_probabilities(probs_);
  if (normalized_) {
    for (std::size_t j = 0; j < pixels_; ++j) {
      double sum = 0.0;
      for (std::size_t c = 0; c < classes_; ++c) sum += probs_[c * pixels_ + j];
      if (std::abs(sum - 1.0) > kSimplexTolerance) {
        std::ostringstream msg;
        msg << "simplex violation at pixel " << j << ": channels sum to " << sum;
        throw Error(ErrorCode::simplex, msg.str());
      }
    }
  }
}

LabelMap::LabelMap(std::vector<std::uint32_t> labels, std::size_t classes, Shape dims)
    : labels_(std::move(labels)), classes_(classes), dims_(std::move(dims)) {
  if (dims_.empty()) dims_ = {labels_.size()};
  if (shape_size(dims_) != labels_.size()) {
    throw Error(ErrorCode::shape_mismatch, "label shape " + shape_string(dims_) +
                                               " does not match " +
                                               std::to_string(labels_.size()) + " labels");
  }
  for (auto label : labels_) {
    if (label >= classes_) {
      throw Error(ErrorCode::out_of_range, "label " + std::to_string(label) +
                                               " is not below class count " +
                                               std::to_string(classes_));
    }
  }
}

BinaryMask::BinaryMask(std::vector<std::uint8_t> bits) : BinaryMask(std::move(bits), Shape{}) {}

BinaryMask::BinaryMask(std::vector<std::uint8_t> bits, Shape dims)
    : bits_(std::move(bits)), dims_(std::move(dims)) {
  if (dims_.empty()) dims_ = {bits_.size()};
  if (shape_size(dims_) != bits_.size()) {
    throw Error(ErrorCode::shape_mismatch, "mask shape " + shape_string(dims_) +
                                               " does not match " +
                                               std::to_string(bits_.size()) + " bits");
  }
  for (auto b : bits_) {
    if (b > 1) throw Error(ErrorCode::out_of_range, "mask values must be 0 or 1");
  }
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

LabelMap BinaryMask::to_labels() const {
  return LabelMap(std::vector<std::uint32_t>(bits_.begin(), bits_.end()), 2, dims_);
}

BinaryProbMap load_binary_probmap(const std::filesystem::path& path) {
  auto array = npy::read(path);
  if (array.header.shape.empty()) {
    throw Error(ErrorCode::shape_mismatch, path.string() + ": scalar arrays are not maps");
  }
  try {
    return BinaryProbMap(npy::to_doubles(array), array.header.shape);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

MulticlassProbMap load_multiclass_probmap(const std::filesystem::path& path,
                                          const LoadOptions& options) {
  auto array = npy::read(path);
  const auto& shape = array.header.shape;
  if (shape.size() < 2) {
    throw Error(ErrorCode::shape_mismatch,
                path.string() + ": multiclass maps need a leading class axis, got shape " +
                    shape_string(shape));
  }
  if (shape[0] < 2) {
    throw Error(ErrorCode::shape_mismatch, path.string() + ": multiclass maps need C >= 2");
  }
  try {
    return MulticlassProbMap(npy::to_doubles(array), shape[0], Shape(shape.begin() + 1, shape.end()),
                             options.normalized);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

ProbMap load_probmap(const std::filesystem::path& path, Expect expect, const LoadOptions& options) {
  if (expect == Expect::binary) return load_binary_probmap(path);
  return load_multiclass_probmap(path, options);
}

void save_labelmap(const LabelMap& map, const std::filesystem::path& path) {
  if (map.classes() > 65536) {
    throw Error(ErrorCode::invalid_argument,
                "cannot store " + std::to_string(map.classes()) + " classes in uint16");
  }
  if (map.classes() <= 256) {
    std::vector<std::uint8_t> out(map.labels().begin(), map.labels().end());
    npy::write(path, npy::DType::u1, map.dims(), std::as_bytes(std::span(out)));
  } else {
    std::vector<std::uint16_t> out(map.labels().begin(), map.labels().end());
    npy::write(path, npy::DType::u2, map.dims(), std::as_bytes(std::span(out)));
  }
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  npy::write(path, npy::DType::u1, mask.dims(), std::as_bytes(mask.bits()));
}

LabelMap load_labelmap(const std::filesystem::path& path, std::size_t classes) {
  auto array = npy::read(path);
  std::vector<std::int64_t> raw;
  try {
    raw = npy::to_integers(array);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
  std::vector<std::uint32_t> labels(raw.size());
  std::int64_t max_label = -1;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] < 0 || raw[i] > std::numeric_limits<std::uint32_t>::max()) {
      throw Error(ErrorCode::out_of_range, path.string() + ": negative or oversized label");
    }
    labels[i] = static_cast<std::uint32_t>(raw[i]);
    max_label = std::max(max_label, raw[i]);
  }
  if (classes == 0) classes = static_cast<std::size_t>(max_label + 1);
  try {
    return LabelMap(std::move(labels), std::max<std::size_t>(classes, 1), array.header.shape);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

BinaryMask load_mask(const std::filesystem::path& path) {
  auto labels = load_labelmap(path, 2);
  return BinaryMask(std::vector<std::uint8_t>(labels.labels().begin(), labels.labels().end()),
                    labels.dims());
}

Diagnostics validate(std::span<const double> values, std::size_t classes) {
  Diagnostics report;
  report.min = std::numeric_limits<double>::infinity();
  report.max = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (std::isnan(v)) {
      ++report.nan_count;
      continue;
    }
    report.min = std::min(report.min, v);
    report.max = std::max(report.max, v);
  }
  report.sum_min = std::numeric_limits<double>::infinity();
  report.sum_max = -std::numeric_limits<double>::infinity();
  if (classes == 0) classes = 1;
  const std::size_t pixels = values.size() / classes;
  for (std::size_t j = 0; j < pixels; ++j) {
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      const double v = values[c * pixels + j];
      if (!std::isnan(v)) sum += v;
    }
    report.sum_min = std::min(report.sum_min, sum);
    report.sum_max = std::max(report.sum_max, sum);
  }
  if (values.empty()) report = Diagnostics{};
  return report;
}

Diagnostics validate(const BinaryProbMap& map) { return validate(map.probs(), 1); }

Diagnostics validate(const MulticlassProbMap& map) {
  return validate(map.data(), map.classes());
}

}  // namespace rankseg
