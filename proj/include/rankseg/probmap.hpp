#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

namespace rankseg {

using Shape = std::vector<std::size_t>;

/// Values this far outside [0,1] are clamped; anything further is rejected.
inline constexpr double kRangeSlack = 1e-9;
/// Tolerance on |sum_c p_{c,j} - 1| when a map declares itself normalized.
inline constexpr double kSimplexTolerance = 1e-5;

std::size_t shape_size(std::span<const std::size_t> dims) noexcept;

/// Foreground probabilities of a single image, flattened row-major.
class BinaryProbMap {
 public:
  explicit BinaryProbMap(std::vector<double> probs);
  BinaryProbMap(std::vector<double> probs, Shape dims);

  std::span<const double> probs() const noexcept { return probs_; }
  const Shape& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t j) const noexcept { return probs_[j]; }

 private:
  std::vector<double> probs_;
  Shape dims_;
};

/// C x d class probabilities; row c holds channel c of every pixel.
class MulticlassProbMap {
 public:
  MulticlassProbMap(std::vector<double> probs, std::size_t classes, Shape dims,
                    bool normalized = false);

  std::size_t classes() const noexcept { return classes_; }
  std::size_t pixels() const noexcept { return pixels_; }
  const Shape& dims() const noexcept { return dims_; }
  bool normalized() const noexcept { return normalized_; }

  std::span<const double> row(std::size_t c) const noexcept {
    return std::span<const double>(probs_).subspan(c * pixels_, pixels_);
  }
  double at(std::size_t c, std::size_t j) const noexcept { return probs_[c * pixels_ + j]; }
  std::span<const double> data() const noexcept { return probs_; }

 private:
  std::vector<double> probs_;
  std::size_t classes_;
  std::size_t pixels_;
  Shape dims_;
  bool normalized_;
};

using ProbMap = std::variant<BinaryProbMap, MulticlassProbMap>;

class LabelMap {
 public:
  LabelMap(std::vector<std::uint32_t> labels, std::size_t classes, Shape dims);

  std::span<const std::uint32_t> labels() const noexcept { return labels_; }
  std::size_t classes() const noexcept { return classes_; }
  const Shape& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::uint32_t operator[](std::size_t j) const noexcept { return labels_[j]; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::vector<std::uint32_t> labels_;
  std::size_t classes_;
  Shape dims_;
};

class BinaryMask {
 public:
  explicit BinaryMask(std::vector<std::uint8_t> bits);
  BinaryMask(std::vector<std::uint8_t> bits, Shape dims);

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  const Shape& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return bits_.size(); }
  std::size_t count() const noexcept;
  bool operator[](std::size_t j) const noexcept { return bits_[j] != 0; }

  /// Two-class label map (0 background, 1 foreground).
  LabelMap to_labels() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::vector<std::uint8_t> bits_;
  Shape dims_;
};

enum class Expect { binary, multiclass };

struct LoadOptions {
  /// Request the per-pixel simplex check for multiclass maps.
  bool normalized = false;
};

/// Binary maps accept any rank >= 1 as spatial dimensions. Multiclass maps
/// take the leading axis as the class axis: (C,d), (C,H,W), ...
ProbMap load_probmap(const std::filesystem::path& path, Expect expect,
                     const LoadOptions& options = {});
BinaryProbMap load_binary_probmap(const std::filesystem::path& path);
MulticlassProbMap load_multiclass_probmap(const std::filesystem::path& path,
                                          const LoadOptions& options = {});

/// Writes uint8 when classes <= 256, uint16 when <= 65536, with the map's shape.
void save_labelmap(const LabelMap& map, const std::filesystem::path& path);
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

/// Reads an integer NPY label file. `classes` of 0 infers max label + 1.
LabelMap load_labelmap(const std::filesystem::path& path, std::size_t classes = 0);
BinaryMask load_mask(const std::filesystem::path& path);

struct Diagnostics {
  double min = 0.0;
  double max = 0.0;
  /// Range of per-pixel channel sums; for binary maps, the range of p_j.
  double sum_min = 0.0;
  double sum_max = 0.0;
  std::size_t nan_count = 0;
};

/// Report over raw values laid out as `classes` rows of equal length; NaN
/// entries are counted and skipped.
Diagnostics validate(std::span<const double> values, std::size_t classes = 1);
Diagnostics validate(const BinaryProbMap& map);
Diagnostics validate(const MulticlassProbMap& map);

}  // namespace rankseg
