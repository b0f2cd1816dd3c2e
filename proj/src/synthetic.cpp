#include "rankseg/synthetic.hpp"

#include <algorithm>
#include <cmath>

namespace rankseg::synthetic {
namespace {

// One pass of a separable running-mean blur over a w x h grid (clamped edges).
void box_blur(std::vector<double>& grid, std::size_t w, std::size_t h, std::size_t radius) {
  std::vector<double> tmp(grid.size());
  auto blur_line = [&](auto get, auto put, std::size_t n) {
    double sum = 0.0;
    const auto r = static_cast<long long>(radius);
    const auto len = static_cast<long long>(n);
    auto at = [&](long long i) { return get(static_cast<std::size_t>(std::clamp(i, 0LL, len - 1))); };
    for (long long i = -r; i <= r; ++i) sum += at(i);
    for (long long i = 0; i < len; ++i) {
      put(static_cast<std::size_t>(i), sum / static_cast<double>(2 * r + 1));
      sum += at(i + r + 1) - at(i - r);
    }
  };
  for (std::size_t y = 0; y < h; ++y) {
    blur_line([&](std::size_t x) { return grid[y * w + x]; },
              [&](std::size_t x, double v) { tmp[y * w + x] = v; }, w);
  }
  for (std::size_t x = 0; x < w; ++x) {
    blur_line([&](std::size_t y) { return tmp[y * w + x]; },
              [&](std::size_t y, double v) { grid[y * w + x] = v; }, h);
  }
}

}  // namespace

std::vector<double> probabilities(std::size_t d, Kind kind, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out(d);
  if (kind == Kind::uniform) {
    for (auto& v : out) v = lo + (hi - lo) * unit(rng);
    return out;
  }

  const auto w = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  const std::size_t h = (d + w - 1) / w;
  std::vector<double> grid(w * h);
  for (auto& v : grid) v = unit(rng);
  const std::size_t radius = std::max<std::size_t>(1, w / 32);
  for (int pass = 0; pass < 3; ++pass) box_blur(grid, w, h, radius);

  double mean = 0.0;
  for (double v : grid) mean += v;
  mean /= static_cast<double>(grid.size());
  double var = 0.0;
  for (double v : grid) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(grid.size()));
  for (std::size_t j = 0; j < d; ++j) {
    const double z = sd > 0.0 ? (grid[j] - mean) / sd : 0.0;
    const double p = 1.0 / (1.0 + std::exp(-4.0 * (z - 1.0)));
    out[j] = lo + (hi - lo) * p;
  }
  return out;
}

BinaryMask sample_mask(std::span<const double> probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::uint8_t> bits(probs.size());
  for (std::size_t j = 0; j < probs.size(); ++j) bits[j] = unit(rng) < probs[j] ? 1 : 0;
  return BinaryMask(std::move(bits));
}

}  // namespace rankseg::synthetic
