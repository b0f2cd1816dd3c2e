#include "rankseg/fft.hpp"

#include <algorithm>
#include <bit>
#include <numbers>

#include "rankseg/error.hpp"

namespace rankseg::fft {
namespace {

constexpr std::size_t kParallelMin = std::size_t{1} << 14;
constexpr std::size_t kDirectWork = 1 << 14;

void bit_reverse(std::span<Complex> data) {
  const std::size_t n = data.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
}

std::vector<double> direct_convolve(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) out[i + k] += a[i] * b[k];
  }
  return out;
}

}  // namespace

void transform(std::span<Complex> data, bool inverse) {
  const std::size_t n = data.size();
  if (n <= 1) return;
  if (!std::has_single_bit(n)) {
    throw Error(ErrorCode::invalid_argument, "FFT length must be a power of two");
  }
  bit_reverse(data);

  // roots[k] = exp(sign * 2 pi i k / n) for k < n/2, each evaluated directly
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Complex> roots(n / 2);
  const long long half_n = static_cast<long long>(n / 2);
#pragma omp parallel for if (n >= kParallelMin) schedule(static)
  for (long long k = 0; k < half_n; ++k) {
    roots[static_cast<std::size_t>(k)] =
        std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                            static_cast<double>(n));
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
#pragma omp parallel for if (n >= kParallelMin) schedule(static)
    for (long long idx = 0; idx < half_n; ++idx) {
      const std::size_t u = static_cast<std::size_t>(idx);
      const std::size_t block = u / half;
      const std::size_t j = u % half;
      const std::size_t i = block * len + j;
      const Complex w = roots[j * stride];
      const Complex t = w * data[i + half];
      data[i + half] = data[i] - t;
      data[i] += t;
    }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : data) v *= scale;
  }
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  if (a.size() * b.size() <= kDirectWork || std::min(a.size(), b.size()) <= 8) {
    return direct_convolve(a, b);
  }
  const std::size_t out_size = a.size() + b.size() - 1;
  const std::size_t n = std::bit_ceil(out_size);

  // Pack both real inputs into one complex signal: z = a + i b.
  std::vector<Complex> z(n, Complex{});
  for (std::size_t i = 0; i < a.size(); ++i) z[i].real(a[i]);
  for (std::size_t i = 0; i < b.size(); ++i) z[i].imag(b[i]);
  transform(z, false);

  // A_k = (Z_k + conj Z_{-k}) / 2, B_k = (Z_k - conj Z_{-k}) / 2i,
  // so A_k B_k = (Z_k^2 - conj(Z_{-k})^2) / 4i.
  std::vector<Complex> prod(n);
  const long long nn = static_cast<long long>(n);
#pragma omp parallel for if (n >= kParallelMin) schedule(static)
  for (long long kk = 0; kk < nn; ++kk) {
    const std::size_t k = static_cast<std::size_t>(kk);
    const Complex zk = z[k];
    const Complex zm = std::conj(z[(n - k) & (n - 1)]);
    prod[k] = (zk * zk - zm * zm) * Complex(0.0, -0.25);
  }
  transform(prod, true);

  std::vector<double> out(out_size);
  for (std::size_t i = 0; i < out_size; ++i) out[i] = prod[i].real();
  return out;
}

std::vector<double> cross_correlate(std::span<const double> a, std::span<const double> b,
                                    std::size_t count) {
  if (count == 0) return {};
  if (a.empty()) return std::vector<double>(count, 0.0);
  if (b.size() + 1 < count + a.size()) {
    throw Error(ErrorCode::invalid_argument, "cross_correlate: second sequence too short");
  }
  std::vector<double> reversed(a.rbegin(), a.rend());
  // Only b[0 .. count + |a| - 2] can contribute.
  auto head = b.first(count + a.size() - 1);
  const auto full = convolve(reversed, head);
  return std::vector<double>(full.begin() + static_cast<std::ptrdiff_t>(a.size() - 1),
                             full.begin() + static_cast<std::ptrdiff_t>(a.size() - 1 + count));
}

}  // namespace rankseg::fft
