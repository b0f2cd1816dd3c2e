#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace rankseg::fft {

using Complex = std::complex<double>;

/// In-place radix-2 transform, forward kernel e^{-2 pi i k n / N}. The
/// inverse applies e^{+2 pi i k n / N} and the 1/N scale. N must be a power
/// of two. Large transforms split each butterfly stage across OpenMP threads.
void transform(std::span<Complex> data, bool inverse = false);

/// Linear convolution, (a * b)[k] = sum_i a[i] b[k - i]; size |a| + |b| - 1.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

/// out[t] = sum_l a[l] b[t + l] for t in [0, count); requires
/// |b| >= count + |a| - 1. One FFT convolution of reversed `a` against `b`.
std::vector<double> cross_correlate(std::span<const double> a, std::span<const double> b,
                                    std::size_t count);

}  // namespace rankseg::fft
