#include "rankseg/poisson_binomial.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "rankseg/error.hpp"
#include "rankseg/fft.hpp"

namespace rankseg {
namespace {

constexpr double kNegativeTolerance = 1e-8;
constexpr std::size_t kTreeLeaf = 64;

// Neumaier-compensated sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

double pmf_mean(std::span<const double> pmf) noexcept {
  CompensatedSum acc;
  for (std::size_t l = 1; l < pmf.size(); ++l) acc.add(static_cast<double>(l) * pmf[l]);
  return acc.value();
}

// Zeroes negative rounding noise and rescales to unit mass. Large negative
// mass means the route that produced `pmf` broke down.
void clip_and_normalize(std::vector<double>& pmf, const char* route) {
  double clipped = 0.0;
  for (auto& v : pmf) {
    if (v < 0.0) {
      clipped -= v;
      v = 0.0;
    }
  }
  if (clipped >= kNegativeTolerance) {
    throw Error(ErrorCode::unstable, std::string(route) + ": clipped negative mass " +
                                         std::to_string(clipped) + " exceeds 1e-8");
  }
  CompensatedSum total;
  for (double v : pmf) total.add(v);
  const double scale = total.value();
  if (scale > 0.0 && scale != 1.0) {
    for (auto& v : pmf) v /= scale;
  }
}

void convolve_bernoulli_in_place(std::vector<double>& pmf, double p) {
  const double q = 1.0 - p;
  pmf.push_back(0.0);
  for (std::size_t l = pmf.size() - 1; l > 0; --l) pmf[l] = pmf[l] * q + pmf[l - 1] * p;
  pmf[0] *= q;
}

std::vector<double> dp_pmf(std::span<const double> probs) {
  std::vector<double> pmf;
  pmf.reserve(probs.size() + 1);
  pmf.push_back(1.0);
  for (double p : probs) convolve_bernoulli_in_place(pmf, p);
  return pmf;
}

}  // namespace

PBDistribution PBDistribution::from_pmf(std::vector<double> pmf) {
  if (pmf.empty()) throw Error(ErrorCode::invalid_argument, "PMF must have at least one entry");
  const double mean = pmf_mean(pmf);
  return PBDistribution(std::move(pmf), mean);
}

PBDistribution PBDistribution::with_mean(std::vector<double> pmf, double mean) {
  if (pmf.empty()) throw Error(ErrorCode::invalid_argument, "PMF must have at least one entry");
  return PBDistribution(std::move(pmf), mean);
}

double pb_mean(std::span<const double> probs) noexcept {
  CompensatedSum acc;
  for (double p : probs) acc.add(p);
  return acc.value();
}

PBDistribution pb_pmf_dp(std::span<const double> probs) {
  return PBDistribution::with_mean(dp_pmf(probs), pb_mean(probs));
}

PBDistribution pb_pmf_dft(std::span<const double> probs) {
  const std::size_t m = probs.size();
  if (m == 0) return PBDistribution::with_mean({1.0}, 0.0);
  const std::size_t n = std::bit_ceil(m + 1);
  std::vector<fft::Complex> cf(n);

  // phi(k) = prod_j (1 - p_j + p_j e^{2 pi i k / n}); only k <= n/2 is
  // evaluated, the rest follow from conjugate symmetry.
  const long long half = static_cast<long long>(n / 2);
#pragma omp parallel for schedule(dynamic, 16)
  for (long long kk = 0; kk <= half; ++kk) {
    const std::size_t k = static_cast<std::size_t>(kk);
    const fft::Complex w =
        std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    fft::Complex z(1.0, 0.0);
    long exponent = 0;
    auto renormalize = [&] {
      const double mag = std::max(std::abs(z.real()), std::abs(z.imag()));
      if (mag == 0.0) return;
      int e = 0;
      std::frexp(mag, &e);
      z = fft::Complex(std::ldexp(z.real(), -e), std::ldexp(z.imag(), -e));
      exponent += e;
    };
    for (std::size_t j = 0; j < m; ++j) {
      const double p = probs[j];
      z *= fft::Complex(1.0 - p + p * w.real(), p * w.imag());
      if ((j & 31) == 31) renormalize();
    }
    renormalize();
    const int e = static_cast<int>(std::max<long>(exponent, std::numeric_limits<int>::min() / 2));
    cf[k] = fft::Complex(std::ldexp(z.real(), e), std::ldexp(z.imag(), e));
  }
  for (std::size_t k = 1; k < n / 2; ++k) cf[n - k] = std::conj(cf[k]);

  // P(l) = n^{-1} sum_k e^{-2 pi i k l / n} phi(k), a forward transform.
  fft::transform(cf, false);
  std::vector<double> pmf(m + 1);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t l = 0; l <= m; ++l) pmf[l] = cf[l].real() * scale;
  clip_and_normalize(pmf, "pb_pmf_dft");
  return PBDistribution::with_mean(std::move(pmf), pb_mean(probs));
}

PBDistribution pb_pmf_tree(std::span<const double> probs) {
  const std::size_t m = probs.size();
  if (m <= kTreeLeaf) return pb_pmf_dp(probs);

  std::vector<std::vector<double>> level((m + kTreeLeaf - 1) / kTreeLeaf);
  const long long leaves = static_cast<long long>(level.size());
#pragma omp parallel for schedule(static)
  for (long long b = 0; b < leaves; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kTreeLeaf;
    level[static_cast<std::size_t>(b)] =
        dp_pmf(probs.subspan(begin, std::min(kTreeLeaf, m - begin)));
  }
  while (level.size() > 1) {
    std::vector<std::vector<double>> next((level.size() + 1) / 2);
    const long long pairs = static_cast<long long>(next.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < pairs; ++i) {
      const std::size_t a = 2 * static_cast<std::size_t>(i);
      if (a + 1 < level.size()) {
        next[static_cast<std::size_t>(i)] = fft::convolve(level[a], level[a + 1]);
      } else {
        next[static_cast<std::size_t>(i)] = std::move(level[a]);
      }
    }
    level = std::move(next);
  }
  auto pmf = std::move(level.front());
  clip_and_normalize(pmf, "pb_pmf_tree");
  return PBDistribution::with_mean(std::move(pmf), pb_mean(probs));
}

PBDistribution pb_leave_one_out(const PBDistribution& dist, double p) {
  const std::size_t m = dist.size();
  if (m == 0) throw Error(ErrorCode::invalid_argument, "cannot remove a component from m = 0");
  const auto full = dist.pmf();
  std::vector<double> out(m);
  if (p <= 0.0) {
    std::copy(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(m), out.begin());
  } else if (p >= 1.0) {
    std::copy(full.begin() + 1, full.end(), out.begin());
  } else if (p <= 0.5) {
    // P(l) = (1-p) Q(l) + p Q(l-1), solved upward
    const double q = 1.0 - p;
    out[0] = full[0] / q;
    for (std::size_t l = 1; l < m; ++l) out[l] = (full[l] - p * out[l - 1]) / q;
  } else {
    // same identity solved downward from the top of the support
    const double q = 1.0 - p;
    out[m - 1] = full[m] / p;
    for (std::size_t l = m - 1; l > 0; --l) out[l - 1] = (full[l] - q * out[l]) / p;
  }
  const double lowest = *std::min_element(out.begin(), out.end());
  if (lowest < -kNegativeTolerance) {
    throw Error(ErrorCode::unstable, "leave-one-out deconvolution went negative (" +
                                         std::to_string(lowest) + ")");
  }
  for (auto& v : out) v = std::max(v, 0.0);
  CompensatedSum total;
  for (double v : out) total.add(v);
  if (total.value() > 0.0) {
    for (auto& v : out) v /= total.value();
  }
  return PBDistribution::with_mean(std::move(out), std::max(dist.mean() - p, 0.0));
}

PBDistribution pb_add_component(const PBDistribution& dist, double p) {
  std::vector<double> pmf(dist.pmf().begin(), dist.pmf().end());
  convolve_bernoulli_in_place(pmf, p);
  return PBDistribution::with_mean(std::move(pmf), dist.mean() + p);
}

double reciprocal_moment(const PBDistribution& dist, double a) {
  if (!(a > 0.0)) throw Error(ErrorCode::invalid_argument, "reciprocal moment needs a > 0");
  const auto pmf = dist.pmf();
  CompensatedSum acc;
  for (std::size_t l = 0; l < pmf.size(); ++l) acc.add(pmf[l] / (static_cast<double>(l) + a));
  return acc.value();
}

ReciprocalBounds reciprocal_moment_bounds(double mu, std::size_t m, std::size_t tau) {
  if (tau < 1 || m < 1) {
    throw Error(ErrorCode::invalid_argument, "bounds need tau >= 1 and m >= 1");
  }
  const double t = static_cast<double>(tau);
  const double md = static_cast<double>(m);
  ReciprocalBounds bounds{1.0 / (mu + t), std::numeric_limits<double>::infinity()};
  const double denom = (md + 1.0) / md * mu + t - 1.0;
  if (denom > 0.0) bounds.upper = 1.0 / denom;
  return bounds;
}

double pgf_integral_check(std::span<const double> probs, double a) {
  if (!(a >= 1.0)) throw Error(ErrorCode::invalid_argument, "pgf integral needs a >= 1");
  auto integrand = [&](double t) {
    double g = 1.0;
    for (double p : probs) g *= 1.0 - p + p * t;
    return g * std::pow(t, a - 1.0);
  };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, 1.0, 15, 1e-13, &error);
  return value;
}

double total_variation(std::span<const double> a, std::span<const double> b) noexcept {
  const std::size_t n = std::max(a.size(), b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    sum += std::abs(x - y);
  }
  return 0.5 * sum;
}

}  // namespace rankseg
