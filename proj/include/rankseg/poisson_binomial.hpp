#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rankseg {

/// Distribution of a sum of independent Bernoulli variables, stored as its
/// PMF over {0, ..., size}. Entries are nonnegative and sum to one.
class PBDistribution {
 public:
  /// Takes ownership of an already-normalized PMF; the mean is recomputed.
  static PBDistribution from_pmf(std::vector<double> pmf);
  /// As from_pmf, trusting a mean computed elsewhere (e.g. sum of p_j).
  static PBDistribution with_mean(std::vector<double> pmf, double mean);

  std::span<const double> pmf() const noexcept { return pmf_; }
  double mean() const noexcept { return mean_; }
  /// Number of Bernoulli components m (support is {0..m}).
  std::size_t size() const noexcept { return pmf_.size() - 1; }
  double operator[](std::size_t l) const noexcept { return pmf_[l]; }

 private:
  PBDistribution(std::vector<double> pmf, double mean) : pmf_(std::move(pmf)), mean_(mean) {}

  std::vector<double> pmf_;
  double mean_;
};

/// Exact PMF by sequential Bernoulli convolution, O(m^2).
PBDistribution pb_pmf_dp(std::span<const double> probs);

/// PMF by the characteristic-function method: the CF is evaluated at N >= m+1
/// roots of unity (products tracked with a separate binary exponent so they
/// never underflow), then inverted with one FFT. O(N m) for the products.
PBDistribution pb_pmf_dft(std::span<const double> probs);

/// PMF as a balanced product tree of the factors (1 - p + p t), multiplied
/// with FFT convolution at the upper levels. O(m log^2 m); used where m is
/// too large for the quadratic routes.
PBDistribution pb_pmf_tree(std::span<const double> probs);

/// sum_j p_j with Neumaier compensation.
double pb_mean(std::span<const double> probs) noexcept;

/// PMF of the sum with one component of probability `p` removed. Throws
/// Error(unstable) when the deconvolution goes negative beyond 1e-8.
PBDistribution pb_leave_one_out(const PBDistribution& dist, double p);

/// PMF of the sum with one more Bernoulli(p) component.
PBDistribution pb_add_component(const PBDistribution& dist, double p);

/// E[1 / (X + a)] computed exactly from the PMF; requires a > 0.
double reciprocal_moment(const PBDistribution& dist, double a);

struct ReciprocalBounds {
  double lower;
  double upper;  // +infinity when the denominator is not positive
};

/// Two-sided bounds on E[(X + tau)^{-1}] for a sum of m Bernoullis with mean mu:
/// (mu + tau)^{-1} <= E <= ((m+1)/m mu + tau - 1)^{-1}.
ReciprocalBounds reciprocal_moment_bounds(double mu, std::size_t m, std::size_t tau);

/// E[1 / (X + a)] as int_0^1 t^{a-1} prod_j (1 - p_j + p_j t) dt, evaluated by
/// adaptive Gauss-Kronrod quadrature. Requires a >= 1.
double pgf_integral_check(std::span<const double> probs, double a);

/// Total-variation distance between two PMFs (missing tail entries count as 0).
double total_variation(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace rankseg
