#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "rankseg/cli.hpp"
#include "rankseg/oracle.hpp"
#include "rankseg/poisson_binomial.hpp"

namespace rankseg::cli {
namespace {

constexpr double kValueTolerance = 1e-9;
constexpr double kBoundSlack = 1e-12;

std::vector<double> draw_instance(std::mt19937_64& rng, std::size_t d) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> p(d);
  for (auto& v : p) {
    const double kind = unit(rng);
    if (kind < 0.08) {
      v = 0.0;
    } else if (kind < 0.12) {
      v = 1.0;
    } else {
      v = unit(rng);
    }
  }
  return p;
}

class Checker {
 public:
  Checker(std::ostream& out, std::size_t instance, const std::vector<double>& p)
      : out_(out), instance_(instance), p_(p) {}

  void expect(bool ok, const char* check, const std::string& detail = {}) {
    if (ok) return;
    ++failures_;
    Json j;
    j["instance"] = instance_;
    j["check"] = check;
    if (!detail.empty()) j["detail"] = detail;
    j["p"] = p_;  // full precision so the instance can be replayed
    out_ << "FAIL " << j.dump() << "\n";
  }

  std::size_t failures() const noexcept { return failures_; }

 private:
  std::ostream& out_;
  std::size_t instance_;
  const std::vector<double>& p_;
  std::size_t failures_ = 0;
};

void check_metric(Checker& check, const BinaryProbMap& probs, Metric metric, bool inject_fault) {
  const bool dice = metric == Metric::dice;
  check.expect(oracle::verify_ranking_property(probs, metric),
               dice ? "ranking-property-dice" : "ranking-property-iou");

  const auto optimum = oracle::bayes_optimal_mask(probs, metric);
  const auto exact = dice ? rankdice_exact(probs) : rankiou_exact(probs);
  auto mask = exact.mask;
  if (inject_fault) {
    std::vector<std::uint8_t> flipped(mask.bits().begin(), mask.bits().end());
    for (auto& b : flipped) b ^= 1U;
    mask = BinaryMask(std::move(flipped), mask.dims());
  }
  check.expect(mask == optimum.mask, dice ? "exact-agreement-dice" : "exact-agreement-iou");
  const double value = exact.curve.best_value();
  check.expect(std::abs(value - optimum.value) <= kValueTolerance,
               dice ? "exact-value-dice" : "exact-value-iou",
               "rule " + std::to_string(value) + " vs oracle " + std::to_string(optimum.value));
}

void check_bounds(Checker& check, const BinaryProbMap& probs) {
  const auto p = probs.probs();
  const auto dist = pb_pmf_dp(p);
  const double mu = pb_mean(p);
  for (std::size_t tau = 1; tau <= 5; ++tau) {
    const double e = reciprocal_moment(dist, static_cast<double>(tau));
    const auto b = reciprocal_moment_bounds(mu, p.size(), tau);
    check.expect(b.lower <= e + kBoundSlack && e <= b.upper + kBoundSlack, "reciprocal-sandwich",
                 "tau " + std::to_string(tau));
  }

  if (!(mu > 0.0)) return;
  const auto exact = rankdice_exact(probs).curve;
  const auto rma = rankdice_rma(probs).curve;
  const std::size_t d = p.size();
  for (std::size_t tau = 1; tau <= d; ++tau) {
    const double gap = std::abs(rma.values[tau] - exact.values[tau]);
    check.expect(gap <= 2.0 / (mu + static_cast<double>(tau)) + kBoundSlack, "rma-error-bound",
                 "tau " + std::to_string(tau));
  }
  std::size_t tau_star = 1;
  for (std::size_t tau = 2; tau <= d; ++tau) {
    if (exact.values[tau] > exact.values[tau_star]) tau_star = tau;
  }
  const std::size_t tau_hat = std::max<std::size_t>(rma.tau_star, 1);
  const double slack = 2.0 / (mu + static_cast<double>(tau_hat)) +
                       2.0 / (mu + static_cast<double>(tau_star));
  check.expect(exact.values[tau_hat] >= exact.values[tau_star] - slack - kBoundSlack,
               "rma-suboptimality");
}

}  // namespace

int cmd_oracle_check(const OracleArgs& args, const RunConfig& config, std::ostream& out,
                     std::ostream& err) {
  if (args.d_min == 0 || args.d_min > args.d_max) {
    err << "rankseg oracle-check: need 1 <= d-min <= d-max\n";
    return 1;
  }
  if (args.d_max > oracle::kSearchCap) {
    err << "rankseg oracle-check: refused, d-max " << args.d_max
        << " exceeds the exhaustive mask-search cap of " << oracle::kSearchCap << "\n";
    return 1;
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> size(args.d_min, args.d_max);
  std::size_t failures = 0;
  for (std::size_t i = 0; i < args.instances; ++i) {
    const auto p = draw_instance(rng, size(rng));
    Checker check(out, i, p);
    try {
      const BinaryProbMap probs(p);
      check_metric(check, probs, Metric::dice, args.inject_fault);
      check_metric(check, probs, Metric::iou, args.inject_fault);
      check_bounds(check, probs);
    } catch (const std::exception& e) {
      check.expect(false, "exception", e.what());
    }
    failures += check.failures();
  }
  out << (failures == 0 ? "PASS" : "FAIL") << " oracle-check: " << args.instances
      << " instances, d in [" << args.d_min << ", " << args.d_max << "], " << failures
      << " violations\n";
  return failures == 0 ? 0 : 2;
}

}  // namespace rankseg::cli
