#include <random>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "rankseg/error.hpp"
#include "rankseg/oracle.hpp"
#include "rankseg/poisson_binomial.hpp"
#include "rankseg/rank_binary.hpp"
#include "rankseg/reference.hpp"

using namespace rankseg;

namespace {

const BinaryProbMap kWorked({0.7, 0.4});

BinaryMask top_tau(const VolumeCurve& curve, std::size_t tau) {
  std::vector<std::uint8_t> bits(curve.order.size(), 0);
  for (std::size_t k = 0; k < tau; ++k) bits[curve.order[k]] = 1;
  return BinaryMask(std::move(bits));
}

BinaryMask mask_of(std::initializer_list<int> bits) {
  return BinaryMask(std::vector<std::uint8_t>(bits.begin(), bits.end()));
}

// Random maps with repeated values, zeros and ones, to exercise tie-breaks.
std::vector<double> tricky_probs(std::mt19937_64& rng, std::size_t d) {
  const double palette[] = {0.0, 0.1, 0.25, 0.5, 0.5, 0.75, 0.9, 1.0};
  std::uniform_int_distribution<int> pick(0, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(d);
  for (auto& v : p) {
    const int k = pick(rng);
    v = k == 8 ? u(rng) : palette[k];
  }
  return p;
}

}  // namespace

TEST_SUITE("rank_binary") {
  TEST_CASE("threshold rule") {
    CHECK(threshold_rule(kWorked, 0.5) == mask_of({1, 0}));
    CHECK(threshold_rule(kWorked, 0.0) == mask_of({1, 1}));
    CHECK(threshold_rule(BinaryProbMap({0.5}), 0.5) == mask_of({1}));
  }

  TEST_CASE("argmax rule ties go to background") {
    CHECK(argmax_rule(kWorked) == mask_of({1, 0}));
    CHECK(argmax_rule(BinaryProbMap({0.5, 0.51})) == mask_of({0, 1}));
  }

  TEST_CASE("ranking is stable and cumsum ends at the mean") {
    const auto r = rank_probabilities(std::vector<double>{0.5, 0.9, 0.0, 0.5, 0.9});
    CHECK(r.order == std::vector<std::uint32_t>{1, 4, 0, 3, 2});
    CHECK(r.nonzero == 4);
    CHECK(r.cumsum.size() == 6);
    CHECK(r.cumsum[0] == 0.0);
    CHECK(r.cumsum[5] == doctest::Approx(2.8));
    CHECK(r.mean == doctest::Approx(2.8));
  }

  TEST_CASE("exact RankDice on the worked example") {
    const auto r = rankdice_exact(kWorked);
    CHECK(r.mask == mask_of({1, 1}));
    CHECK(r.curve.tau_star == 2);
    CHECK(r.curve.values[0] == 0.0);
    CHECK(r.curve.values[1] == doctest::Approx(0.6066667).epsilon(1e-7));
    CHECK(r.curve.values[2] == doctest::Approx(0.64).epsilon(1e-12));
    REQUIRE(r.curve.empty_value.has_value());
    CHECK(*r.curve.empty_value == doctest::Approx(0.18));
    CHECK(r.curve.best_value() == doctest::Approx(0.64));
  }

  TEST_CASE("all-zero maps give the empty mask") {
    const BinaryProbMap zeros(std::vector<double>(5, 0.0));
    for (const auto& r : {rankdice_exact(zeros), rankdice_ba(zeros), rankdice_rma(zeros),
                          rankiou_exact(zeros), rankiou_rma(zeros)}) {
      CHECK(r.curve.tau_star == 0);
      CHECK(r.mask.count() == 0);
      for (double v : r.curve.values) CHECK(v == 0.0);
    }
  }

  TEST_CASE("BA on the worked example") {
    const auto r = rankdice_ba(kWorked);
    CHECK(r.curve.values[1] == doctest::Approx(0.68 * 0.7).epsilon(1e-12));
    CHECK(r.curve.values[1] == doctest::Approx(0.476));
    CHECK(r.curve.values[2] == doctest::Approx(0.502 * 1.1).epsilon(1e-12));
    CHECK(r.curve.values[2] == doctest::Approx(0.5522));
    CHECK(r.mask == mask_of({1, 1}));
  }

  TEST_CASE("BA with one sure pixel") {
    const auto r = rankdice_ba(BinaryProbMap({1.0}));
    CHECK(r.curve.values[1] == doctest::Approx(2.0 / 3.0));
    CHECK(r.mask == mask_of({1}));
  }

  TEST_CASE("BA matches the term-by-term evaluation") {
    std::mt19937_64 rng(21);
    for (std::size_t d : {1u, 5u, 64u, 300u, 2000u}) {
      const BinaryProbMap probs(tricky_probs(rng, d));
      const auto fast = rankdice_ba(probs);
      const auto slow = reference::rankdice_ba_direct(probs);
      for (std::size_t tau = 0; tau <= d; ++tau) {
        CHECK(std::abs(fast.curve.values[tau] - slow.values[tau]) <= 1e-10);
      }
      CHECK(fast.curve.tau_star == slow.tau_star);
    }
  }

  TEST_CASE("RMA on the worked example") {
    const auto r = rankdice_rma(kWorked);
    CHECK(r.curve.values[1] == doctest::Approx(0.451613).epsilon(1e-6));
    CHECK(r.curve.values[2] == doctest::Approx(0.536585).epsilon(1e-6));
    CHECK(r.curve.tau_star == 2);
    CHECK(r.mask == mask_of({1, 1}));
    CHECK(rankdice_rma(BinaryProbMap({0.5})).curve.values[1] == doctest::Approx(0.4));
    CHECK(rankdice_rma(BinaryProbMap({0.5})).mask == mask_of({1}));
  }

  TEST_CASE("RMA keeps every sure pixel") {
    for (std::size_t k = 1; k <= 6; ++k) {
      std::vector<double> p(10, 0.0);
      for (std::size_t j = 0; j < k; ++j) p[3 * j % 10] = 1.0;
      const auto r = rankdice_rma(BinaryProbMap(p));
      CHECK(r.curve.tau_star >= k);
      for (std::size_t j = 0; j < 10; ++j) {
        if (p[j] == 1.0) CHECK(r.mask[j]);
      }
    }
  }

  TEST_CASE("exact RankIoU") {
    const auto r = rankiou_exact(kWorked);
    CHECK(r.curve.values[1] == doctest::Approx(0.56).epsilon(1e-12));
    CHECK(r.curve.values[2] == doctest::Approx(0.55).epsilon(1e-12));
    CHECK(r.curve.tau_star == 1);
    CHECK(r.mask == mask_of({1, 0}));
    CHECK(*r.curve.empty_value == doctest::Approx(0.18));

    const auto sure = rankiou_exact(BinaryProbMap({1.0}));
    CHECK(sure.curve.values[1] == doctest::Approx(1.0));
    CHECK(sure.mask == mask_of({1}));
  }

  TEST_CASE("RMA RankIoU") {
    const auto r = rankiou_rma(kWorked);
    CHECK(r.curve.values[1] == doctest::Approx(0.5));
    CHECK(r.curve.values[2] == doctest::Approx(0.55));
    CHECK(r.mask == mask_of({1, 1}));

    const auto sure = rankiou_rma(BinaryProbMap({1.0, 1.0, 0.0, 0.0}));
    CHECK(sure.curve.values[2] == doctest::Approx(1.0));
    CHECK(sure.mask == mask_of({1, 1, 0, 0}));

    const auto zero = rankiou_rma(BinaryProbMap({0.0}));
    CHECK(zero.mask == mask_of({0}));
  }

  TEST_CASE("expected metrics on the worked example") {
    CHECK(expected_dice(kWorked, mask_of({1, 0})) == doctest::Approx(0.6066667).epsilon(1e-7));
    CHECK(expected_dice(kWorked, mask_of({1, 1})) == doctest::Approx(0.64).epsilon(1e-12));
    CHECK(expected_dice(kWorked, mask_of({0, 0})) == doctest::Approx(0.18).epsilon(1e-12));
    CHECK(expected_iou(kWorked, mask_of({1, 0})) == doctest::Approx(0.56).epsilon(1e-12));
    CHECK(expected_iou(kWorked, mask_of({1, 1})) == doctest::Approx(0.55).epsilon(1e-12));
    CHECK(expected_iou(kWorked, mask_of({0, 0})) == doctest::Approx(0.18).epsilon(1e-12));
    CHECK(expected_dice(kWorked, mask_of({0, 1})) == doctest::Approx(0.4 * (0.3 + 0.7 * 2.0 / 3.0)));
    CHECK_THROWS_AS(expected_dice(kWorked, mask_of({1})), Error);
  }

  TEST_CASE("expected metrics agree with enumeration, including zero pixels") {
    std::mt19937_64 rng(22);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 150; ++trial) {
      const std::size_t d = 1 + trial % 12;
      const BinaryProbMap probs(tricky_probs(rng, d));
      std::vector<std::uint8_t> bits(d);
      for (auto& b : bits) b = coin(rng);
      const BinaryMask mask(bits);
      CHECK(std::abs(expected_dice(probs, mask) -
                     oracle::enumerate_expected_metric(probs, mask, Metric::dice)) <= 1e-10);
      CHECK(std::abs(expected_iou(probs, mask) -
                     oracle::enumerate_expected_metric(probs, mask, Metric::iou)) <= 1e-10);
    }
  }

  TEST_CASE("exact curves equal the expected metric of each top-tau mask") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
      const BinaryProbMap probs(testing::uniform_probs(rng, 1 + trial * 3));
      const auto dice = rankdice_exact(probs).curve;
      const auto iou = rankiou_exact(probs).curve;
      for (std::size_t tau = 1; tau <= probs.size(); ++tau) {
        const auto mask = top_tau(dice, tau);
        CHECK(std::abs(dice.values[tau] - expected_dice(probs, mask)) <= 1e-10);
        CHECK(std::abs(iou.values[tau] - expected_iou(probs, mask)) <= 1e-10);
      }
    }
  }

  TEST_CASE("exact mask is optimal within the ranked family") {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 30; ++trial) {
      const BinaryProbMap probs(testing::uniform_probs(rng, 2 + trial * 4));
      const auto r = rankdice_exact(probs);
      const double best = expected_dice(probs, r.mask);
      for (std::size_t tau = 0; tau <= probs.size(); ++tau) {
        CHECK(best >= expected_dice(probs, top_tau(r.curve, tau)) - 1e-12);
      }
    }
  }

  TEST_CASE("every rule returns a stable top-tau prefix") {
    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 60; ++trial) {
      const BinaryProbMap probs(tricky_probs(rng, 1 + trial));
      for (const auto& r : {rankdice_exact(probs), rankdice_ba(probs), rankdice_rma(probs),
                            rankiou_exact(probs), rankiou_rma(probs)}) {
        CHECK(r.mask == top_tau(r.curve, r.curve.tau_star));
        CHECK(r.curve.tau_star <= rank_probabilities(probs.probs()).nonzero);
        for (std::size_t j = 0; j < probs.size(); ++j) {
          if (probs[j] == 0.0) CHECK_FALSE(r.mask[j]);
        }
      }
    }
  }

  TEST_CASE("tau_star is the smallest maximizer") {
    CHECK(select_volume(std::vector<double>{0.0, 0.3, 0.5, 0.5, 0.1}, 4) == 2);
    CHECK(select_volume(std::vector<double>{0.0, 0.0, 0.0}, 2) == 0);
    CHECK(select_volume(std::vector<double>{0.0, 0.3, 0.5}, 1) == 1);
    CHECK(select_volume(std::vector<double>{0.0, 0.3, 0.5}, 2, 0.5) == 0);
    CHECK(select_volume(std::vector<double>{0.0, 0.3, 0.5}, 2, 0.49) == 2);
  }

  TEST_CASE("the empty mask wins only when its expected metric is at least as large") {
    const BinaryProbMap faint({0.1});
    CHECK(rankdice_exact(faint).mask == mask_of({0}));
    CHECK(rankiou_exact(faint).mask == mask_of({0}));
    CHECK(rankdice_exact(faint).curve.best_value() == doctest::Approx(0.9));

    ExactOptions paper;
    paper.credit_empty = false;
    CHECK(rankdice_exact(faint, paper).mask == mask_of({1}));
    CHECK(rankiou_exact(faint, paper).mask == mask_of({1}));
    CHECK_FALSE(rankdice_exact(faint, paper).curve.empty_value.has_value());

    CHECK(rankdice_exact(BinaryProbMap({0.9})).mask == mask_of({1}));
    CHECK(rankiou_exact(BinaryProbMap({0.9})).mask == mask_of({1}));
  }

  TEST_CASE("BA and exact agree when all probabilities are equal") {
    for (double p : {0.2, 0.5, 0.8}) {
      for (std::size_t d = 1; d <= 64; ++d) {
        const BinaryProbMap probs(std::vector<double>(d, p));
        ExactOptions paper;
        paper.credit_empty = false;  // BA never credits the empty mask
        CHECK(rankdice_ba(probs).mask == rankdice_exact(probs, paper).mask);
      }
    }
  }

  TEST_CASE("RMA error and suboptimality bounds") {
    std::mt19937_64 rng(26);
    std::uniform_int_distribution<std::size_t> size(1, 256);
    for (int trial = 0; trial < 100; ++trial) {
      const BinaryProbMap probs(testing::uniform_probs(rng, size(rng)));
      const auto exact = rankdice_exact(probs).curve;
      const auto rma = rankdice_rma(probs).curve;
      const double mu = pb_mean(probs.probs());
      std::size_t tau_star = 1;
      for (std::size_t tau = 1; tau <= probs.size(); ++tau) {
        CHECK(std::abs(rma.values[tau] - exact.values[tau]) <= 2.0 / (mu + static_cast<double>(tau)));
        if (exact.values[tau] > exact.values[tau_star]) tau_star = tau;
      }
      const std::size_t tau_hat = rma.tau_star;
      CHECK(exact.values[tau_hat] >= exact.values[tau_star] - 2.0 / (mu + tau_hat) - 2.0 / (mu + tau_star));
    }
  }

  TEST_CASE("exact rules refuse maps above the cap") {
    ExactOptions small;
    small.cap = 8;
    const BinaryProbMap probs(std::vector<double>(9, 0.5));
    try {
      rankdice_exact(probs, small);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::cap_exceeded);
      CHECK(std::string(e.what()).find("rankdice-rma") != std::string::npos);
    }
    CHECK_THROWS_AS(rankiou_exact(probs, small), Error);
    CHECK_THROWS_AS(expected_dice(probs, BinaryMask(std::vector<std::uint8_t>(9, 1)), small), Error);
    CHECK_NOTHROW(rankdice_exact(BinaryProbMap(std::vector<double>(8, 0.5)), small));
  }

  TEST_CASE("expected metric cap counts nonzero pixels only") {
    std::vector<double> p(10000, 0.0);
    for (std::size_t j = 0; j < 10; ++j) p[j * 997] = 0.5;
    std::vector<std::uint8_t> bits(10000, 0);
    bits[0] = 1;
    CHECK(expected_dice(BinaryProbMap(p), BinaryMask(bits)) > 0.0);
  }

  TEST_CASE("rules are deterministic across repeated runs") {
    std::mt19937_64 rng(27);
    const BinaryProbMap probs(testing::uniform_probs(rng, 5000));
    const auto a = rankdice_ba(probs);
    const auto b = rankdice_ba(probs);
    CHECK(a.curve.values == b.curve.values);
    CHECK(rankdice_rma(probs).mask == rankdice_rma(probs).mask);
  }
}
