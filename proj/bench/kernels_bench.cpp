// Times the OpenMP kernels against the serial reference implementations on
// the same synthetic inputs. Prints one aligned row per kernel and size.

#include <algorithm>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "rankseg/multiclass.hpp"
#include "rankseg/parallel.hpp"
#include "rankseg/poisson_binomial.hpp"
#include "rankseg/rank_binary.hpp"
#include "rankseg/reference.hpp"
#include "rankseg/synthetic.hpp"

namespace {

using namespace rankseg;

double median_seconds(const std::function<void()>& fn, int trials) {
  fn();
  std::vector<double> times;
  for (int t = 0; t < trials; ++t) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

void row(const char* kernel, std::size_t n, double fast, double serial) {
  std::printf("%-22s %10zu %12.6f %12.6f %8.2fx\n", kernel, n, fast, serial, serial / fast);
}

MulticlassProbMap softmax_map(std::size_t classes, std::size_t d, std::uint64_t seed) {
  std::vector<double> probs(classes * d);
  for (std::size_t c = 0; c < classes; ++c) {
    const auto row = synthetic::probabilities(d, synthetic::Kind::blobby, seed + c);
    std::copy(row.begin(), row.end(), probs.begin() + static_cast<std::ptrdiff_t>(c * d));
  }
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum += probs[c * d + j] + 1e-3;
    for (std::size_t c = 0; c < classes; ++c) probs[c * d + j] = (probs[c * d + j] + 1e-3) / sum;
  }
  return MulticlassProbMap(std::move(probs), classes, {d});
}

}  // namespace

int main(int argc, char** argv) {
  const int trials = argc > 1 ? std::atoi(argv[1]) : 5;
  set_threads(resolve_threads(std::nullopt));
  std::printf("threads: %d, trials: %d\n", max_threads(), trials);
  std::printf("%-22s %10s %12s %12s %9s\n", "kernel", "n", "parallel_s", "serial_s", "speedup");

  for (std::size_t n : {std::size_t{1} << 10, std::size_t{1} << 12}) {
    std::vector<fft::Complex> data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = {std::sin(0.1 * i), std::cos(0.3 * i)};
    const double fast = median_seconds([&] {
      auto copy = data;
      fft::transform(copy, false);
    }, trials);
    const double serial = median_seconds([&] { reference::naive_dft(data); }, trials);
    row("dft", n, fast, serial);
  }

  for (std::size_t m : {std::size_t{512}, std::size_t{2048}}) {
    const auto p = synthetic::probabilities(m, synthetic::Kind::uniform, 7);
    const double fast = median_seconds([&] { pb_pmf_dft(p); }, trials);
    const double serial = median_seconds([&] { reference::pb_pmf_cf_direct(p); }, trials);
    row("pb_pmf_cf", m, fast, serial);
  }

  for (std::size_t d : {std::size_t{1} << 12, std::size_t{1} << 14}) {
    const BinaryProbMap probs(synthetic::probabilities(d, synthetic::Kind::blobby, 11));
    const double fast = median_seconds([&] { rankdice_ba(probs); }, trials);
    const double serial = median_seconds([&] { reference::rankdice_ba_direct(probs); }, trials);
    row("rankdice_ba", d, fast, serial);
  }

  for (std::size_t d : {std::size_t{1} << 14, std::size_t{1} << 16}) {
    const auto probs = softmax_map(4, d, 3);
    const double fast = median_seconds([&] {
      rankseg_rma_multiclass(probs, Metric::dice, ScoreKind::rma_dice);
    }, trials);
    const double serial = median_seconds([&] {
      reference::rankseg_rma_multiclass(probs, Metric::dice, ScoreKind::rma_dice);
    }, trials);
    row("multiclass_rma", d, fast, serial);
  }
  return 0;
}
