#pragma once

// Straightforward serial versions of the parallel kernels. They share no code
// with the optimized paths and exist so tests and the kernel benchmark have
// something independent to compare against.

#include <span>
#include <vector>

#include "rankseg/fft.hpp"
#include "rankseg/multiclass.hpp"
#include "rankseg/poisson_binomial.hpp"
#include "rankseg/probmap.hpp"
#include "rankseg/rank_binary.hpp"

namespace rankseg::reference {

/// O(N^2) DFT with the same sign and scaling conventions as fft::transform.
std::vector<fft::Complex> naive_dft(std::span<const fft::Complex> data, bool inverse = false);

std::vector<double> direct_convolve(std::span<const double> a, std::span<const double> b);

/// Characteristic-function PMF on exactly m + 1 points with an O(m^2)
/// inverse sum, no FFT and no exponent tracking.
std::vector<double> pb_pmf_cf_direct(std::span<const double> probs);

/// RankDice-BA with the inner sums evaluated term by term, O(d m).
VolumeCurve rankdice_ba_direct(const BinaryProbMap& probs);

LabelMap argmax_prob(const MulticlassProbMap& probs);

/// Per-class binary rule, overlap identification and score argmax written out
/// directly from the algorithm, single-threaded.
LabelMap rankseg_rma_multiclass(const MulticlassProbMap& probs, Metric metric, ScoreKind kind);

}  // namespace rankseg::reference
