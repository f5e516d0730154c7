#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rcg {

struct TrendTest {
  double statistic = 0.0;  // Mann-Kendall S
  double variance = 0.0;
  double p_value = 1.0;    // one-sided, alternative: increasing trend
  bool exact = false;
};

// One-sided Mann-Kendall test. Exact null distribution (inversion counts)
// when there are no ties and n <= 50, otherwise the tie-corrected normal
// approximation with continuity correction.
TrendTest mann_kendall(std::span<const double> series);

// Lawson-Hanson nonnegative least squares: min |A x - y|, x >= 0.
// A is rows x cols, row-major.
std::vector<double> nnls(std::span<const double> A, std::size_t rows, std::size_t cols,
                         std::span<const double> y);

// Centered coefficient of determination 1 - SSR/SST.
double r_squared(std::span<const double> observed, std::span<const double> fitted);

// Hill estimate of the tail index from the k largest positive values;
// k = 0 picks max(10, sqrt(n)). Returns +inf when the top values coincide.
double hill_tail_index(std::span<const double> values, std::size_t k = 0);

// Kish effective sample size of log-weights.
double effective_sample_size(std::span<const double> log_weights);

}  // namespace rcg
