#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "rng.hpp"
#include "stats.hpp"

using namespace rcg;

namespace {

double mk_statistic(const std::vector<double>& x) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) s += (x[j] > x[i]) - (x[j] < x[i]);
  return s;
}

// Exhaustive NNLS: best unconstrained fit over every support set whose
// solution is nonnegative.
std::vector<double> nnls_oracle(const std::vector<double>& A, std::size_t rows, std::size_t cols,
                                const std::vector<double>& y) {
  double best = INFINITY;
  std::vector<double> best_x(cols, 0.0);
  for (unsigned mask = 0; mask < (1u << cols); ++mask) {
    std::vector<std::size_t> S;
    for (std::size_t j = 0; j < cols; ++j)
      if (mask & (1u << j)) S.push_back(j);
    std::vector<double> x(cols, 0.0);
    if (!S.empty()) {
      // Normal equations by Gaussian elimination (small, well conditioned).
      const std::size_t k = S.size();
      std::vector<double> G(k * k, 0.0), r(k, 0.0);
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b)
          for (std::size_t i = 0; i < rows; ++i) G[a * k + b] += A[i * cols + S[a]] * A[i * cols + S[b]];
        for (std::size_t i = 0; i < rows; ++i) r[a] += A[i * cols + S[a]] * y[i];
      }
      for (std::size_t p = 0; p < k; ++p)
        for (std::size_t q = p + 1; q < k; ++q) {
          const double f = G[q * k + p] / G[p * k + p];
          for (std::size_t c = p; c < k; ++c) G[q * k + c] -= f * G[p * k + c];
          r[q] -= f * r[p];
        }
      for (std::size_t p = k; p-- > 0;) {
        double v = r[p];
        for (std::size_t c = p + 1; c < k; ++c) v -= G[p * k + c] * x[S[c]];
        x[S[p]] = v / G[p * k + p];
      }
      if (std::any_of(S.begin(), S.end(), [&](std::size_t j) { return x[j] < 0.0; })) continue;
    }
    double ssr = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      double f = 0.0;
      for (std::size_t j = 0; j < cols; ++j) f += A[i * cols + j] * x[j];
      ssr += (y[i] - f) * (y[i] - f);
    }
    if (ssr < best) {
      best = ssr;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace

TEST_CASE("mann-kendall exact distribution equals enumeration") {
  for (std::size_t n : {3u, 5u, 7u}) {
    std::vector<double> perm(n);
    std::iota(perm.begin(), perm.end(), 0.0);
    std::vector<double> stats;
    do stats.push_back(mk_statistic(perm));
    while (std::next_permutation(perm.begin(), perm.end()));
    for (double s_obs = -static_cast<double>(n * (n - 1) / 2); s_obs <= n * (n - 1) / 2.0; s_obs += 2) {
      const double p = static_cast<double>(std::count_if(stats.begin(), stats.end(),
                                                         [&](double s) { return s >= s_obs; })) /
                       stats.size();
      // A series with statistic s_obs: sort then reverse enough pairs; pick by search.
      std::iota(perm.begin(), perm.end(), 0.0);
      do {
        if (mk_statistic(perm) == s_obs) break;
      } while (std::next_permutation(perm.begin(), perm.end()));
      const auto t = mann_kendall(perm);
      CHECK(t.exact);
      CHECK(t.statistic == s_obs);
      CHECK(t.p_value == doctest::Approx(p).epsilon(1e-12));
    }
  }
}

TEST_CASE("mann-kendall basics") {
  const std::vector<double> up{1, 2, 3, 4, 5, 6, 7, 8};
  CHECK(mann_kendall(up).p_value == doctest::Approx(1.0 / 40320.0));
  const std::vector<double> down{8, 7, 6, 5, 4, 3, 2, 1};
  CHECK(mann_kendall(down).p_value == doctest::Approx(1.0));
  const std::vector<double> ties{1, 1, 2, 2, 3, 3, 4, 4};
  const auto t = mann_kendall(ties);
  CHECK(!t.exact);
  CHECK(t.variance == doctest::Approx((8 * 7 * 21 - 4 * 2 * 1 * 9) / 18.0));
  CHECK(t.p_value < 0.01);
  CHECK_THROWS_AS(mann_kendall(std::vector<double>{1.0}), Error);
}

TEST_CASE("nnls matches exhaustive search") {
  Stream rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 12, cols = 1 + trial % 4;
    std::vector<double> A(rows * cols), y(rows);
    for (auto& v : A) v = rng.normal();
    for (auto& v : y) v = rng.normal() * 2.0;
    const auto x = nnls(A, rows, cols, y);
    const auto o = nnls_oracle(A, rows, cols, y);
    for (std::size_t j = 0; j < cols; ++j) {
      CHECK(x[j] >= 0.0);
      CHECK(x[j] == doctest::Approx(o[j]).epsilon(1e-8).scale(1.0));
    }
  }
  // Exact nonnegative solution is recovered; a zero column gets weight 0.
  const std::vector<double> A{1, 0, 0, 0, 1, 0, 1, 1, 0, 2, 1, 0};
  const std::vector<double> y{2, 3, 5, 7};
  const auto x = nnls(A, 4, 3, y);
  CHECK(x[0] == doctest::Approx(2.0));
  CHECK(x[1] == doctest::Approx(3.0));
  CHECK(x[2] == 0.0);
}

TEST_CASE("r squared") {
  const std::vector<double> y{1, 2, 3, 4};
  CHECK(r_squared(y, y) == 1.0);
  const std::vector<double> mean(4, 2.5);
  CHECK(r_squared(y, mean) == doctest::Approx(0.0));
}

TEST_CASE("hill estimator on pareto samples") {
  Stream rng(5);
  std::vector<double> x(20000);
  for (auto& v : x) v = std::pow(rng.uniform_open(), -1.0 / 2.5);  // tail index 2.5
  CHECK(hill_tail_index(x, 1000) == doctest::Approx(2.5).epsilon(0.1));
  std::vector<double> light(5000);
  for (auto& v : light) v = std::abs(rng.normal());
  CHECK(hill_tail_index(light) > 2.5);
}

TEST_CASE("effective sample size") {
  CHECK(effective_sample_size(std::vector<double>(50, 3.0)) == doctest::Approx(50.0));
  CHECK(effective_sample_size(std::vector<double>{0.0, -1000.0, -1000.0}) == doctest::Approx(1.0));
}
