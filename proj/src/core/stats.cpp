#include "stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "error.hpp"

namespace rcg {

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

// P(inversions <= k) for a uniform random permutation of n items.
double inversion_cdf(std::size_t n, long k) {
  if (k < 0) return 0.0;
  const std::size_t max_inv = n * (n - 1) / 2;
  std::vector<long double> dist(max_inv + 1, 0.0L), next(max_inv + 1);
  dist[0] = 1.0L;
  std::size_t top = 0;
  for (std::size_t i = 2; i <= n; ++i) {
    // Inserting item i adds 0..i-1 inversions with equal probability.
    std::fill(next.begin(), next.end(), 0.0L);
    long double window = 0.0L;
    const std::size_t new_top = top + i - 1;
    for (std::size_t j = 0; j <= new_top; ++j) {
      if (j <= top) window += dist[j];
      if (j >= i && j - i <= top) window -= dist[j - i];
      next[j] = window / static_cast<long double>(i);
    }
    top = new_top;
    std::swap(dist, next);
  }
  long double c = 0.0L;
  for (long j = 0; j <= std::min<long>(k, static_cast<long>(max_inv)); ++j) c += dist[j];
  return static_cast<double>(std::min(1.0L, c));
}

}  // namespace

TrendTest mann_kendall(std::span<const double> x) {
  const std::size_t n = x.size();
  require(n >= 2, "mann-kendall: need at least two values");
  for (double v : x) require(std::isfinite(v), "mann-kendall: values must be finite");
  TrendTest t;
  long s = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) s += sign(x[j] - x[i]);
  t.statistic = static_cast<double>(s);

  std::map<double, std::size_t> counts;
  for (double v : x) ++counts[v];
  const double nd = static_cast<double>(n);
  double tie_term = 0.0;
  for (const auto& [v, c] : counts) {
    const double cd = static_cast<double>(c);
    tie_term += cd * (cd - 1.0) * (2.0 * cd + 5.0);
  }
  t.variance = (nd * (nd - 1.0) * (2.0 * nd + 5.0) - tie_term) / 18.0;

  if (counts.size() == n && n <= 50) {
    // S = N - 2 * inversions, N = n(n-1)/2; P(S >= s) = P(inv <= (N - s)/2).
    const long total = static_cast<long>(n * (n - 1) / 2);
    t.p_value = inversion_cdf(n, (total - s) / 2);
    t.exact = true;
    return t;
  }
  if (t.variance <= 0.0) {
    t.p_value = 1.0;
    return t;
  }
  const double z = s > 0 ? (s - 1) / std::sqrt(t.variance)
                         : (s < 0 ? (s + 1) / std::sqrt(t.variance) : 0.0);
  t.p_value = 0.5 * std::erfc(z / std::sqrt(2.0));
  return t;
}

std::vector<double> nnls(std::span<const double> a, std::size_t rows, std::size_t cols,
                         std::span<const double> y) {
  require(a.size() == rows * cols && y.size() == rows, "nnls: dimension mismatch");
  require(cols >= 1, "nnls: need at least one column");
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const Mat> A(a.data(), rows, cols);
  const Eigen::Map<const Eigen::VectorXd> b(y.data(), rows);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(cols);
  std::vector<bool> passive(cols, false);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * A.norm() *
                     static_cast<double>(std::max(rows, cols));

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (std::size_t j = 0; j < cols; ++j)
      if (passive[j]) idx.push_back(static_cast<Eigen::Index>(j));
    z = Eigen::VectorXd::Zero(cols);
    if (idx.empty()) return;
    Eigen::MatrixXd Ap(rows, idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(k) = A.col(idx[k]);
    const Eigen::VectorXd sol = Ap.completeOrthogonalDecomposition().solve(b);
    for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = sol[k];
  };

  const std::size_t max_outer = 3 * cols + 10;
  for (std::size_t outer = 0; outer < max_outer; ++outer) {
    const Eigen::VectorXd grad = A.transpose() * (b - A * x);
    std::size_t best = cols;
    double best_val = tol;
    for (std::size_t j = 0; j < cols; ++j)
      if (!passive[j] && grad[j] > best_val) {
        best_val = grad[j];
        best = j;
      }
    if (best == cols) break;
    passive[best] = true;

    Eigen::VectorXd z;
    for (std::size_t inner = 0; inner < 3 * cols + 10; ++inner) {
      solve_passive(z);
      bool feasible = true;
      for (std::size_t j = 0; j < cols; ++j)
        if (passive[j] && z[j] <= 0.0) feasible = false;
      if (feasible) break;
      double step = 1.0;
      for (std::size_t j = 0; j < cols; ++j)
        if (passive[j] && z[j] <= 0.0) step = std::min(step, x[j] / (x[j] - z[j]));
      x += step * (z - x);
      for (std::size_t j = 0; j < cols; ++j)
        if (passive[j] && x[j] <= tol) {
          passive[j] = false;
          x[j] = 0.0;
        }
    }
    x = z;
    for (std::size_t j = 0; j < cols; ++j)
      if (!passive[j]) x[j] = 0.0;
  }
  return {x.data(), x.data() + cols};
}

double r_squared(std::span<const double> observed, std::span<const double> fitted) {
  require(observed.size() == fitted.size() && observed.size() >= 2, "r_squared: size mismatch");
  double mean = 0.0;
  for (double v : observed) mean += v;
  mean /= static_cast<double>(observed.size());
  double ssr = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    ssr += (observed[i] - fitted[i]) * (observed[i] - fitted[i]);
    sst += (observed[i] - mean) * (observed[i] - mean);
  }
  if (sst == 0.0) return ssr == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
  return 1.0 - ssr / sst;
}

double hill_tail_index(std::span<const double> values, std::size_t k) {
  std::vector<double> v;
  for (double x : values)
    if (x > 0.0 && std::isfinite(x)) v.push_back(x);
  require(v.size() >= 3, "hill: need at least three positive values");
  if (k == 0)
    k = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(v.size()))));
  k = std::min(k, v.size() - 1);
  std::sort(v.begin(), v.end(), std::greater<>());
  double h = 0.0;
  for (std::size_t i = 0; i < k; ++i) h += std::log(v[i] / v[k]);
  h /= static_cast<double>(k);
  return h > 0.0 ? 1.0 / h : std::numeric_limits<double>::infinity();
}

double effective_sample_size(std::span<const double> log_weights) {
  require(!log_weights.empty(), "ess: empty weights");
  const double mx = *std::max_element(log_weights.begin(), log_weights.end());
  double s1 = 0.0, s2 = 0.0;
  for (double l : log_weights) {
    const double w = std::exp(l - mx);
    s1 += w;
    s2 += w * w;
  }
  return s1 * s1 / s2;
}

}  // namespace rcg
