#include "geometric_graph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "cell_index.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace rcg {

WeightParams WeightParams::from_window(double alpha, const Window& window) {
  return {alpha, window.origin()};
}

void WeightParams::validate(int dim) const {
  require(std::isfinite(alpha) && alpha > 0.0, "weights: alpha must be > 0");
  require(static_cast<int>(origin.size()) == dim, "weights: origin dimension mismatch");
}

double WeightParams::weight(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t a = 0; a < origin.size(); ++a) {
    const double d = x[a] - origin[a];
    s += d * d;
  }
  return std::exp(-alpha * std::sqrt(s));
}

namespace {

// Neighbour lists at radius `h` (closed ball, no self-loops), sorted.
void neighbour_lists(const Configuration& config, double h, std::vector<std::size_t>& offset,
                     std::vector<std::uint32_t>& adj) {
  const int n = config.dim();
  const std::size_t N = config.size();
  const auto& w = config.window();
  CellIndex index(w.lower(), w.upper(), h, config.coords());
  const double h2 = h * h;
  offset.assign(N + 1, 0);
  adj.clear();
  std::vector<std::uint32_t> local;
  for (std::size_t i = 0; i < N; ++i) {
    local.clear();
    const auto xi = config.point(i);
    index.for_each_near(xi, [&](std::size_t j) {
      if (j == i) return;
      const auto xj = config.point(j);
      double d2 = 0.0;
      for (int a = 0; a < n; ++a) {
        const double d = xi[a] - xj[a];
        d2 += d * d;
      }
      if (d2 <= h2) local.push_back(static_cast<std::uint32_t>(j));
    });
    std::sort(local.begin(), local.end());
    adj.insert(adj.end(), local.begin(), local.end());
    offset[i + 1] = adj.size();
  }
}

}  // namespace

GeometricGraph::GeometricGraph(const Configuration& config, double radius)
    : config_(&config), radius_(radius) {
  require(std::isfinite(radius) && radius > 0.0, "build_graph: radius must be > 0");
  const std::size_t N = config.size();
  require(N < (std::size_t{1} << 32), "build_graph: too many points");
  degree_.resize(N);
  degree_2r_.resize(N);
  if (N == 0) {
    offset_.assign(1, 0);
    return;
  }
  neighbour_lists(config, radius, offset_, adj_);
  for (std::size_t i = 0; i < N; ++i)
    degree_[i] = static_cast<std::uint32_t>(offset_[i + 1] - offset_[i]);
  std::vector<std::size_t> off2;
  std::vector<std::uint32_t> adj2;
  neighbour_lists(config, 2.0 * radius, off2, adj2);
  for (std::size_t i = 0; i < N; ++i)
    degree_2r_[i] = static_cast<std::uint32_t>(off2[i + 1] - off2[i]);
}

std::size_t GeometricGraph::edge_count() const { return adj_.size() / 2; }

bool GeometricGraph::adjacent(std::size_t u, std::size_t v) const {
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), static_cast<std::uint32_t>(v));
}

double functional_b(const Configuration& config, const WeightParams& w) {
  w.validate(config.dim());
  double b = 0.0;
  for (std::size_t i = 0; i < config.size(); ++i) b += w.weight(config.point(i));
  return b;
}

double functional_a(const GeometricGraph& graph, const WeightParams& w, double r) {
  require(std::isfinite(r) && r >= 0.0, "functional_a: exponent r must be >= 0");
  const auto& config = graph.configuration();
  w.validate(config.dim());
  double a = 0.0;
  for (std::size_t x = 0; x < graph.vertex_count(); ++x) {
    const auto nb = graph.neighbors(x);
    if (nb.empty()) continue;
    double inner = 0.0;
    const double nx = graph.degree(x);
    for (auto y : nb) inner += std::pow(nx * graph.degree(y), r);
    a += w.weight(config.point(x)) * inner;
  }
  return a;
}

double functional_majorant(const GeometricGraph& graph, const WeightParams& w, int M) {
  require(M >= 2, "majorant: M must be >= 2");
  const auto& config = graph.configuration();
  w.validate(config.dim());
  double s = 0.0;
  for (std::size_t x = 0; x < graph.vertex_count(); ++x) {
    const double n2 = graph.degree_2r(x);
    if (n2 == 0.0) continue;
    s += w.weight(config.point(x)) * std::pow(n2, M - 1);
  }
  return s;
}

GraphFunctionals compute_functionals(const GeometricGraph& graph, const WeightParams& w, double r,
                                     int M) {
  GraphFunctionals f;
  f.alpha = w.alpha;
  f.r = r;
  f.M = M;
  f.a = functional_a(graph, w, r);
  f.b = functional_b(graph.configuration(), w);
  f.majorant = functional_majorant(graph, w, M);
  return f;
}

MomentSummary summarize(std::vector<double> values) {
  MomentSummary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.variance = values.size() > 1 ? ss / (n - 1.0) : 0.0;
  s.standard_error = std::sqrt(s.variance / n);
  std::sort(values.begin(), values.end());
  auto q = [&](double p) {
    const auto k = static_cast<std::size_t>(std::ceil(p * n)) - 1;
    return values[std::min(k, values.size() - 1)];
  };
  s.q50 = q(0.5);
  s.q90 = q(0.9);
  s.q99 = q(0.99);
  s.max = values.back();
  return s;
}

IntegrabilitySummary integrability_study(const ProcessSpec& spec, const Window& window,
                                         double radius, const WeightParams& w, double r, int M,
                                         std::size_t num_samples, std::uint64_t seed,
                                         int threads) {
  require(num_samples >= 1, "integrability_study: num_samples must be >= 1");
  spec.validate();
  w.validate(window.dim());
  IntegrabilitySummary out;
  out.samples = num_samples;
  out.r = r;
  out.M = M;
  out.r_within_hypothesis = r <= M / 2.0 - 1.0;
  std::vector<double> a(num_samples), b(num_samples), maj(num_samples), cnt(num_samples);
  const Stream master(seed);
  parallel_for(num_samples, threads, [&](std::size_t i) {
    const Configuration config = sample_process(spec, window, master.split(i).key());
    const GeometricGraph g(config, radius);
    a[i] = functional_a(g, w, r);
    b[i] = functional_b(config, w);
    maj[i] = functional_majorant(g, w, M);
    cnt[i] = static_cast<double>(config.size());
  });
  out.a = summarize(std::move(a));
  out.b = summarize(std::move(b));
  out.majorant = summarize(std::move(maj));
  out.vertex_count = summarize(std::move(cnt));
  return out;
}

void export_graph(std::ostream& out, const GeometricGraph& graph) {
  out << "# edges " << graph.edge_count() << "\n";
  for (std::size_t i = 0; i < graph.vertex_count(); ++i)
    for (auto j : graph.neighbors(i))
      if (i < j) out << i << " " << j << "\n";
  out << "# degrees " << graph.vertex_count() << "\n";
  for (std::size_t i = 0; i < graph.vertex_count(); ++i)
    out << i << " " << graph.degree(i) << " " << graph.degree_2r(i) << "\n";
}

}  // namespace rcg
