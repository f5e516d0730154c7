#include "point_process.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "cell_index.hpp"
#include "error.hpp"
#include "rng.hpp"
#include "textio.hpp"

namespace rcg {

Window::Window(std::vector<double> lower, std::vector<double> upper)
    : Window(lower, upper, [&] {
        std::vector<double> c(lower.size());
        for (std::size_t a = 0; a < lower.size() && a < upper.size(); ++a)
          c[a] = 0.5 * (lower[a] + upper[a]);
        return c;
      }()) {}

Window::Window(std::vector<double> lower, std::vector<double> upper, std::vector<double> origin)
    : lower_(std::move(lower)), upper_(std::move(upper)), origin_(std::move(origin)) {
  require(!lower_.empty(), "window: dimension must be positive");
  require(upper_.size() == lower_.size() && origin_.size() == lower_.size(),
          "window: lower/upper/origin dimensions differ");
  for (std::size_t a = 0; a < lower_.size(); ++a) {
    require(std::isfinite(lower_[a]) && std::isfinite(upper_[a]) && upper_[a] > lower_[a],
            "window: upper must exceed lower on every axis (zero-volume window)");
    require(origin_[a] >= lower_[a] && origin_[a] <= upper_[a],
            "window: origin must lie inside the box");
  }
}

double Window::volume() const {
  double v = 1.0;
  for (std::size_t a = 0; a < lower_.size(); ++a) v *= upper_[a] - lower_[a];
  return v;
}

bool Window::contains(std::span<const double> x) const {
  for (std::size_t a = 0; a < lower_.size(); ++a)
    if (!(x[a] >= lower_[a] && x[a] <= upper_[a])) return false;
  return true;
}

double Window::distance_to_origin(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t a = 0; a < origin_.size(); ++a) {
    const double d = x[a] - origin_[a];
    s += d * d;
  }
  return std::sqrt(s);
}

void ProcessSpec::validate() const {
  require(std::isfinite(intensity) && intensity > 0.0, "process: intensity must be > 0");
  if (kind == Kind::MaternHardcore)
    require(std::isfinite(hardcore_radius) && hardcore_radius > 0.0,
            "process: matern_hardcore requires hardcore_radius > 0");
}

std::string ProcessSpec::kind_name() const {
  return kind == Kind::Poisson ? "poisson" : "matern_hardcore";
}

ProcessSpec::Kind ProcessSpec::parse_kind(const std::string& name) {
  if (name == "poisson") return Kind::Poisson;
  if (name == "matern_hardcore") return Kind::MaternHardcore;
  fail(ErrorCode::Parse, "unknown process kind '" + name + "'");
}

Configuration::Configuration(Window window, std::vector<double> coords, Provenance provenance)
    : window_(std::move(window)), coords_(std::move(coords)), provenance_(std::move(provenance)) {
  const int n = window_.dim();
  require(n > 0, "configuration: window has no dimension");
  require(coords_.size() % n == 0, "configuration: coordinate count not a multiple of dimension");
  const std::size_t N = size();
  for (std::size_t i = 0; i < N; ++i)
    require(window_.contains(point(i)), "configuration: point outside window");
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(coords_.begin() + a * n, coords_.begin() + (a + 1) * n,
                                        coords_.begin() + b * n, coords_.begin() + (b + 1) * n);
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t k = 1; k < N; ++k)
    require(less(order[k - 1], order[k]), "configuration: duplicate points (not simple)");
}

std::vector<std::size_t> Configuration::indices_in_box(std::span<const double> lo,
                                                       std::span<const double> hi) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    const auto x = point(i);
    bool in = true;
    for (int a = 0; a < dim() && in; ++a) in = x[a] >= lo[a] && x[a] <= hi[a];
    if (in) out.push_back(i);
  }
  return out;
}

namespace {

std::vector<double> uniform_points(const Window& w, std::size_t count, Stream& rng) {
  const int n = w.dim();
  std::vector<double> coords(count * n);
  for (std::size_t i = 0; i < count; ++i)
    for (int a = 0; a < n; ++a) {
      double x = w.lower()[a] + (w.upper()[a] - w.lower()[a]) * rng.uniform();
      coords[i * n + a] = std::min(x, w.upper()[a]);
    }
  return coords;
}

}  // namespace

Configuration sample_poisson(const Window& window, double intensity, std::uint64_t seed) {
  ProcessSpec spec{ProcessSpec::Kind::Poisson, intensity, 0.0};
  spec.validate();
  require(window.volume() > 0.0, "sample_poisson: zero-volume window");
  Stream rng = Stream(seed).split("poisson");
  const std::uint64_t count = rng.poisson(intensity * window.volume());
  return Configuration(window, uniform_points(window, count, rng), {"poisson", seed, spec});
}

std::vector<bool> matern_survivors(const Configuration& proposal, std::span<const double> marks,
                                   double radius) {
  require(radius > 0.0, "matern: radius must be > 0");
  require(marks.size() == proposal.size(), "matern: one mark per proposal point required");
  const int n = proposal.dim();
  const auto& w = proposal.window();
  CellIndex index(w.lower(), w.upper(), radius, proposal.coords());
  const double r2 = radius * radius;
  std::vector<bool> keep(proposal.size(), true);
  for (std::size_t i = 0; i < proposal.size(); ++i) {
    const auto xi = proposal.point(i);
    index.for_each_near(xi, [&](std::size_t j) {
      if (j == i || !keep[i] || !(marks[j] < marks[i])) return;
      const auto xj = proposal.point(j);
      double d2 = 0.0;
      for (int a = 0; a < n; ++a) d2 += (xi[a] - xj[a]) * (xi[a] - xj[a]);
      if (d2 <= r2) keep[i] = false;
    });
  }
  return keep;
}

Configuration sample_matern_hardcore(const Window& window, double intensity, double radius,
                                     std::uint64_t seed) {
  ProcessSpec spec{ProcessSpec::Kind::MaternHardcore, intensity, radius};
  spec.validate();
  require(window.volume() > 0.0, "sample_matern_hardcore: zero-volume window");
  Stream rng = Stream(seed).split("matern_hardcore");
  const std::uint64_t count = rng.poisson(intensity * window.volume());
  Configuration proposal(window, uniform_points(window, count, rng));
  std::vector<double> marks(count);
  for (auto& m : marks) m = rng.uniform();
  const auto keep = matern_survivors(proposal, marks, radius);
  std::vector<double> coords;
  for (std::size_t i = 0; i < count; ++i)
    if (keep[i]) coords.insert(coords.end(), proposal.point(i).begin(), proposal.point(i).end());
  return Configuration(window, std::move(coords), {"matern_hardcore", seed, spec});
}

Configuration sample_process(const ProcessSpec& spec, const Window& window, std::uint64_t seed) {
  spec.validate();
  if (spec.kind == ProcessSpec::Kind::Poisson) return sample_poisson(window, spec.intensity, seed);
  return sample_matern_hardcore(window, spec.intensity, spec.hardcore_radius, seed);
}

CorrelationEstimate estimate_correlation(std::span<const Configuration> samples, int order,
                                         double cell_size) {
  require(!samples.empty(), "estimate_correlation: empty sample list");
  require(order == 1 || order == 2, "estimate_correlation: order must be 1 or 2");
  require(cell_size > 0.0, "estimate_correlation: cell size must be > 0");
  const Window& w = samples.front().window();
  for (const auto& s : samples)
    require(s.window() == w, "estimate_correlation: samples have mixed windows");

  const int n = w.dim();
  CorrelationEstimate est;
  est.order = order;
  est.cell_size = cell_size;
  est.sample_count = samples.size();
  est.cells_per_axis.resize(n);
  std::vector<std::size_t> stride(n);
  std::size_t cells = 1;
  for (int a = 0; a < n; ++a) {
    const double ratio = (w.upper()[a] - w.lower()[a]) / cell_size;
    const double r = std::round(ratio);
    const double k = std::abs(ratio - r) < 1e-9 * std::max(1.0, r) ? r : std::ceil(ratio);
    est.cells_per_axis[a] = static_cast<std::size_t>(std::max(1.0, k));
    stride[a] = cells;
    cells *= est.cells_per_axis[a];
  }
  require(order == 1 || cells <= 4096, "estimate_correlation: too many cells for order 2");
  est.cell_volumes.assign(cells, 1.0);
  for (std::size_t c = 0; c < cells; ++c) {
    std::size_t rem = c;
    for (int a = 0; a < n; ++a) {
      const std::size_t i = rem % est.cells_per_axis[a];
      rem /= est.cells_per_axis[a];
      const double lo = w.lower()[a] + i * cell_size;
      const double hi = std::min(w.upper()[a], lo + cell_size);
      est.cell_volumes[c] *= hi - lo;
    }
  }
  auto cell_of = [&](std::span<const double> x) {
    std::size_t c = 0;
    for (int a = 0; a < n; ++a) {
      double t = std::floor((x[a] - w.lower()[a]) / cell_size);
      std::size_t i = t <= 0.0 ? 0 : static_cast<std::size_t>(t);
      i = std::min(i, est.cells_per_axis[a] - 1);
      c += i * stride[a];
    }
    return c;
  };

  const std::size_t entries = order == 1 ? cells : cells * cells;
  std::vector<double> sum(entries, 0.0), sumsq(entries, 0.0);
  double pool_sum = 0.0, pool_sumsq = 0.0, diag_sum = 0.0, diag_sumsq = 0.0;
  const double vol = w.volume();
  double off_vol2 = vol * vol, diag_vol2 = 0.0;
  for (double v : est.cell_volumes) diag_vol2 += v * v;
  off_vol2 -= diag_vol2;

  std::vector<double> counts(cells);
  for (const auto& s : samples) {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) counts[cell_of(s.point(i))] += 1.0;
    if (order == 1) {
      for (std::size_t c = 0; c < cells; ++c) {
        const double v = counts[c] / est.cell_volumes[c];
        sum[c] += v;
        sumsq[c] += v * v;
      }
      const double pooled = static_cast<double>(s.size()) / vol;
      pool_sum += pooled;
      pool_sumsq += pooled * pooled;
    } else {
      double diag_pairs = 0.0;
      for (std::size_t c1 = 0; c1 < cells; ++c1) {
        for (std::size_t c2 = 0; c2 < cells; ++c2) {
          const double pairs = c1 == c2 ? counts[c1] * (counts[c1] - 1.0) : counts[c1] * counts[c2];
          const double v = pairs / (est.cell_volumes[c1] * est.cell_volumes[c2]);
          sum[c1 * cells + c2] += v;
          sumsq[c1 * cells + c2] += v * v;
        }
        diag_pairs += counts[c1] * (counts[c1] - 1.0);
      }
      const double N = static_cast<double>(s.size());
      const double off = off_vol2 > 0.0 ? (N * (N - 1.0) - diag_pairs) / off_vol2 : 0.0;
      pool_sum += off;
      pool_sumsq += off * off;
      const double dg = diag_pairs / diag_vol2;
      diag_sum += dg;
      diag_sumsq += dg * dg;
    }
  }

  const double ns = static_cast<double>(samples.size());
  auto mean_se = [ns](double s, double ss, double& mean, double& se) {
    mean = s / ns;
    const double var = ns > 1.0 ? std::max(0.0, (ss - ns * mean * mean) / (ns - 1.0)) : 0.0;
    se = std::sqrt(var / ns);
  };
  est.estimates.resize(entries);
  est.standard_errors.resize(entries);
  for (std::size_t e = 0; e < entries; ++e)
    mean_se(sum[e], sumsq[e], est.estimates[e], est.standard_errors[e]);
  if (order == 2) {
    // Ordered-pair counts are already symmetric; average anyway so the
    // reported matrix is symmetric to the last bit.
    for (std::size_t c1 = 0; c1 < cells; ++c1)
      for (std::size_t c2 = c1 + 1; c2 < cells; ++c2) {
        const double m = 0.5 * (est.estimates[c1 * cells + c2] + est.estimates[c2 * cells + c1]);
        const double se = 0.5 * (est.standard_errors[c1 * cells + c2] +
                                 est.standard_errors[c2 * cells + c1]);
        est.estimates[c1 * cells + c2] = est.estimates[c2 * cells + c1] = m;
        est.standard_errors[c1 * cells + c2] = est.standard_errors[c2 * cells + c1] = se;
      }
    mean_se(diag_sum, diag_sumsq, est.pooled_diagonal, est.pooled_diagonal_se);
  }
  mean_se(pool_sum, pool_sumsq, est.pooled, est.pooled_se);
  est.sup_estimate = *std::max_element(est.estimates.begin(), est.estimates.end());
  return est;
}

void save_configuration(std::ostream& out, const Configuration& config, bool hex) {
  const auto& w = config.window();
  const auto& p = config.provenance();
  out << "# rcgibbs configuration v1\n";
  out << "dimension " << w.dim() << "\n";
  out << "lower " << textio::join(w.lower(), hex) << "\n";
  out << "upper " << textio::join(w.upper(), hex) << "\n";
  out << "origin " << textio::join(w.origin(), hex) << "\n";
  out << "sampler " << p.sampler << "\n";
  out << "seed " << p.seed << "\n";
  out << "spec " << p.spec.kind_name() << " " << textio::format_double(p.spec.intensity, hex) << " "
      << textio::format_double(p.spec.hardcore_radius, hex) << "\n";
  out << "points " << config.size() << "\n";
  for (std::size_t i = 0; i < config.size(); ++i) {
    const auto x = config.point(i);
    out << textio::join(std::vector<double>(x.begin(), x.end()), hex) << "\n";
  }
}

namespace {

std::vector<std::string> expect_line(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Parse, "configuration file: missing '" + key + "'");
  auto toks = textio::split_ws(line);
  if (toks.empty() || toks[0] != key)
    fail(ErrorCode::Parse, "configuration file: expected '" + key + "', got '" + line + "'");
  toks.erase(toks.begin());
  return toks;
}

std::vector<double> to_doubles(const std::vector<std::string>& toks, const std::string& ctx) {
  std::vector<double> v;
  for (const auto& t : toks) v.push_back(textio::parse_double(t, ctx));
  return v;
}

}  // namespace

Configuration load_configuration(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || textio::trim(header) != "# rcgibbs configuration v1")
    fail(ErrorCode::Parse, "configuration file: bad or unsupported header");
  const auto dim_t = expect_line(in, "dimension");
  if (dim_t.size() != 1) fail(ErrorCode::Parse, "configuration file: bad dimension line");
  const auto n = textio::parse_int(dim_t[0], "dimension");
  if (n <= 0) fail(ErrorCode::Parse, "configuration file: dimension must be positive");
  auto lower = to_doubles(expect_line(in, "lower"), "lower");
  auto upper = to_doubles(expect_line(in, "upper"), "upper");
  auto origin = to_doubles(expect_line(in, "origin"), "origin");
  if (lower.size() != static_cast<std::size_t>(n) || upper.size() != lower.size() ||
      origin.size() != lower.size())
    fail(ErrorCode::DimensionMismatch, "configuration file: window dimension mismatch");
  Provenance prov;
  auto samp = expect_line(in, "sampler");
  prov.sampler = samp.empty() ? "" : samp[0];
  auto seed = expect_line(in, "seed");
  if (seed.size() != 1) fail(ErrorCode::Parse, "configuration file: bad seed line");
  prov.seed = std::stoull(seed[0]);
  auto spec = expect_line(in, "spec");
  if (spec.size() != 3) fail(ErrorCode::Parse, "configuration file: bad spec line");
  prov.spec.kind = ProcessSpec::parse_kind(spec[0]);
  prov.spec.intensity = textio::parse_double(spec[1], "spec intensity");
  prov.spec.hardcore_radius = textio::parse_double(spec[2], "spec radius");
  auto cnt = expect_line(in, "points");
  if (cnt.size() != 1) fail(ErrorCode::Parse, "configuration file: bad points line");
  const auto count = textio::parse_int(cnt[0], "points");
  std::vector<double> coords;
  coords.reserve(count * n);
  std::string line;
  for (long long i = 0; i < count; ++i) {
    if (!std::getline(in, line)) fail(ErrorCode::Parse, "configuration file: truncated point list");
    auto x = textio::parse_doubles(line, "point");
    if (x.size() != static_cast<std::size_t>(n))
      fail(ErrorCode::DimensionMismatch, "configuration file: point row has wrong dimension");
    coords.insert(coords.end(), x.begin(), x.end());
  }
  return Configuration(Window(lower, upper, origin), std::move(coords), prov);
}

}  // namespace rcg
