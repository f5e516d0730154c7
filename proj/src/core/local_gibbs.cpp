#include "local_gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "geometric_graph.hpp"
#include "rng.hpp"

namespace rcg {

namespace {

// Neumaier-compensated sum.
class Accumulator {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0, comp_ = 0.0;
};

std::string describe_violations(const ValidityReport& rep) {
  std::string s;
  for (const auto& v : rep.violations) {
    if (!s.empty()) s += "; ";
    s += v.inequality + " violated (" + v.detail + ")";
  }
  return s;
}

struct Link {
  std::size_t y;
  double j;
};

// Interacting neighbours (profile > 0) of each site in `sites`.
std::vector<std::vector<Link>> interaction_links(const Configuration& config,
                                                 std::span<const std::size_t> sites,
                                                 const PairPotential& W) {
  const GeometricGraph graph(config, W.range());
  std::vector<std::vector<Link>> links(sites.size());
  for (std::size_t k = 0; k < sites.size(); ++k) {
    const auto x = config.point(sites[k]);
    for (auto y : graph.neighbors(sites[k])) {
      const auto py = config.point(y);
      double d2 = 0.0;
      for (int a = 0; a < config.dim(); ++a) d2 += (x[a] - py[a]) * (x[a] - py[a]);
      const double j = W.profile_value(std::sqrt(d2));
      if (j != 0.0) links[k].push_back({y, j});
    }
  }
  return links;
}

}  // namespace

void KernelSpec::check() const {
  (void)eta_positions(config.size(), eta);
  if (xi.size() != config.size())
    fail(ErrorCode::DimensionMismatch, "kernel: boundary field must cover the configuration");
  if (xi.spin_dim() != model.spin_dim() || model.pair.spin_dim() != model.spin_dim())
    fail(ErrorCode::DimensionMismatch, "kernel: spin dimension mismatch");
  require(xi.all_finite(), "kernel: boundary field must be finite");
  if (!allow_unvalidated) {
    const auto rep = validate_params(model);
    if (!rep.valid) fail(ErrorCode::Validation, "model: " + describe_violations(rep));
  }
}

void SamplerConfig::validate(int spin_dim) const {
  require(sweeps >= 1, "sampler: sweeps must be >= 1");
  require(thinning >= 1, "sampler: thinning must be >= 1");
  require(sweeps >= thinning, "sampler: sweeps must be >= thinning");
  require(adapt_window >= 1, "sampler: adaptation window must be >= 1");
  require(target_acceptance > 0.0 && target_acceptance < 1.0,
          "sampler: target acceptance must lie in (0,1)");
  require(batches >= 2, "sampler: need at least 2 batches");
  require(proposal_sd.size() == 1 || proposal_sd.size() == static_cast<std::size_t>(spin_dim),
          "sampler: proposal_sd needs 1 or m entries");
  for (double s : proposal_sd) require(std::isfinite(s) && s > 0.0, "sampler: proposal_sd must be > 0");
}

Estimate batch_means(std::span<const double> trace, std::size_t batches) {
  Estimate e;
  const std::size_t n = trace.size();
  if (n == 0) return e;
  Accumulator total;
  for (double v : trace) total.add(v);
  e.mean = total.value() / static_cast<double>(n);
  const std::size_t b = std::min(batches, n / 2);
  if (b < 2) return e;
  const std::size_t len = n / b;
  std::vector<double> means(b);
  for (std::size_t k = 0; k < b; ++k) {
    Accumulator acc;
    for (std::size_t i = k * len; i < (k + 1) * len; ++i) acc.add(trace[i]);
    means[k] = acc.value() / static_cast<double>(len);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(b);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  e.standard_error = std::sqrt(ss / static_cast<double>(b - 1) / static_cast<double>(b));
  return e;
}

Estimate KernelSampleSet::estimate(std::size_t observable) const {
  return batch_means(traces.at(observable), batches);
}

KernelSampleSet mcmc_sample(const KernelSpec& spec, const SamplerConfig& cfg,
                            const std::vector<Observable>& observables) {
  spec.check();
  const int m = spec.model.spin_dim();
  cfg.validate(m);
  const auto& W = spec.model.pair;
  const auto& V = spec.model.single;
  const std::size_t n_eta = spec.eta.size();
  const auto links = interaction_links(spec.config, spec.eta, W);

  std::vector<double> sd(m);
  for (int c = 0; c < m; ++c) sd[c] = cfg.proposal_sd.size() == 1 ? cfg.proposal_sd[0] : cfg.proposal_sd[c];

  SpinField state = spec.xi;
  std::vector<double> log_scale(n_eta, 0.0);
  std::vector<std::size_t> window_accepts(n_eta, 0), accepts(n_eta, 0);
  std::vector<double> proposal(m);
  Stream rng = Stream(cfg.seed).split("mcmc");

  auto site_energy = [&](std::size_t k, std::span<const double> u) {
    double e = 0.0;
    for (const auto& l : links[k]) e += l.j * W.kernel(u, state.spin(l.y));
    return W.scale() * e;
  };

  std::size_t current_sweep = 0;
  auto sweep = [&](bool adapting) {
    for (std::size_t k = 0; k < n_eta; ++k) {
      auto u = state.spin(spec.eta[k]);
      const double scale = std::exp(log_scale[k]);
      for (int c = 0; c < m; ++c) proposal[c] = u[c] + scale * sd[c] * rng.normal();
      const double e_new = site_energy(k, proposal) + V(proposal);
      const double e_old = site_energy(k, u) + V(u);
      if (!std::isfinite(e_new) || !std::isfinite(e_old)) {
        fail(ErrorCode::Runtime, "mcmc: divergent energy at eta position " + std::to_string(k) +
                                     " (site " + std::to_string(spec.eta[k]) + "), sweep " +
                                     std::to_string(current_sweep));
      }
      const double log_ratio = e_old - e_new;
      if (log_ratio >= 0.0 || std::log(rng.uniform_open()) < log_ratio) {
        std::copy(proposal.begin(), proposal.end(), u.begin());
        if (adapting)
          ++window_accepts[k];
        else
          ++accepts[k];
      }
    }
    ++current_sweep;
  };

  // Robbins-Monro on log proposal scale, one scale per site, burn-in only.
  std::size_t window_index = 0;
  for (std::size_t s = 0; s < cfg.burn_in; ++s) {
    sweep(true);
    if ((s + 1) % cfg.adapt_window == 0) {
      ++window_index;
      const double gain = std::pow(static_cast<double>(window_index), -0.6);
      for (std::size_t k = 0; k < n_eta; ++k) {
        const double rate = static_cast<double>(window_accepts[k]) / cfg.adapt_window;
        log_scale[k] = std::clamp(log_scale[k] + gain * (rate - cfg.target_acceptance), -20.0, 20.0);
        window_accepts[k] = 0;
      }
    }
  }

  KernelSampleSet out;
  out.eta_size = n_eta;
  out.spin_dim = m;
  out.batches = cfg.batches;
  out.retained = cfg.retained();
  for (double l : log_scale) out.scales_after_burn_in.push_back(std::exp(l));
  for (const auto& o : observables) out.observable_names.push_back(o.name);
  out.traces.assign(observables.size(), {});
  for (auto& t : out.traces) t.reserve(out.retained);
  if (cfg.store_fields) out.fields.reserve(out.retained * n_eta * m);

  std::vector<double> eta_values(n_eta * m);
  for (std::size_t s = 0; s < cfg.sweeps; ++s) {
    sweep(false);
    if ((s + 1) % cfg.thinning != 0) continue;
    for (std::size_t k = 0; k < n_eta; ++k) {
      const auto u = state.spin(spec.eta[k]);
      std::copy(u.begin(), u.end(), eta_values.begin() + k * m);
    }
    if (cfg.store_fields) out.fields.insert(out.fields.end(), eta_values.begin(), eta_values.end());
    for (std::size_t o = 0; o < observables.size(); ++o)
      out.traces[o].push_back(observables[o].fn(eta_values));
  }
  for (double l : log_scale) out.scales_final.push_back(std::exp(l));
  std::size_t total = 0;
  out.site_acceptance.resize(n_eta);
  for (std::size_t k = 0; k < n_eta; ++k) {
    total += accepts[k];
    out.site_acceptance[k] = static_cast<double>(accepts[k]) / cfg.sweeps;
  }
  out.acceptance = n_eta ? static_cast<double>(total) / (cfg.sweeps * n_eta) : 0.0;
  return out;
}

void QuadratureGrid::validate() const {
  require(std::isfinite(u_max) && u_max > 0.0, "quadrature: u_max must be > 0");
  require(nodes >= 3 && nodes % 2 == 1, "quadrature: node count must be odd and >= 3");
}

double tail_mass(const SinglePotential& V, double u_max) {
  // Composite Simpson on unit segments; radial V so both tails are equal.
  auto f = [&](double t) { return std::exp(-V.radial(t)); };
  auto simpson = [&](double a, double b) {
    const int n = 2000;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
  };
  double inside = 0.0;
  const int segs = std::max(1, static_cast<int>(std::ceil(u_max)));
  for (int s = 0; s < segs; ++s) inside += simpson(u_max * s / segs, u_max * (s + 1) / segs);
  double tail = 0.0;
  for (int s = 0; s < 10000; ++s) {
    const double piece = simpson(u_max + s, u_max + s + 1);
    tail += piece;
    if (piece <= 1e-30 * (inside + tail)) break;
  }
  return tail / (inside + tail);
}

namespace {

// Per-volume log-weight tables for m = 1 on a grid:
//   log w(i_1..i_k) = sum_a single[a][i_a] + sum_{pairs} pair[p][i_a * G + i_b]
// single[] folds in V, the boundary interaction and the trapezoid weight.
struct LogTables {
  int G = 0;
  std::size_t sites = 0;
  std::vector<std::vector<double>> single;
  struct Pair {
    std::size_t a, b;
    std::vector<double> table;
  };
  std::vector<Pair> pairs;

  double log_weight(std::span<const int> idx) const {
    double s = 0.0;
    for (std::size_t a = 0; a < sites; ++a) s += single[a][idx[a]];
    for (const auto& p : pairs) s += p.table[static_cast<std::size_t>(idx[p.a]) * G + idx[p.b]];
    return s;
  }
};

LogTables build_tables(const Configuration& config, std::span<const std::size_t> sites,
                       const SpinField& boundary, const ModelParams& model,
                       const QuadratureGrid& grid) {
  const auto& W = model.pair;
  const auto& V = model.single;
  const int G = grid.nodes;
  LogTables t;
  t.G = G;
  t.sites = sites.size();
  const auto pos = eta_positions(config.size(), sites);
  const auto links = interaction_links(config, sites, W);
  t.single.assign(sites.size(), std::vector<double>(G));
  for (std::size_t a = 0; a < sites.size(); ++a) {
    for (int i = 0; i < G; ++i) {
      const double u = grid.node(i);
      double e = V.radial(std::abs(u));
      for (const auto& l : links[a]) {
        if (pos[l.y] >= 0) continue;
        e += W.scale() * l.j * W.kernel(std::span<const double>(&u, 1), boundary.spin(l.y));
      }
      t.single[a][i] = std::log(grid.weight(i)) - e;
    }
    for (const auto& l : links[a]) {
      if (pos[l.y] < 0 || static_cast<std::size_t>(pos[l.y]) <= a) continue;
      LogTables::Pair p{a, static_cast<std::size_t>(pos[l.y]),
                        std::vector<double>(static_cast<std::size_t>(G) * G)};
      for (int i = 0; i < G; ++i)
        for (int k = 0; k < G; ++k) {
          const double u = grid.node(i), v = grid.node(k);
          p.table[static_cast<std::size_t>(i) * G + k] =
              -W.scale() * l.j * W.kernel(std::span<const double>(&u, 1), std::span<const double>(&v, 1));
        }
      t.pairs.push_back(std::move(p));
    }
  }
  return t;
}

bool next_index(std::vector<int>& idx, int G) {
  for (std::size_t a = idx.size(); a-- > 0;) {
    if (++idx[a] < G) return true;
    idx[a] = 0;
  }
  return false;
}

double max_log_weight(const LogTables& t) {
  std::vector<int> idx(t.sites, 0);
  double mx = -std::numeric_limits<double>::infinity();
  do mx = std::max(mx, t.log_weight(idx));
  while (next_index(idx, t.G));
  return mx;
}

void check_grid_model(const ModelParams& model, const QuadratureGrid& grid, std::size_t sites,
                      std::size_t max_sites) {
  grid.validate();
  require(model.spin_dim() == 1, "quadrature: spin dimension must be 1");
  require(sites <= max_sites, "quadrature: system too large (at most 3 sites)");
  const double tail = tail_mass(model.single, grid.u_max);
  if (!(tail < kTailTolerance))
    fail(ErrorCode::InvalidArgument, "quadrature: truncation check failed, tail mass " +
                                         std::to_string(tail) + " beyond u_max");
}

}  // namespace

double GridDistribution::expect(const std::function<double(std::span<const double>)>& f) const {
  std::vector<int> idx(sites_, 0);
  std::vector<double> u(sites_);
  Accumulator acc;
  std::size_t flat = 0;
  do {
    for (std::size_t a = 0; a < sites_; ++a) u[a] = grid_.node(idx[a]);
    acc.add(prob_[flat++] * f(u));
  } while (next_index(idx, grid_.nodes));
  return acc.value();
}

std::vector<double> GridDistribution::marginal(std::size_t site) const {
  require(site < sites_, "marginal: site out of range");
  std::vector<double> out(grid_.nodes, 0.0);
  std::vector<int> idx(sites_, 0);
  std::size_t flat = 0;
  do out[idx[site]] += prob_[flat++];
  while (next_index(idx, grid_.nodes));
  return out;
}

GridDistribution quadrature_kernel(const KernelSpec& spec, const QuadratureGrid& grid) {
  spec.check();
  check_grid_model(spec.model, grid, spec.eta.size(), 3);
  const LogTables t = build_tables(spec.config, spec.eta, spec.xi, spec.model, grid);
  const double mx = max_log_weight(t);
  std::size_t total = 1;
  for (std::size_t a = 0; a < t.sites; ++a) total *= grid.nodes;
  std::vector<double> prob(total);
  std::vector<int> idx(t.sites, 0);
  Accumulator z;
  std::size_t flat = 0;
  do {
    prob[flat] = std::exp(t.log_weight(idx) - mx);
    z.add(prob[flat++]);
  } while (next_index(idx, grid.nodes));
  const double zv = z.value();
  for (auto& p : prob) p /= zv;
  return GridDistribution(grid, t.sites, std::move(prob));
}

DlrResult dlr_consistency_check(const Configuration& config, std::span<const std::size_t> eta1,
                                std::span<const std::size_t> eta2, const SpinField& xi,
                                const ModelParams& model, const QuadratureGrid& grid,
                                const std::vector<DlrObservable>& observables,
                                bool allow_unvalidated) {
  KernelSpec outer{config, {eta2.begin(), eta2.end()}, xi, model, allow_unvalidated};
  outer.check();
  check_grid_model(model, grid, eta2.size(), 3);
  const auto pos2 = eta_positions(config.size(), eta2);
  (void)eta_positions(config.size(), eta1);
  std::vector<std::size_t> inner_pos, outer_pos;  // positions within eta2
  for (auto s : eta1) {
    require(pos2[s] >= 0, "dlr: eta1 must be a subset of eta2");
    inner_pos.push_back(static_cast<std::size_t>(pos2[s]));
  }
  for (std::size_t k = 0; k < eta2.size(); ++k)
    if (std::find(inner_pos.begin(), inner_pos.end(), k) == inner_pos.end()) outer_pos.push_back(k);

  const int G = grid.nodes;
  const LogTables t2 = build_tables(config, eta2, xi, model, grid);
  const double mx2 = max_log_weight(t2);
  const std::size_t nobs = observables.size();

  // Full index over eta2 from inner and outer parts.
  std::vector<int> full(eta2.size());
  std::vector<double> u2(eta2.size());
  auto assemble = [&](const std::vector<int>& in, const std::vector<int>& out) {
    for (std::size_t k = 0; k < inner_pos.size(); ++k) full[inner_pos[k]] = in[k];
    for (std::size_t k = 0; k < outer_pos.size(); ++k) full[outer_pos[k]] = out[k];
    for (std::size_t k = 0; k < full.size(); ++k) u2[k] = grid.node(full[k]);
  };

  Accumulator z2;
  std::vector<Accumulator> direct(nobs), composed(nobs);
  std::vector<int> out_idx(outer_pos.size(), 0), in_idx(inner_pos.size(), 0);
  SpinField boundary = xi;
  do {
    // Outer slice: unnormalized eta2 weights and the outer marginal mass.
    std::fill(in_idx.begin(), in_idx.end(), 0);
    Accumulator slice_mass;
    std::vector<Accumulator> slice_direct(nobs);
    do {
      assemble(in_idx, out_idx);
      const double w = std::exp(t2.log_weight(full) - mx2);
      slice_mass.add(w);
      for (std::size_t o = 0; o < nobs; ++o) slice_direct[o].add(w * observables[o].fn(u2));
    } while (next_index(in_idx, G));
    z2.add(slice_mass.value());
    for (std::size_t o = 0; o < nobs; ++o) direct[o].add(slice_direct[o].value());

    // Inner kernel Pi_eta1(.|sigma) with sigma = outer slice values, xi elsewhere.
    for (std::size_t k = 0; k < outer_pos.size(); ++k)
      boundary.spin(eta2[outer_pos[k]])[0] = grid.node(out_idx[k]);
    const LogTables t1 = build_tables(config, eta1, boundary, model, grid);
    const double mx1 = max_log_weight(t1);
    std::fill(in_idx.begin(), in_idx.end(), 0);
    Accumulator z1;
    std::vector<Accumulator> inner(nobs);
    do {
      assemble(in_idx, out_idx);
      const double w = std::exp(t1.log_weight(in_idx) - mx1);
      z1.add(w);
      for (std::size_t o = 0; o < nobs; ++o) inner[o].add(w * observables[o].fn(u2));
    } while (next_index(in_idx, G));
    const double ratio = slice_mass.value() / z1.value();
    for (std::size_t o = 0; o < nobs; ++o) composed[o].add(ratio * inner[o].value());
  } while (next_index(out_idx, G));

  DlrResult res;
  const double z = z2.value();
  for (std::size_t o = 0; o < nobs; ++o) {
    res.names.push_back(observables[o].name);
    res.direct.push_back(direct[o].value() / z);
    res.composed.push_back(composed[o].value() / z);
    res.max_residual = std::max(res.max_residual, std::abs(res.direct[o] - res.composed[o]));
  }
  return res;
}

std::vector<DlrObservable> standard_dlr_observables(std::size_t position) {
  return {
      {"u", [position](std::span<const double> s) { return s[position]; }},
      {"u^2", [position](std::span<const double> s) { return s[position] * s[position]; }},
      {"tanh u", [position](std::span<const double> s) { return std::tanh(s[position]); }},
  };
}

DetailedBalanceReport detailed_balance_check(std::span<const double> target,
                                             std::span<const double> nodes, double proposal_sd) {
  require(target.size() == nodes.size() && !nodes.empty(), "detailed balance: size mismatch");
  require(proposal_sd > 0.0, "detailed balance: proposal sd must be > 0");
  const std::size_t n = nodes.size();
  double z = 0.0;
  for (double t : target) {
    require(t > 0.0 && std::isfinite(t), "detailed balance: target must be positive");
    z += t;
  }
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = target[i] / z;

  std::vector<double> K(n * n);
  double max_row = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = nodes[i] - nodes[j];
      K[i * n + j] = std::exp(-d * d / (2.0 * proposal_sd * proposal_sd));
      row += K[i * n + j];
    }
    max_row = std::max(max_row, row);
  }
  std::vector<double> P(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      P[i * n + j] = (K[i * n + j] / max_row) * std::min(1.0, pi[j] / pi[i]);
      off += P[i * n + j];
    }
    P[i * n + i] = 1.0 - off;
  }

  DetailedBalanceReport rep;
  rep.states = n;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row += P[i * n + j];
      rep.max_violation = std::max(rep.max_violation, std::abs(pi[i] * P[i * n + j] - pi[j] * P[j * n + i]));
      rep.max_asymmetry = std::max(rep.max_asymmetry, std::abs(P[i * n + j] - P[j * n + i]));
    }
    rep.max_row_sum_error = std::max(rep.max_row_sum_error, std::abs(row - 1.0));
  }
  for (std::size_t j = 0; j < n; ++j) {
    Accumulator acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(pi[i] * P[i * n + j]);
    rep.stationarity_residual = std::max(rep.stationarity_residual, std::abs(acc.value() - pi[j]));
  }
  return rep;
}

DetailedBalanceReport detailed_balance_check(const SinglePotential& V, const QuadratureGrid& grid,
                                             double proposal_sd) {
  grid.validate();
  require(V.spin_dim() == 1, "detailed balance: spin dimension must be 1");
  std::vector<double> nodes(grid.nodes), target(grid.nodes);
  for (int i = 0; i < grid.nodes; ++i) {
    nodes[i] = grid.node(i);
    target[i] = grid.weight(i) * std::exp(-V.radial(std::abs(nodes[i])));
  }
  return detailed_balance_check(target, nodes, proposal_sd);
}

}  // namespace rcg
