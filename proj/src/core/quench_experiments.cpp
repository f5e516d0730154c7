#include "quench_experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace rcg {

void BoundarySection::validate(int spin_dim) const {
  require(std::isfinite(c) && c >= 0.0, "section: c must be >= 0");
  require(std::isfinite(beta) && beta >= 0.0, "section: beta must be >= 0");
  if (!direction.empty()) {
    if (direction.size() != static_cast<std::size_t>(spin_dim))
      fail(ErrorCode::DimensionMismatch, "section: direction must have m components");
    require(std::abs(norm(direction) - 1.0) < 1e-12, "section: direction must be a unit vector");
  }
}

std::string BoundarySection::rule_name() const {
  switch (rule) {
    case Rule::Zero: return "zero";
    case Rule::Constant: return "constant";
    case Rule::Radial: return "radial";
  }
  return "zero";
}

BoundarySection::Rule BoundarySection::parse_rule(const std::string& name) {
  if (name == "zero") return Rule::Zero;
  if (name == "constant") return Rule::Constant;
  if (name == "radial") return Rule::Radial;
  fail(ErrorCode::Parse, "section: unknown rule '" + name + "'");
}

BoundarySection BoundarySection::scaled(double factor) const {
  BoundarySection s = *this;
  s.c *= factor;
  return s;
}

SpinField build_section(const BoundarySection& section, const Configuration& config, int spin_dim,
                        std::span<const double> origin) {
  section.validate(spin_dim);
  if (origin.size() != static_cast<std::size_t>(config.dim()))
    fail(ErrorCode::DimensionMismatch, "section: origin dimension mismatch");
  SpinField xi(config.size(), spin_dim, 0.0);
  if (section.rule == BoundarySection::Rule::Zero) return xi;
  std::vector<double> dir(spin_dim, 0.0);
  if (section.direction.empty())
    dir[0] = 1.0;
  else
    dir = section.direction;
  for (std::size_t i = 0; i < config.size(); ++i) {
    double amp = section.c;
    if (section.rule == BoundarySection::Rule::Radial) {
      const auto x = config.point(i);
      double d2 = 0.0;
      for (int a = 0; a < config.dim(); ++a) d2 += (x[a] - origin[a]) * (x[a] - origin[a]);
      amp *= std::exp(section.beta * std::sqrt(d2));
    }
    auto u = xi.spin(i);
    for (int c = 0; c < spin_dim; ++c) u[c] = amp * dir[c];
  }
  return xi;
}

VolumeSequence::VolumeSequence(const Window& window, std::size_t count, double ratio)
    : origin_(window.origin()), ratio_(ratio) {
  require(count >= 1, "volumes: need at least one volume");
  require(std::isfinite(ratio) && ratio > 1.0, "volumes: ratio must be > 1");
  const int n = window.dim();
  for (std::size_t k = 0; k < count; ++k) {
    const double f = std::pow(ratio, static_cast<double>(k + 1) - static_cast<double>(count));
    std::vector<double> lo(n), hi(n);
    for (int a = 0; a < n; ++a) {
      if (k + 1 == count) {
        lo[a] = window.lower()[a];
        hi[a] = window.upper()[a];
      } else {
        lo[a] = origin_[a] - f * (origin_[a] - window.lower()[a]);
        hi[a] = origin_[a] + f * (window.upper()[a] - origin_[a]);
      }
    }
    lower_.push_back(std::move(lo));
    upper_.push_back(std::move(hi));
  }
}

Window VolumeSequence::box(std::size_t k) const {
  require(k < size(), "volumes: index out of range");
  return Window(lower_[k], upper_[k], origin_);
}

Configuration restrict_to(const Configuration& config, const Window& box) {
  if (box.dim() != config.dim()) fail(ErrorCode::DimensionMismatch, "restrict: dimension mismatch");
  std::vector<double> coords;
  for (auto i : config.indices_in_box(box.lower(), box.upper())) {
    const auto x = config.point(i);
    coords.insert(coords.end(), x.begin(), x.end());
  }
  return Configuration(box, std::move(coords), config.provenance());
}

namespace {

// Weighted p-norm power over the whole configuration as a function of the
// eta spins, the complement held at xi.
struct NormObservable {
  std::vector<double> eta_weights;
  double offset = 0.0;
  int m = 1;
  double p = 2.0;

  double operator()(std::span<const double> s) const {
    double acc = offset;
    for (std::size_t k = 0; k < eta_weights.size(); ++k)
      acc += eta_weights[k] * std::pow(norm(s.subspan(k * m, m)), p);
    return acc;
  }
};

NormObservable make_norm(const Configuration& config, std::span<const std::size_t> eta,
                         const SpinField& xi, const WeightParams& w, double p) {
  NormObservable obs;
  obs.m = xi.spin_dim();
  obs.p = p;
  const auto pos = eta_positions(config.size(), eta);
  for (auto i : eta) obs.eta_weights.push_back(w.weight(config.point(i)));
  for (std::size_t i = 0; i < config.size(); ++i)
    if (pos[i] < 0) obs.offset += w.weight(config.point(i)) * std::pow(norm(xi.spin(i)), p);
  return obs;
}

std::uint64_t chain_seed(std::uint64_t base, const char* label, std::size_t index) {
  return Stream(base).split(label).split(index).key();
}

std::string volume_context(std::size_t k) { return "volume " + std::to_string(k + 1) + ": "; }

}  // namespace

MomentReport moment_study(const Configuration& config, const VolumeSequence& volumes,
                          const BoundarySection& section, const ModelParams& model,
                          const SamplerConfig& sampler, const MomentStudyConfig& study) {
  const auto rep = validate_params(model);
  if (!rep.valid) {
    std::string msg;
    for (const auto& v : rep.violations) msg += (msg.empty() ? "" : "; ") + v.inequality + " violated";
    fail(ErrorCode::Validation, "model: " + msg);
  }
  const int m = model.spin_dim();
  section.validate(m);
  const WeightParams w = WeightParams::from_window(model.alpha, config.window());
  for (auto k : study.design_volumes) require(k < volumes.size(), "moments: design volume out of range");
  for (double s : study.design_scales) require(std::isfinite(s) && s >= 0.0, "moments: scales must be >= 0");

  MomentReport out;
  out.p = model.p;
  out.p_prime = model.p_prime();
  out.lambda = study.lambda >= 0.0 ? study.lambda : 0.1 * model.single.stability_a();

  struct Task {
    std::size_t volume;
    double scale;
  };
  std::vector<Task> tasks;
  for (std::size_t k = 0; k < volumes.size(); ++k) tasks.push_back({k, 1.0});
  std::vector<std::size_t> design_volumes = study.design_volumes;
  if (design_volumes.empty())
    for (std::size_t k = 0; k < volumes.size(); ++k) design_volumes.push_back(k);
  std::vector<std::size_t> design_task;
  for (double s : study.design_scales)
    for (auto k : design_volumes) {
      if (s == 1.0) {
        design_task.push_back(k);
      } else {
        design_task.push_back(tasks.size());
        tasks.push_back({k, s});
      }
    }

  std::vector<VolumeMoment> results(tasks.size());
  parallel_for(tasks.size(), study.threads, [&](std::size_t t) {
    const auto [k, scale] = tasks[t];
    try {
      const Window box = volumes.box(k);
      const auto eta = config.indices_in_box(box.lower(), box.upper());
      const SpinField xi = build_section(section.scaled(scale), config, m, w.origin);
      const NormObservable norm_obs = make_norm(config, eta, xi, w, model.p);

      SamplerConfig cfg = sampler;
      cfg.store_fields = false;
      cfg.seed = chain_seed(sampler.seed, "moments", t);
      const KernelSpec spec{config, eta, xi, model, false};
      const auto set = mcmc_sample(spec, cfg, {{"norm", norm_obs}});

      VolumeMoment& r = results[t];
      r.volume = k;
      r.sites = eta.size();
      r.xi_scale = scale;
      r.acceptance = set.acceptance;
      r.moment = set.estimate(0);
      const auto& trace = set.traces[0];
      std::vector<double> logw(trace.size());
      for (std::size_t i = 0; i < trace.size(); ++i) logw[i] = out.lambda * trace[i];
      const double mx = *std::max_element(logw.begin(), logw.end());
      std::vector<double> scaled(trace.size());
      for (std::size_t i = 0; i < trace.size(); ++i) scaled[i] = std::exp(logw[i] - mx);
      const Estimate e = batch_means(scaled, set.batches);
      r.exp_moment = {std::exp(mx) * e.mean, std::exp(mx) * e.standard_error};
      r.ess_fraction = effective_sample_size(logw) / static_cast<double>(trace.size());
      r.exp_moment_trusted = r.ess_fraction >= study.ess_threshold;
      const auto positive = std::count_if(trace.begin(), trace.end(), [](double v) { return v > 0.0; });
      r.hill_index = positive >= 3 ? hill_tail_index(trace) : std::numeric_limits<double>::infinity();

      const Configuration sub = restrict_to(config, box);
      r.b = functional_b(sub, w);
      r.a = functional_a(GeometricGraph(sub, model.pair.range()), w, model.p_prime());
      r.xi_norm = norm_obs.offset;
    } catch (const Error& e) {
      fail(e.code(), volume_context(k) + e.what());
    }
  });

  for (std::size_t k = 0; k < volumes.size(); ++k) out.volumes.push_back(results[k]);
  for (auto t : design_task) out.design.push_back(results[t]);

  std::vector<double> series;
  for (const auto& v : out.volumes) series.push_back(v.moment.mean);
  if (series.size() >= 2) out.trend = mann_kendall(series);

  const std::size_t rows = out.design.size();
  std::vector<double> A, y;
  for (const auto& d : out.design) {
    A.insert(A.end(), {d.b, d.a, d.xi_norm});
    y.push_back(d.moment.mean);
  }
  const auto coef = nnls(A, rows, 3, y);
  out.C1 = coef[0];
  out.C2 = coef[1];
  out.C3 = coef[2];
  std::vector<double> fitted(rows);
  for (std::size_t i = 0; i < rows; ++i)
    fitted[i] = coef[0] * A[3 * i] + coef[1] * A[3 * i + 1] + coef[2] * A[3 * i + 2];
  out.r_squared = rows >= 2 ? r_squared(y, fitted) : 0.0;
  for (const auto& v : out.volumes) out.xi_stand_in = std::max(out.xi_stand_in, v.exp_moment.mean);
  return out;
}

AnnealedReport annealed_sample(const ProcessSpec& process, const Window& window,
                               const Window& volume, const BoundarySection& section,
                               const ModelParams& model, const SamplerConfig& sampler,
                               std::size_t num_disorder, std::uint64_t seed, int threads) {
  const auto rep = validate_params(model);
  if (!rep.valid) fail(ErrorCode::Validation, "model: " + rep.violations.front().inequality + " violated");
  require(num_disorder >= 1, "annealed: need at least one disorder draw");
  if (volume.dim() != window.dim()) fail(ErrorCode::DimensionMismatch, "annealed: volume dimension mismatch");
  const int m = model.spin_dim();
  section.validate(m);
  const WeightParams w = WeightParams::from_window(model.alpha, window);

  AnnealedReport out;
  out.draws = num_disorder;
  out.phi.resize(num_disorder);
  out.records.resize(num_disorder);
  std::vector<double> bs(num_disorder), norms(num_disorder);
  parallel_for(num_disorder, threads, [&](std::size_t i) {
    try {
      const Stream draw = Stream(seed).split("annealed").split(i);
      const Configuration gamma = sample_process(process, window, draw.split("gamma").key());
      const SpinField xi = build_section(section, gamma, m, w.origin);
      const auto eta = gamma.indices_in_box(volume.lower(), volume.upper());
      SpinField sigma = xi;
      if (!eta.empty()) {
        SamplerConfig cfg = sampler;
        cfg.seed = draw.split("chain").key();
        cfg.store_fields = true;
        const auto set = mcmc_sample(KernelSpec{gamma, eta, xi, model, false}, cfg);
        const auto last = set.field(set.retained - 1);
        for (std::size_t k = 0; k < eta.size(); ++k)
          for (int c = 0; c < m; ++c) sigma.spin(eta[k])[c] = last[k * m + c];
      }
      bs[i] = functional_b(gamma, w);
      norms[i] = tempered_norm_pow(gamma, sigma, w, model.p);
      out.phi[i] = bs[i] + norms[i];
      out.records[i] = {gamma, std::move(sigma)};
    } catch (const Error& e) {
      fail(e.code(), "disorder draw " + std::to_string(i) + ": " + e.what());
    }
  });
  out.phi_summary = summarize(out.phi);
  out.b_summary = summarize(bs);
  out.norm_summary = summarize(norms);
  return out;
}

std::vector<std::string> cesaro_observable_names() { return {"tanh", "gauss", "pair", "const"}; }

CesaroReport cesaro_study(const Configuration& config, const VolumeSequence& volumes,
                          const Window& obs_box, const BoundarySection& section,
                          const std::vector<std::string>& observables, const ModelParams& model,
                          const SamplerConfig& sampler, int threads) {
  const auto rep = validate_params(model);
  if (!rep.valid) fail(ErrorCode::Validation, "model: " + rep.violations.front().inequality + " violated");
  require(!observables.empty(), "cesaro: no observables");
  const int m = model.spin_dim();
  section.validate(m);
  if (obs_box.dim() != config.dim()) fail(ErrorCode::DimensionMismatch, "cesaro: observation box dimension");
  const Window first = volumes.box(0);
  for (int a = 0; a < config.dim(); ++a)
    require(obs_box.lower()[a] >= first.lower()[a] && obs_box.upper()[a] <= first.upper()[a],
            "cesaro: observable support not contained in the smallest volume");
  const auto obs_sites = config.indices_in_box(obs_box.lower(), obs_box.upper());
  require(!obs_sites.empty(), "cesaro: observation box contains no points");

  std::pair<std::size_t, std::size_t> pair{0, 0};
  bool have_pair = false;
  const GeometricGraph graph(config, model.pair.range());
  for (auto x : obs_sites) {
    for (auto y : graph.neighbors(x))
      if (y > x && std::find(obs_sites.begin(), obs_sites.end(), y) != obs_sites.end()) {
        pair = {x, y};
        have_pair = true;
        break;
      }
    if (have_pair) break;
  }
  for (const auto& name : observables) {
    const auto names = cesaro_observable_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
      fail(ErrorCode::InvalidArgument, "cesaro: unknown observable '" + name + "'");
    require(name != "pair" || have_pair, "cesaro: no adjacent pair inside the observation box");
  }

  const WeightParams w = WeightParams::from_window(model.alpha, config.window());
  const SpinField xi = build_section(section, config, m, w.origin);
  const std::size_t nv = volumes.size();
  CesaroReport out;
  out.observables = observables;
  out.volume_sites.resize(nv);
  const std::size_t no = observables.size();
  out.g.assign(no, std::vector<double>(nv));
  out.g_se = out.g;

  parallel_for(nv, threads, [&](std::size_t j) {
    try {
      const Window box = volumes.box(j);
      const auto eta = config.indices_in_box(box.lower(), box.upper());
      out.volume_sites[j] = eta.size();
      const auto pos = eta_positions(config.size(), eta);
      std::vector<std::size_t> local;
      for (auto s : obs_sites) local.push_back(static_cast<std::size_t>(pos[s]));
      const std::size_t px = static_cast<std::size_t>(pos[pair.first]);
      const std::size_t py = static_cast<std::size_t>(pos[pair.second]);
      std::vector<Observable> obs;
      for (const auto& name : observables) {
        if (name == "tanh") {
          obs.push_back({name, [local, m](std::span<const double> s) {
                           double acc = 0.0;
                           for (auto k : local) acc += std::tanh(s[k * m]);
                           return acc / static_cast<double>(local.size());
                         }});
        } else if (name == "gauss") {
          obs.push_back({name, [local, m](std::span<const double> s) {
                           double acc = 0.0;
                           for (auto k : local) {
                             const double n = norm(s.subspan(k * m, m));
                             acc += std::exp(-n * n);
                           }
                           return acc / static_cast<double>(local.size());
                         }});
        } else if (name == "pair") {
          obs.push_back({name, [px, py, m](std::span<const double> s) {
                           return std::tanh(dot(s.subspan(px * m, m), s.subspan(py * m, m)));
                         }});
        } else {
          obs.push_back({name, [](std::span<const double>) { return 1.0; }});
        }
      }
      SamplerConfig cfg = sampler;
      cfg.store_fields = false;
      cfg.seed = chain_seed(sampler.seed, "cesaro", j);
      const auto set = mcmc_sample(KernelSpec{config, eta, xi, model, false}, cfg, obs);
      for (std::size_t o = 0; o < no; ++o) {
        const Estimate e = set.estimate(o);
        out.g[o][j] = e.mean;
        out.g_se[o][j] = e.standard_error;
      }
    } catch (const Error& e) {
      fail(e.code(), volume_context(j) + e.what());
    }
  });

  out.running.assign(no, std::vector<double>(nv));
  out.running_se = out.running;
  const std::size_t tail = (nv + 2) / 3;
  for (std::size_t o = 0; o < no; ++o) {
    double sum = 0.0, var = 0.0;
    for (std::size_t j = 0; j < nv; ++j) {
      sum += out.g[o][j];
      var += out.g_se[o][j] * out.g_se[o][j];
      out.running[o][j] = sum / static_cast<double>(j + 1);
      out.running_se[o][j] = std::sqrt(var) / static_cast<double>(j + 1);
    }
    double lo = out.running[o][nv - tail], hi = lo, se = 0.0;
    for (std::size_t j = nv - tail; j < nv; ++j) {
      lo = std::min(lo, out.running[o][j]);
      hi = std::max(hi, out.running[o][j]);
      se = std::max(se, out.running_se[o][j]);
    }
    out.tail_fluctuation.push_back(hi - lo);
    out.tail_se.push_back(se);
  }
  return out;
}

}  // namespace rcg
