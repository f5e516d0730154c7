#include "study_runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <sstream>

#include "error.hpp"
#include "geometric_graph.hpp"
#include "local_gibbs.hpp"
#include "marked_io.hpp"
#include "parallel.hpp"
#include "point_process.hpp"
#include "quench_experiments.hpp"
#include "rng.hpp"
#include "textio.hpp"

namespace rcg {

using json = nlohmann::ordered_json;

namespace {

std::string describe(const ValidityReport& rep) {
  std::string s;
  for (const auto& v : rep.violations) s += (s.empty() ? "" : "; ") + v.inequality + " violated (" + v.detail + ")";
  return s;
}

json estimate_json(const Estimate& e) { return {{"mean", e.mean}, {"standard_error", e.standard_error}}; }

json summary_json(const MomentSummary& s) {
  return {{"mean", s.mean}, {"variance", s.variance}, {"standard_error", s.standard_error},
          {"q50", s.q50},   {"q90", s.q90},           {"q99", s.q99},
          {"max", s.max}};
}

std::vector<std::size_t> to_indices(const std::vector<double>& v, const std::string& what,
                                    std::size_t base = 0) {
  std::vector<std::size_t> out;
  for (double x : v) {
    if (!(x >= static_cast<double>(base)) || x != std::floor(x))
      fail(ErrorCode::Parse, what + ": expected integer indices >= " + std::to_string(base));
    out.push_back(static_cast<std::size_t>(x) - base);
  }
  return out;
}

// Everything a study needs, read up front so unknown keys are rejected
// before any sampling starts.
struct Common {
  std::string kind;
  std::uint64_t seed = 0;
  std::string out_dir;
  int threads = 1;
  bool hex = false;
  ProcessSpec process;
  std::optional<Window> window;
  ModelParams model;
  SamplerConfig sampler;
  Stream stream{0};
};

ProcessSpec read_process(const Manifest& mf) {
  ProcessSpec p;
  p.kind = ProcessSpec::parse_kind(mf.get_string("process", "kind", "poisson"));
  p.intensity = mf.get_double("process", "intensity", 1.0);
  p.hardcore_radius = mf.get_double("process", "hardcore_radius", 0.0);
  p.validate();
  return p;
}

Window read_window(const Manifest& mf) {
  const auto lo = mf.get_doubles("window", "lower", {0.0, 0.0});
  const auto hi = mf.get_doubles("window", "upper", {10.0, 10.0});
  if (lo.size() != hi.size()) fail(ErrorCode::DimensionMismatch, "window: lower/upper dimension mismatch");
  if (mf.has("window", "origin")) return Window(lo, hi, mf.get_doubles("window", "origin"));
  Window w(lo, hi);
  mf.get_doubles("window", "origin", w.origin());
  return w;
}

SamplerConfig read_sampler(const Manifest& mf) {
  SamplerConfig s;
  auto count = [&](const char* key, std::size_t fallback) {
    const long long v = mf.get_int("sampler", key, static_cast<long long>(fallback));
    if (v < 0) fail(ErrorCode::Parse, std::string("sampler.") + key + ": must be >= 0");
    return static_cast<std::size_t>(v);
  };
  s.burn_in = count("burn_in", s.burn_in);
  s.sweeps = count("sweeps", s.sweeps);
  s.thinning = count("thinning", s.thinning);
  s.proposal_sd = mf.get_doubles("sampler", "proposal_sd", s.proposal_sd);
  s.adapt_window = count("adapt_window", s.adapt_window);
  s.target_acceptance = mf.get_double("sampler", "target_acceptance", s.target_acceptance);
  s.batches = count("batches", s.batches);
  return s;
}

BoundarySection read_section(const Manifest& mf) {
  BoundarySection s;
  s.rule = BoundarySection::parse_rule(mf.get_string("section", "rule", "zero"));
  s.c = mf.get_double("section", "c", s.rule == BoundarySection::Rule::Zero ? 0.0 : 1.0);
  s.beta = mf.get_double("section", "beta", 0.0);
  s.direction = mf.get_doubles("section", "direction", {});
  return s;
}

Configuration read_configuration(const Manifest& mf, const Common& c) {
  if (mf.has("configuration", "file")) {
    const std::string path = mf.resolve_path(mf.get_string("configuration", "file"));
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open configuration file '" + path + "'");
    Configuration cfg = load_configuration(in);
    if (c.window && !(cfg.window() == *c.window))
      fail(ErrorCode::DimensionMismatch, "configuration file window differs from [window]");
    return cfg;
  }
  if (!c.window) fail(ErrorCode::Parse, "missing [window]");
  if (mf.has("configuration", "points")) {
    // "x1 y1; x2 y2; ..."
    std::vector<double> coords;
    std::stringstream ss(mf.get_string("configuration", "points"));
    std::string row;
    while (std::getline(ss, row, ';')) {
      if (textio::trim(row).empty()) continue;
      const auto v = textio::parse_doubles(row, "configuration.points");
      if (v.size() != static_cast<std::size_t>(c.window->dim()))
        fail(ErrorCode::DimensionMismatch, "configuration.points: row '" + textio::trim(row) +
                                               "' does not match the window dimension");
      coords.insert(coords.end(), v.begin(), v.end());
    }
    return Configuration(*c.window, std::move(coords));
  }
  return sample_process(c.process, *c.window, c.stream.split("configuration").key());
}

void write_file(const std::string& dir, const std::string& name, const std::string& content,
                RunResult& result) {
  const std::filesystem::path path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
  result.artifacts.push_back(name);
}

std::string num(double v) { return textio::format_double(v); }

struct StudyOutput {
  json report = json::object();
  std::vector<std::pair<std::string, std::string>> files;  // name, content
};

using StudyFn = std::function<StudyOutput()>;

// --- graph-stats -----------------------------------------------------------

StudyFn prepare_graph_stats(const Manifest& mf, const Common& c) {
  if (!c.window) fail(ErrorCode::Parse, "graph-stats needs [window]");
  const double radius = mf.get_double("geometry", "radius", c.model.pair.range());
  const long long samples = mf.get_int("geometry", "samples", 100);
  require(samples >= 1, "geometry.samples must be >= 1");
  const int M = static_cast<int>(mf.get_int("geometry", "M", c.model.M));
  const double r = mf.get_double("geometry", "r", M / 2.0 - 1.0);
  const WeightParams w = WeightParams::from_window(c.model.alpha, *c.window);
  return [=]() {
    StudyOutput out;
    const auto summary = integrability_study(c.process, *c.window, radius, w, r, M,
                                             static_cast<std::size_t>(samples),
                                             c.stream.split("integrability").key(), c.threads);
    const Configuration first = sample_process(c.process, *c.window, c.stream.split("example").key());
    const GeometricGraph graph(first, radius);
    const auto f = compute_functionals(graph, w, r, M);
    std::map<std::uint32_t, std::size_t> hist;
    for (auto d : graph.degrees()) ++hist[d];
    json h = json::array();
    std::string series = "degree\tcount\n";
    for (const auto& [d, n] : hist) {
      h.push_back({{"degree", d}, {"count", n}});
      series += std::to_string(d) + "\t" + std::to_string(n) + "\n";
    }
    out.report["example"] = {{"points", first.size()},
                             {"edges", graph.edge_count()},
                             {"degree_histogram", h},
                             {"functionals", {{"a", f.a}, {"b", f.b}, {"majorant", f.majorant}}}};
    out.report["integrability"] = {{"samples", summary.samples},
                                   {"r", summary.r},
                                   {"M", summary.M},
                                   {"r_within_hypothesis", summary.r_within_hypothesis},
                                   {"a", summary_json(summary.a)},
                                   {"b", summary_json(summary.b)},
                                   {"majorant", summary_json(summary.majorant)},
                                   {"vertex_count", summary_json(summary.vertex_count)}};
    out.report["radius"] = radius;
    out.report["alpha"] = w.alpha;
    std::ostringstream g;
    export_graph(g, graph);
    out.files.push_back({"series.tsv", series});
    out.files.push_back({"graph.txt", g.str()});
    return out;
  };
}

// --- correlation -----------------------------------------------------------

StudyFn prepare_correlation(const Manifest& mf, const Common& c) {
  if (!c.window) fail(ErrorCode::Parse, "correlation needs [window]");
  const long long draws = mf.get_int("correlation", "draws", 1000);
  require(draws >= 2, "correlation.draws must be >= 2");
  const double cell = mf.get_double("correlation", "cell_size", 1.0);
  return [=]() {
    StudyOutput out;
    std::vector<Configuration> samples(static_cast<std::size_t>(draws));
    const Stream base = c.stream.split("draws");
    parallel_for(samples.size(), c.threads, [&](std::size_t i) {
      samples[i] = sample_process(c.process, *c.window, base.split(i).key());
    });
    const auto k1 = estimate_correlation(samples, 1, cell);
    const auto k2 = estimate_correlation(samples, 2, cell);
    const double z = c.process.intensity;
    auto max_z = [](const CorrelationEstimate& e, double target, bool off_diagonal_only) {
      double mz = 0.0;
      const std::size_t nc = e.cell_count();
      for (std::size_t i = 0; i < e.estimates.size(); ++i) {
        if (off_diagonal_only && i / nc == i % nc) continue;
        if (e.standard_errors[i] > 0.0)
          mz = std::max(mz, std::abs(e.estimates[i] - target) / e.standard_errors[i]);
      }
      return mz;
    };
    out.report["draws"] = draws;
    out.report["cell_size"] = cell;
    out.report["cells"] = k1.cell_count();
    out.report["k1"] = {{"pooled", k1.pooled},
                        {"standard_error", k1.pooled_se},
                        {"sup", k1.sup_estimate},
                        {"reference", z},
                        {"max_cell_z", max_z(k1, z, false)}};
    out.report["k2"] = {{"pooled_off_diagonal", k2.pooled},
                        {"standard_error", k2.pooled_se},
                        {"pooled_diagonal", k2.pooled_diagonal},
                        {"pooled_diagonal_se", k2.pooled_diagonal_se},
                        {"sup", k2.sup_estimate},
                        {"reference", z * z},
                        {"max_cell_z", max_z(k2, z * z, true)}};
    std::string series = "cell\tvolume\tk1\tk1_se\n";
    for (std::size_t i = 0; i < k1.cell_count(); ++i)
      series += std::to_string(i) + "\t" + num(k1.cell_volumes[i]) + "\t" + num(k1.estimates[i]) + "\t" +
                num(k1.standard_errors[i]) + "\n";
    out.files.push_back({"series.tsv", series});
    return out;
  };
}

// --- kernel-check ----------------------------------------------------------

std::vector<std::size_t> read_eta(const Manifest& mf, const std::string& section,
                                  const std::string& key, const Configuration& config) {
  if (mf.has(section, key)) {
    auto eta = to_indices(mf.get_doubles(section, key), section + "." + key);
    (void)eta_positions(config.size(), eta);
    return eta;
  }
  const auto lo = mf.get_doubles(section, key + "_lower", config.window().lower());
  const auto hi = mf.get_doubles(section, key + "_upper", config.window().upper());
  if (lo.size() != static_cast<std::size_t>(config.dim()) || hi.size() != lo.size())
    fail(ErrorCode::DimensionMismatch, section + "." + key + " box dimension mismatch");
  return config.indices_in_box(lo, hi);
}

StudyFn prepare_kernel_check(const Manifest& mf, const Common& c) {
  const Configuration config = read_configuration(mf, c);
  const auto eta = read_eta(mf, "kernel", "eta", config);
  const BoundarySection section = read_section(mf);
  const bool quadrature = mf.get_bool("kernel", "quadrature", c.model.spin_dim() == 1 && eta.size() <= 3);
  QuadratureGrid grid;
  grid.nodes = static_cast<int>(mf.get_int("kernel", "nodes", grid.nodes));
  grid.u_max = mf.get_double("kernel", "u_max", grid.u_max);
  const bool write_trace = mf.get_bool("kernel", "trace", true);
  const WeightParams w = WeightParams::from_window(c.model.alpha, config.window());
  return [=]() {
    StudyOutput out;
    const int m = c.model.spin_dim();
    const SpinField xi = build_section(section, config, m, w.origin);
    const KernelSpec spec{config, eta, xi, c.model, false};
    std::vector<Observable> obs;
    std::vector<std::function<double(std::span<const double>)>> plain;
    for (std::size_t k = 0; k < eta.size(); ++k) {
      const std::string tag = "[" + std::to_string(eta[k]) + "]";
      auto first = [k, m](std::span<const double> s) { return s[k * m]; };
      auto sq = [k, m](std::span<const double> s) {
        const double n = norm(s.subspan(k * m, m));
        return n * n;
      };
      auto quart = [k, m](std::span<const double> s) {
        const double n = norm(s.subspan(k * m, m));
        return n * n * n * n;
      };
      obs.push_back({"u" + tag, first});
      obs.push_back({"u2" + tag, sq});
      obs.push_back({"u4" + tag, quart});
    }
    if (eta.size() >= 2)
      obs.push_back({"uv[" + std::to_string(eta[0]) + "," + std::to_string(eta[1]) + "]",
                     [m](std::span<const double> s) { return dot(s.subspan(0, m), s.subspan(m, m)); }});
    SamplerConfig cfg = c.sampler;
    cfg.store_fields = false;
    cfg.seed = c.stream.split("sampler").key();
    const auto set = mcmc_sample(spec, cfg, obs);

    json moments = json::object(), ses = json::object();
    for (std::size_t o = 0; o < obs.size(); ++o) {
      const auto e = set.estimate(o);
      moments[obs[o].name] = e.mean;
      ses[obs[o].name] = e.standard_error;
    }
    out.report["eta"] = eta;
    out.report["eta_size"] = eta.size();
    out.report["acceptance"] = set.acceptance;
    out.report["retained"] = set.retained;
    out.report["moments"] = moments;
    out.report["standard_errors"] = ses;
    out.report["scales_frozen"] = set.scales_frozen();
    if (quadrature) {
      const auto dist = quadrature_kernel(spec, grid);
      json ref = json::object(), zs = json::object();
      double max_z = 0.0;
      for (std::size_t o = 0; o < obs.size(); ++o) {
        const double v = dist.expect(obs[o].fn);
        ref[obs[o].name] = v;
        const auto e = set.estimate(o);
        const double z = e.standard_error > 0.0 ? std::abs(e.mean - v) / e.standard_error : 0.0;
        zs[obs[o].name] = z;
        max_z = std::max(max_z, z);
      }
      out.report["quadrature"] = {
          {"nodes", grid.nodes}, {"u_max", grid.u_max}, {"values", ref}, {"z_scores", zs}, {"max_z", max_z}};
    }
    if (write_trace) {
      std::string trace;
      for (std::size_t o = 0; o < obs.size(); ++o) trace += (o ? "\t" : "") + obs[o].name;
      trace += "\n";
      for (std::size_t t = 0; t < set.retained; ++t) {
        for (std::size_t o = 0; o < obs.size(); ++o) trace += (o ? "\t" : "") + num(set.traces[o][t]);
        trace += "\n";
      }
      out.files.push_back({"trace.tsv", trace});
    }
    return out;
  };
}

// --- dlr -------------------------------------------------------------------

StudyFn prepare_dlr(const Manifest& mf, const Common& c) {
  const Configuration config = read_configuration(mf, c);
  const auto eta2 = read_eta(mf, "dlr", "eta2", config);
  const auto eta1 = read_eta(mf, "dlr", "eta1", config);
  const BoundarySection section = read_section(mf);
  QuadratureGrid grid;
  grid.nodes = static_cast<int>(mf.get_int("dlr", "nodes", grid.nodes));
  grid.u_max = mf.get_double("dlr", "u_max", grid.u_max);
  const long long ref_nodes = mf.get_int("dlr", "reference_nodes", 0);
  const long long position = mf.get_int("dlr", "observable_site", -1);
  const WeightParams w = WeightParams::from_window(c.model.alpha, config.window());
  return [=]() {
    StudyOutput out;
    const SpinField xi = build_section(section, config, c.model.spin_dim(), w.origin);
    std::size_t pos = 0;
    if (position >= 0) {
      const auto it = std::find(eta2.begin(), eta2.end(), static_cast<std::size_t>(position));
      require(it != eta2.end(), "dlr.observable_site must lie in eta2");
      pos = static_cast<std::size_t>(it - eta2.begin());
    } else if (!eta1.empty()) {
      pos = static_cast<std::size_t>(std::find(eta2.begin(), eta2.end(), eta1[0]) - eta2.begin());
    }
    const auto observables = standard_dlr_observables(pos);
    auto run_grid = [&](const QuadratureGrid& g) {
      const auto r = dlr_consistency_check(config, eta1, eta2, xi, c.model, g, observables);
      json per = json::array();
      for (std::size_t o = 0; o < r.names.size(); ++o)
        per.push_back({{"observable", r.names[o]},
                       {"direct", r.direct[o]},
                       {"composed", r.composed[o]},
                       {"residual", std::abs(r.direct[o] - r.composed[o])}});
      return std::pair<double, json>{r.max_residual, per};
    };
    const auto [res, per] = run_grid(grid);
    out.report["eta1"] = eta1;
    out.report["eta2"] = eta2;
    out.report["observable_site"] = eta2.empty() ? 0 : eta2[pos];
    out.report["nodes"] = grid.nodes;
    out.report["u_max"] = grid.u_max;
    out.report["max_residual"] = res;
    out.report["observables"] = per;
    if (ref_nodes > 0) {
      QuadratureGrid g2 = grid;
      g2.nodes = static_cast<int>(ref_nodes);
      const auto [res2, per2] = run_grid(g2);
      out.report["reference"] = {{"nodes", g2.nodes}, {"max_residual", res2}, {"observables", per2}};
    }
    return out;
  };
}

// --- moments ---------------------------------------------------------------

VolumeSequence read_volumes(const Manifest& mf, const Window& window) {
  const long long count = mf.get_int("volumes", "count", 8);
  require(count >= 1, "volumes.count must be >= 1");
  return VolumeSequence(window, static_cast<std::size_t>(count), mf.get_double("volumes", "ratio", 1.3));
}

json volume_json(const VolumeMoment& v) {
  return {{"volume", v.volume + 1},
          {"sites", v.sites},
          {"xi_scale", v.xi_scale},
          {"moment", estimate_json(v.moment)},
          {"exp_moment", estimate_json(v.exp_moment)},
          {"ess_fraction", v.ess_fraction},
          {"exp_moment_trusted", v.exp_moment_trusted},
          {"hill_index", std::isfinite(v.hill_index) ? json(v.hill_index) : json("inf")},
          {"acceptance", v.acceptance},
          {"b", v.b},
          {"a", v.a},
          {"xi_norm", v.xi_norm}};
}

StudyFn prepare_moments(const Manifest& mf, const Common& c) {
  const Configuration config = read_configuration(mf, c);
  const VolumeSequence volumes = read_volumes(mf, config.window());
  const BoundarySection section = read_section(mf);
  MomentStudyConfig study;
  study.lambda = mf.get_double("moments", "lambda", -1.0);
  study.design_volumes = to_indices(mf.get_doubles("moments", "design_volumes", {}), "moments.design_volumes", 1);
  study.design_scales = mf.get_doubles("moments", "design_scales", study.design_scales);
  study.ess_threshold = mf.get_double("moments", "ess_threshold", study.ess_threshold);
  study.threads = c.threads;
  return [=]() {
    StudyOutput out;
    SamplerConfig cfg = c.sampler;
    cfg.seed = c.stream.split("sampler").key();
    const auto r = moment_study(config, volumes, section, c.model, cfg, study);
    json vols = json::array(), design = json::array();
    std::string series = "volume\tsites\tmoment\tmoment_se\texp_moment\texp_moment_se\tb\ta\txi_norm\n";
    for (const auto& v : r.volumes) {
      vols.push_back(volume_json(v));
      series += std::to_string(v.volume + 1) + "\t" + std::to_string(v.sites) + "\t" + num(v.moment.mean) +
                "\t" + num(v.moment.standard_error) + "\t" + num(v.exp_moment.mean) + "\t" +
                num(v.exp_moment.standard_error) + "\t" + num(v.b) + "\t" + num(v.a) + "\t" +
                num(v.xi_norm) + "\n";
    }
    for (const auto& v : r.design) design.push_back(volume_json(v));
    out.report["points"] = config.size();
    out.report["p"] = r.p;
    out.report["p_prime"] = r.p_prime;
    out.report["lambda"] = r.lambda;
    out.report["volumes"] = vols;
    out.report["design"] = design;
    out.report["trend"] = {{"test", "mann-kendall one-sided (increasing)"},
                           {"S", r.trend.statistic},
                           {"variance", r.trend.variance},
                           {"p_value", r.trend.p_value},
                           {"exact", r.trend.exact}};
    out.report["fit"] = {{"C1", r.C1}, {"C2", r.C2}, {"C3", r.C3}, {"r_squared", r.r_squared}};
    out.report["xi_stand_in"] = r.xi_stand_in;
    out.files.push_back({"series.tsv", series});
    return out;
  };
}

// --- annealed --------------------------------------------------------------

StudyFn prepare_annealed(const Manifest& mf, const Common& c) {
  if (!c.window) fail(ErrorCode::Parse, "annealed needs [window]");
  const long long draws = mf.get_int("annealed", "draws", 100);
  require(draws >= 1, "annealed.draws must be >= 1");
  const auto lo = mf.get_doubles("annealed", "volume_lower", c.window->lower());
  const auto hi = mf.get_doubles("annealed", "volume_upper", c.window->upper());
  const Window volume(lo, hi, c.window->origin());
  const BoundarySection section = read_section(mf);
  const bool dump = mf.get_bool("annealed", "write_marked", true);
  return [=]() {
    StudyOutput out;
    const auto r = annealed_sample(c.process, *c.window, volume, section, c.model, c.sampler,
                                   static_cast<std::size_t>(draws), c.stream.split("disorder").key(),
                                   c.threads);
    out.report["draws"] = r.draws;
    out.report["phi"] = summary_json(r.phi_summary);
    out.report["b"] = summary_json(r.b_summary);
    out.report["norm"] = summary_json(r.norm_summary);
    out.report["phi_finite"] = std::all_of(r.phi.begin(), r.phi.end(), [](double v) { return std::isfinite(v); });
    std::string series = "draw\tpoints\tphi\n";
    for (std::size_t i = 0; i < r.phi.size(); ++i)
      series += std::to_string(i) + "\t" + std::to_string(r.records[i].config.size()) + "\t" + num(r.phi[i]) + "\n";
    out.files.push_back({"series.tsv", series});
    if (dump) {
      MarkedFile f{c.window->dim(), c.model.spin_dim(), c.model.pair.range(), r.records};
      std::ostringstream s;
      save_marked(s, f, c.hex);
      out.files.push_back({"marked.txt", s.str()});
    }
    return out;
  };
}

// --- cesaro ----------------------------------------------------------------

StudyFn prepare_cesaro(const Manifest& mf, const Common& c) {
  const Configuration config = read_configuration(mf, c);
  const VolumeSequence volumes = read_volumes(mf, config.window());
  const BoundarySection section = read_section(mf);
  const auto names = mf.get_words("cesaro", "observables", {"tanh", "gauss", "pair"});
  const Window first = volumes.box(0);
  const auto lo = mf.get_doubles("cesaro", "obs_lower", first.lower());
  const auto hi = mf.get_doubles("cesaro", "obs_upper", first.upper());
  if (lo.size() != static_cast<std::size_t>(config.dim()) || hi.size() != lo.size())
    fail(ErrorCode::DimensionMismatch, "cesaro observation box dimension mismatch");
  std::vector<double> origin(lo.size());
  for (std::size_t a = 0; a < lo.size(); ++a) origin[a] = 0.5 * (lo[a] + hi[a]);
  const Window obs_box(lo, hi, origin);
  return [=]() {
    StudyOutput out;
    SamplerConfig cfg = c.sampler;
    cfg.seed = c.stream.split("sampler").key();
    const auto r = cesaro_study(config, volumes, obs_box, section, names, c.model, cfg, c.threads);
    json obs = json::array();
    std::string series = "observable\tvolume\tsites\tg\tg_se\trunning\trunning_se\n";
    for (std::size_t o = 0; o < r.observables.size(); ++o) {
      obs.push_back({{"name", r.observables[o]},
                     {"g", r.g[o]},
                     {"g_se", r.g_se[o]},
                     {"running", r.running[o]},
                     {"running_se", r.running_se[o]},
                     {"tail_fluctuation", r.tail_fluctuation[o]},
                     {"tail_se", r.tail_se[o]}});
      for (std::size_t j = 0; j < r.volume_sites.size(); ++j)
        series += r.observables[o] + "\t" + std::to_string(j + 1) + "\t" + std::to_string(r.volume_sites[j]) +
                  "\t" + num(r.g[o][j]) + "\t" + num(r.g_se[o][j]) + "\t" + num(r.running[o][j]) + "\t" +
                  num(r.running_se[o][j]) + "\n";
    }
    out.report["points"] = config.size();
    out.report["volume_sites"] = r.volume_sites;
    out.report["observables"] = obs;
    out.files.push_back({"series.tsv", series});
    return out;
  };
}

}  // namespace

std::vector<std::string> study_kinds() {
  return {"graph-stats", "correlation", "kernel-check", "dlr", "moments", "annealed", "cesaro"};
}

void merge_model_file(Manifest& mf, const Manifest& file) {
  static const std::map<std::string, std::map<std::string, std::string>> layout{
      {"pair",
       {{"kind", "pair"},
        {"J", "J"},
        {"matrix", "matrix"},
        {"coefficients", "coefficients"},
        {"range", "range"},
        {"profile", "profile"}}},
      {"single", {{"a", "a"}, {"q", "q"}, {"kappa", "kappa"}, {"spin_dim", "spin_dim"}}},
      {"tempered", {{"alpha", "alpha"}, {"p", "p"}, {"M", "M"}}},
  };
  for (const auto& section : file.sections()) {
    const auto it = layout.find(section);
    if (it == layout.end())
      fail(ErrorCode::Parse, "model file: unknown section '[" + section + "]' (expected pair, single, tempered)");
    mf.merge_section(file, section, "model", it->second);
  }
}

void resolve_model_file(Manifest& mf) {
  if (!mf.has("model", "file")) return;
  merge_model_file(mf, Manifest::parse_file(mf.resolve_path(mf.get_string("model", "file"))));
}

std::string validity_json(const ValidityReport& rep) {
  json v;
  v["valid"] = rep.valid;
  json violations = json::array();
  for (const auto& x : rep.violations) violations.push_back({{"inequality", x.inequality}, {"detail", x.detail}});
  v["violations"] = violations;
  auto number = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  v["p_prime"] = number(rep.p_prime);
  v["M_lower_bound"] = number(rep.m_lower_bound);
  v["p_lower_bound"] = number(rep.p_lower_bound);
  return v.dump(2) + "\n";
}

ModelParams model_from_manifest(const Manifest& mf) {
  ModelParams p;
  const int m = static_cast<int>(mf.get_int("model", "spin_dim", 1));
  require(m >= 1, "model.spin_dim must be >= 1");
  const double range = mf.get_double("model", "range", 1.0);
  const std::string profile_name = mf.get_string("model", "profile", "constant");
  PairPotential::Profile profile;
  if (profile_name == "constant")
    profile = PairPotential::Profile::Constant;
  else if (profile_name == "linear")
    profile = PairPotential::Profile::Linear;
  else
    fail(ErrorCode::Parse, "model.profile: unknown profile '" + profile_name + "'");
  const std::string pair = mf.get_string("model", "pair", "ferromagnetic");
  if (pair == "ferromagnetic") {
    p.pair = PairPotential::ferromagnetic(range, mf.get_double("model", "J", 0.1), m, profile);
  } else if (pair == "bilinear") {
    p.pair = PairPotential::bilinear(range, mf.get_doubles("model", "matrix"), m, profile);
  } else if (pair == "polynomial") {
    p.pair = PairPotential::polynomial(range, mf.get_doubles("model", "coefficients"), m, profile);
  } else if (pair == "none") {
    p.pair = PairPotential::none(range, m);
  } else {
    fail(ErrorCode::Parse, "model.pair: unknown pair kind '" + pair + "'");
  }
  p.single = SinglePotential(mf.get_double("model", "a", 1.0), mf.get_double("model", "q", 4.0),
                             mf.get_double("model", "kappa", 0.0), m);
  p.alpha = mf.get_double("model", "alpha", 1.0);
  p.p = mf.get_double("model", "p", 3.0);
  p.M = static_cast<int>(mf.get_int("model", "M", 6));
  const double beta = mf.get_double("model", "beta", 1.0);
  require(std::isfinite(beta) && beta > 0.0, "model.beta must be > 0");
  return beta == 1.0 ? p : p.with_beta(beta);
}

RunResult run_manifest(const std::string& manifest_path, const RunOptions& options) {
  return run_manifest(Manifest::parse_file(manifest_path), options);
}

RunResult run_manifest(Manifest mf, const RunOptions& options) {
  for (const auto& o : options.overrides) mf.apply_override(o);
  resolve_model_file(mf);

  Common c;
  c.kind = mf.get_string("study", "kind");
  const auto kinds = study_kinds();
  if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end())
    fail(ErrorCode::Parse, "study.kind: unknown study '" + c.kind + "'");
  if (options.seed) mf.apply_override("study.seed=" + std::to_string(*options.seed));
  if (!mf.has("study", "seed")) fail(ErrorCode::Parse, "missing required field 'study.seed' (master seed)");
  c.seed = mf.get_uint64("study", "seed");
  if (options.out_dir) mf.apply_override("study.output=" + *options.out_dir);
  c.out_dir = mf.get_string("study", "output", "out");
  if (options.threads) mf.apply_override("study.threads=" + std::to_string(*options.threads));
  c.threads = static_cast<int>(mf.get_int("study", "threads", 1));
  require(c.threads >= 1, "study.threads must be >= 1");
  c.hex = mf.get_bool("study", "hex_floats", false);
  c.stream = Stream(c.seed).split(c.kind);

  c.process = read_process(mf);
  if (mf.has_section("window") || !mf.has("configuration", "file")) c.window = read_window(mf);
  c.model = model_from_manifest(mf);
  const auto validity = validate_params(c.model);
  if (!validity.valid) {
    std::error_code ec;
    std::filesystem::create_directories(c.out_dir, ec);
    if (!ec) std::ofstream(std::filesystem::path(c.out_dir) / "validity.json") << validity_json(validity);
    fail(ErrorCode::Validation, "model: " + describe(validity));
  }
  c.sampler = read_sampler(mf);
  c.sampler.validate(c.model.spin_dim());

  StudyFn study;
  if (c.kind == "graph-stats") study = prepare_graph_stats(mf, c);
  else if (c.kind == "correlation") study = prepare_correlation(mf, c);
  else if (c.kind == "kernel-check") study = prepare_kernel_check(mf, c);
  else if (c.kind == "dlr") study = prepare_dlr(mf, c);
  else if (c.kind == "moments") study = prepare_moments(mf, c);
  else if (c.kind == "annealed") study = prepare_annealed(mf, c);
  else study = prepare_cesaro(mf, c);
  mf.check_all_used();

  StudyOutput output;
  try {
    output = study();
  } catch (const Error& e) {
    fail(e.code(), c.kind + " study: " + e.what());
  }

  RunResult result{c.kind, c.out_dir, {}};
  std::error_code ec;
  std::filesystem::create_directories(c.out_dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create output directory '" + c.out_dir + "': " + ec.message());

  json report;
  report["format"] = "rcgibbs report v1";
  report["study"] = c.kind;
  report["master_seed"] = c.seed;
  json manifest = json::object();
  for (const auto& [section, keys] : mf.resolved()) {
    json s = json::object();
    for (const auto& [k, v] : keys) {
      // Where and how fast a run executes does not change its results.
      if (section == "study" && (k == "output" || k == "threads")) continue;
      s[k] = v;
    }
    manifest[section] = s;
  }
  report["manifest"] = manifest;
  report["result"] = output.report;
  write_file(c.out_dir, "report.json", report.dump(2) + "\n", result);
  write_file(c.out_dir, "resolved_manifest.ini", mf.resolved_text(), result);
  write_file(c.out_dir, "validity.json", validity_json(validity), result);
  for (const auto& [name, content] : output.files) write_file(c.out_dir, name, content, result);
  return result;
}

}  // namespace rcg
