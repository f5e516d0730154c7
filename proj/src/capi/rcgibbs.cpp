#include "rcgibbs/rcgibbs.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "error.hpp"
#include "geometric_graph.hpp"
#include "manifest.hpp"
#include "marked_io.hpp"
#include "point_process.hpp"
#include "spin_model.hpp"
#include "study_runner.hpp"

struct rcg_config {
  rcg::Configuration config;
};

struct rcg_graph {
  explicit rcg_graph(const rcg::Configuration& c, double radius) : config(c), graph(config, radius) {}
  rcg::Configuration config;
  rcg::GeometricGraph graph;
};

struct rcg_model {
  rcg::ModelParams params;
};

struct rcg_marked {
  rcg::MarkedFile file;
};

namespace {

thread_local std::string last_error;

rcg_status to_status(rcg::ErrorCode code) {
  switch (code) {
    case rcg::ErrorCode::InvalidArgument: return RCG_INVALID_ARGUMENT;
    case rcg::ErrorCode::Parse: return RCG_PARSE;
    case rcg::ErrorCode::Validation: return RCG_VALIDATION;
    case rcg::ErrorCode::Io: return RCG_IO;
    case rcg::ErrorCode::DimensionMismatch: return RCG_DIMENSION_MISMATCH;
    case rcg::ErrorCode::Runtime: return RCG_RUNTIME;
  }
  return RCG_INTERNAL;
}

template <class Fn>
rcg_status guard(Fn&& fn) {
  try {
    fn();
    return RCG_OK;
  } catch (const rcg::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return RCG_RUNTIME;
  } catch (const std::exception& e) {
    last_error = e.what();
    return RCG_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return RCG_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) rcg::fail(rcg::ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

rcg::Window make_window(int dim, const double* lower, const double* upper) {
  rcg::require(dim >= 1, "dimension must be >= 1");
  need(lower, "lower");
  need(upper, "upper");
  return rcg::Window(std::vector<double>(lower, lower + dim), std::vector<double>(upper, upper + dim));
}

}  // namespace

extern "C" {

const char* rcg_last_error(void) { return last_error.c_str(); }

const char* rcg_status_name(rcg_status status) {
  switch (status) {
    case RCG_OK: return "ok";
    case RCG_INVALID_ARGUMENT: return "invalid argument";
    case RCG_PARSE: return "parse error";
    case RCG_VALIDATION: return "validation error";
    case RCG_IO: return "i/o error";
    case RCG_DIMENSION_MISMATCH: return "dimension mismatch";
    case RCG_RUNTIME: return "runtime error";
    case RCG_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* rcg_version(void) { return "1.0.0"; }

rcg_status rcg_config_create(int dim, const double* lower, const double* upper, const double* coords,
                             size_t count, rcg_config** out) {
  return guard([&] {
    need(out, "out");
    if (count) need(coords, "coords");
    auto w = make_window(dim, lower, upper);
    std::vector<double> c(coords, coords + count * static_cast<size_t>(dim));
    *out = new rcg_config{rcg::Configuration(std::move(w), std::move(c))};
  });
}

rcg_status rcg_config_sample(const char* kind, double intensity, double hardcore_radius, int dim,
                             const double* lower, const double* upper, uint64_t seed, rcg_config** out) {
  return guard([&] {
    need(out, "out");
    need(kind, "kind");
    rcg::ProcessSpec spec;
    spec.kind = rcg::ProcessSpec::parse_kind(kind);
    spec.intensity = intensity;
    spec.hardcore_radius = spec.kind == rcg::ProcessSpec::Kind::Poisson ? 0.0 : hardcore_radius;
    *out = new rcg_config{rcg::sample_process(spec, make_window(dim, lower, upper), seed)};
  });
}

rcg_status rcg_config_load(const char* path, rcg_config** out) {
  return guard([&] {
    need(out, "out");
    need(path, "path");
    std::ifstream in(path);
    if (!in) rcg::fail(rcg::ErrorCode::Io, std::string("cannot open '") + path + "'");
    *out = new rcg_config{rcg::load_configuration(in)};
  });
}

rcg_status rcg_config_save(const rcg_config* config, const char* path, int hex_floats) {
  return guard([&] {
    need(config, "config");
    need(path, "path");
    std::ofstream out(path, std::ios::binary);
    if (!out) rcg::fail(rcg::ErrorCode::Io, std::string("cannot write '") + path + "'");
    rcg::save_configuration(out, config->config, hex_floats != 0);
    if (!out) rcg::fail(rcg::ErrorCode::Io, std::string("write failed for '") + path + "'");
  });
}

rcg_status rcg_config_size(const rcg_config* config, size_t* count) {
  return guard([&] {
    need(config, "config");
    need(count, "count");
    *count = config->config.size();
  });
}

rcg_status rcg_config_dim(const rcg_config* config, int* dim) {
  return guard([&] {
    need(config, "config");
    need(dim, "dim");
    *dim = config->config.dim();
  });
}

rcg_status rcg_config_coords(const rcg_config* config, double* coords, size_t capacity) {
  return guard([&] {
    need(config, "config");
    const auto& c = config->config.coords();
    if (capacity < c.size()) rcg::fail(rcg::ErrorCode::InvalidArgument, "coordinate buffer too small");
    if (!c.empty()) {
      need(coords, "coords");
      std::memcpy(coords, c.data(), c.size() * sizeof(double));
    }
  });
}

void rcg_config_free(rcg_config* config) { delete config; }

rcg_status rcg_graph_create(const rcg_config* config, double radius, rcg_graph** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    *out = new rcg_graph(config->config, radius);
  });
}

rcg_status rcg_graph_edge_count(const rcg_graph* graph, size_t* edges) {
  return guard([&] {
    need(graph, "graph");
    need(edges, "edges");
    *edges = graph->graph.edge_count();
  });
}

rcg_status rcg_graph_degree(const rcg_graph* graph, size_t vertex, uint32_t* degree, uint32_t* degree_2r) {
  return guard([&] {
    need(graph, "graph");
    rcg::require(vertex < graph->graph.vertex_count(), "vertex out of range");
    if (degree) *degree = graph->graph.degree(vertex);
    if (degree_2r) *degree_2r = graph->graph.degree_2r(vertex);
  });
}

rcg_status rcg_graph_functionals(const rcg_graph* graph, double alpha, double r, int M, double* a,
                                 double* b, double* majorant) {
  return guard([&] {
    need(graph, "graph");
    const auto w = rcg::WeightParams::from_window(alpha, graph->config.window());
    const auto f = rcg::compute_functionals(graph->graph, w, r, M);
    if (a) *a = f.a;
    if (b) *b = f.b;
    if (majorant) *majorant = f.majorant;
  });
}

void rcg_graph_free(rcg_graph* graph) { delete graph; }

rcg_status rcg_model_load(const char* path, rcg_model** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    auto mf = rcg::Manifest::parse_file(path);
    if (mf.has_section("model")) {
      rcg::resolve_model_file(mf);
    } else {
      // A bare model description file.
      rcg::Manifest merged;
      rcg::merge_model_file(merged, mf);
      mf = std::move(merged);
    }
    auto params = rcg::model_from_manifest(mf);
    *out = new rcg_model{std::move(params)};
  });
}

rcg_status rcg_model_create(double coupling, double range, double a, double q, double kappa, int spin_dim,
                            double alpha, double p, int M, rcg_model** out) {
  return guard([&] {
    need(out, "out");
    rcg::ModelParams params;
    params.pair = rcg::PairPotential::ferromagnetic(range, coupling, spin_dim);
    params.single = rcg::SinglePotential(a, q, kappa, spin_dim);
    params.alpha = alpha;
    params.p = p;
    params.M = M;
    *out = new rcg_model{std::move(params)};
  });
}

rcg_status rcg_model_validate(const rcg_model* model, int* valid, char* message, size_t capacity) {
  return guard([&] {
    need(model, "model");
    need(valid, "valid");
    const auto rep = rcg::validate_params(model->params);
    *valid = rep.valid ? 1 : 0;
    std::string msg;
    for (const auto& v : rep.violations) msg += (msg.empty() ? "" : "; ") + v.inequality + " violated (" + v.detail + ")";
    if (message && capacity) {
      const size_t n = std::min(capacity - 1, msg.size());
      std::memcpy(message, msg.data(), n);
      message[n] = '\0';
    }
  });
}

void rcg_model_free(rcg_model* model) { delete model; }

rcg_status rcg_marked_load(const char* path, int expected_dim, int expected_spin_dim, rcg_marked** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    std::ifstream in(path);
    if (!in) rcg::fail(rcg::ErrorCode::Io, std::string("cannot open '") + path + "'");
    *out = new rcg_marked{rcg::load_marked(in, expected_dim, expected_spin_dim)};
  });
}

rcg_status rcg_marked_save(const rcg_marked* marked, const char* path, int hex_floats) {
  return guard([&] {
    need(marked, "marked");
    need(path, "path");
    std::ofstream out(path, std::ios::binary);
    if (!out) rcg::fail(rcg::ErrorCode::Io, std::string("cannot write '") + path + "'");
    rcg::save_marked(out, marked->file, hex_floats != 0);
    if (!out) rcg::fail(rcg::ErrorCode::Io, std::string("write failed for '") + path + "'");
  });
}

rcg_status rcg_marked_create(int dim, int spin_dim, double radius, rcg_marked** out) {
  return guard([&] {
    need(out, "out");
    rcg::require(dim >= 1 && spin_dim >= 1, "dimensions must be >= 1");
    *out = new rcg_marked{rcg::MarkedFile{dim, spin_dim, radius, {}}};
  });
}

rcg_status rcg_marked_append(rcg_marked* marked, const rcg_config* config, const double* spins,
                             size_t spin_count) {
  return guard([&] {
    need(marked, "marked");
    need(config, "config");
    if (config->config.dim() != marked->file.dimension)
      rcg::fail(rcg::ErrorCode::DimensionMismatch, "configuration dimension does not match the record set");
    const size_t expected = config->config.size() * static_cast<size_t>(marked->file.spin_dim);
    if (spin_count != expected)
      rcg::fail(rcg::ErrorCode::DimensionMismatch, "spin count does not match size * spin_dim");
    if (expected) need(spins, "spins");
    marked->file.records.push_back(
        {config->config, rcg::SpinField(config->config.size(), marked->file.spin_dim,
                                        std::vector<double>(spins, spins + expected))});
  });
}

rcg_status rcg_marked_count(const rcg_marked* marked, size_t* count) {
  return guard([&] {
    need(marked, "marked");
    need(count, "count");
    *count = marked->file.records.size();
  });
}

rcg_status rcg_marked_record(const rcg_marked* marked, size_t k, rcg_config** config, double* spins,
                             size_t capacity) {
  return guard([&] {
    need(marked, "marked");
    rcg::require(k < marked->file.records.size(), "record index out of range");
    const auto& r = marked->file.records[k];
    const auto& v = r.sigma.values();
    if (spins) {
      if (capacity < v.size()) rcg::fail(rcg::ErrorCode::InvalidArgument, "spin buffer too small");
      if (!v.empty()) std::memcpy(spins, v.data(), v.size() * sizeof(double));
    }
    if (config) *config = new rcg_config{r.config};
  });
}

void rcg_marked_free(rcg_marked* marked) { delete marked; }

rcg_status rcg_run(const char* manifest_path, const rcg_run_options* options) {
  return guard([&] {
    need(manifest_path, "manifest_path");
    rcg::RunOptions opts;
    if (options) {
      if (options->has_seed) opts.seed = options->seed;
      if (options->out_dir) opts.out_dir = options->out_dir;
      if (options->threads > 0) opts.threads = options->threads;
      if (options->override_count) need(options->overrides, "overrides");
      for (size_t i = 0; i < options->override_count; ++i) {
        need(options->overrides[i], "override");
        opts.overrides.emplace_back(options->overrides[i]);
      }
    }
    rcg::run_manifest(manifest_path, opts);
  });
}

}  // extern "C"
