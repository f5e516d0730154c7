/* C interface to the rcgibbs library. All handles are opaque; every call
 * returns an rcg_status and, on failure, rcg_last_error() describes it
 * (per thread, valid until the next failing call on that thread). */
#ifndef RCGIBBS_H
#define RCGIBBS_H

#include <stddef.h>
#include <stdint.h>

#if defined(RCG_BUILDING_LIBRARY)
#define RCG_API __attribute__((visibility("default")))
#else
#define RCG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rcg_status {
  RCG_OK = 0,
  RCG_INVALID_ARGUMENT = 1,
  RCG_PARSE = 2,
  RCG_VALIDATION = 3,
  RCG_IO = 4,
  RCG_DIMENSION_MISMATCH = 5,
  RCG_RUNTIME = 6,
  RCG_INTERNAL = 7
} rcg_status;

typedef struct rcg_config rcg_config;
typedef struct rcg_graph rcg_graph;
typedef struct rcg_model rcg_model;
typedef struct rcg_marked rcg_marked;

RCG_API const char* rcg_last_error(void);
RCG_API const char* rcg_status_name(rcg_status status);
RCG_API const char* rcg_version(void);

/* Point configurations in a box window; origin is the box center. */
RCG_API rcg_status rcg_config_create(int dim, const double* lower, const double* upper,
                                     const double* coords, size_t count, rcg_config** out);
/* kind: "poisson" or "matern_hardcore" (hardcore_radius ignored for poisson). */
RCG_API rcg_status rcg_config_sample(const char* kind, double intensity, double hardcore_radius,
                                     int dim, const double* lower, const double* upper,
                                     uint64_t seed, rcg_config** out);
RCG_API rcg_status rcg_config_load(const char* path, rcg_config** out);
RCG_API rcg_status rcg_config_save(const rcg_config* config, const char* path, int hex_floats);
RCG_API rcg_status rcg_config_size(const rcg_config* config, size_t* count);
RCG_API rcg_status rcg_config_dim(const rcg_config* config, int* dim);
/* Copies count * dim coordinates; `capacity` is in doubles. */
RCG_API rcg_status rcg_config_coords(const rcg_config* config, double* coords, size_t capacity);
RCG_API void rcg_config_free(rcg_config* config);

/* Geometric graph at radius R; keeps its own copy of the configuration. */
RCG_API rcg_status rcg_graph_create(const rcg_config* config, double radius, rcg_graph** out);
RCG_API rcg_status rcg_graph_edge_count(const rcg_graph* graph, size_t* edges);
RCG_API rcg_status rcg_graph_degree(const rcg_graph* graph, size_t vertex, uint32_t* degree,
                                    uint32_t* degree_2r);
/* b_alpha, a_{alpha,r} and the majorant sum_x w(x) n_2R(x)^(M-1). */
RCG_API rcg_status rcg_graph_functionals(const rcg_graph* graph, double alpha, double r, int M,
                                         double* a, double* b, double* majorant);
RCG_API void rcg_graph_free(rcg_graph* graph);

/* Model from a description file ([pair], [single], [tempered]) or from the
   [model] section of a manifest, which may name such a file via "file". */
RCG_API rcg_status rcg_model_load(const char* path, rcg_model** out);
/* Ferromagnetic bilinear pair (J > 0 aligns) with V = a|u|^q + kappa|u|^2. */
RCG_API rcg_status rcg_model_create(double coupling, double range, double a, double q,
                                    double kappa, int spin_dim, double alpha, double p, int M,
                                    rcg_model** out);
/* *valid = 1 when every parameter inequality holds; otherwise the violated
 * inequalities are written to `message` (truncated to `capacity`). */
RCG_API rcg_status rcg_model_validate(const rcg_model* model, int* valid, char* message,
                                      size_t capacity);
RCG_API void rcg_model_free(rcg_model* model);

/* Marked configurations (points with spins). */
RCG_API rcg_status rcg_marked_load(const char* path, int expected_dim, int expected_spin_dim,
                                   rcg_marked** out);
RCG_API rcg_status rcg_marked_save(const rcg_marked* marked, const char* path, int hex_floats);
RCG_API rcg_status rcg_marked_create(int dim, int spin_dim, double radius, rcg_marked** out);
/* Appends a record; `spins` holds size(config) * spin_dim values. */
RCG_API rcg_status rcg_marked_append(rcg_marked* marked, const rcg_config* config,
                                     const double* spins, size_t spin_count);
RCG_API rcg_status rcg_marked_count(const rcg_marked* marked, size_t* count);
/* New configuration handle for record k plus its spins (capacity in doubles). */
RCG_API rcg_status rcg_marked_record(const rcg_marked* marked, size_t k, rcg_config** config,
                                     double* spins, size_t capacity);
RCG_API void rcg_marked_free(rcg_marked* marked);

typedef struct rcg_run_options {
  int has_seed;              /* nonzero: `seed` replaces study.seed */
  uint64_t seed;
  const char* out_dir;       /* NULL: study.output */
  int threads;               /* 0: study.threads */
  const char* const* overrides; /* "section.key=value" */
  size_t override_count;
} rcg_run_options;

/* Runs the study named by the manifest and writes its artifacts. */
RCG_API rcg_status rcg_run(const char* manifest_path, const rcg_run_options* options);

#ifdef __cplusplus
}
#endif

#endif
