#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "point_process.hpp"

namespace rcg {

struct WeightParams {
  double alpha = 1.0;
  std::vector<double> origin;

  // Origin taken from the window.
  static WeightParams from_window(double alpha, const Window& window);
  void validate(int dim) const;
  double weight(std::span<const double> x) const;
};

// Radius-R interaction graph: x ~ y iff 0 < |x - y| <= R (closed ball).
// Also carries the degree at radius 2R. Immutable after construction.
class GeometricGraph {
 public:
  GeometricGraph(const Configuration& config, double radius);

  const Configuration& configuration() const { return *config_; }
  double radius() const { return radius_; }
  std::size_t vertex_count() const { return degree_.size(); }
  std::size_t edge_count() const;

  std::span<const std::uint32_t> neighbors(std::size_t v) const {
    return {adj_.data() + offset_[v], offset_[v + 1] - offset_[v]};
  }
  std::uint32_t degree(std::size_t v) const { return degree_[v]; }
  std::uint32_t degree_2r(std::size_t v) const { return degree_2r_[v]; }
  const std::vector<std::uint32_t>& degrees() const { return degree_; }
  const std::vector<std::uint32_t>& degrees_2r() const { return degree_2r_; }
  bool adjacent(std::size_t u, std::size_t v) const;

 private:
  const Configuration* config_;
  double radius_;
  std::vector<std::size_t> offset_;
  std::vector<std::uint32_t> adj_;  // sorted per vertex
  std::vector<std::uint32_t> degree_;
  std::vector<std::uint32_t> degree_2r_;
};

// b_alpha = sum_x w_alpha(x).
double functional_b(const Configuration& config, const WeightParams& w);

// a_{alpha,r} in the ordered-pair convention:
//   sum_x w_alpha(x) sum_{y ~ x} [n_R(x) n_R(y)]^r.
double functional_a(const GeometricGraph& graph, const WeightParams& w, double r);

// sum_x w_alpha(x) n_2R(x)^(M-1), the bound on a_{alpha, M/2-1}.
double functional_majorant(const GeometricGraph& graph, const WeightParams& w, int M);

struct GraphFunctionals {
  double alpha = 0.0, r = 0.0;
  int M = 0;
  double a = 0.0, b = 0.0, majorant = 0.0;
};

GraphFunctionals compute_functionals(const GeometricGraph& graph, const WeightParams& w, double r,
                                     int M);

struct MomentSummary {
  double mean = 0.0, variance = 0.0, standard_error = 0.0;
  double q50 = 0.0, q90 = 0.0, q99 = 0.0, max = 0.0;
};

MomentSummary summarize(std::vector<double> values);

struct IntegrabilitySummary {
  std::size_t samples = 0;
  double r = 0.0;
  int M = 0;
  bool r_within_hypothesis = true;  // r <= M/2 - 1
  MomentSummary a, b, majorant, vertex_count;
};

IntegrabilitySummary integrability_study(const ProcessSpec& spec, const Window& window,
                                         double radius, const WeightParams& w, double r, int M,
                                         std::size_t num_samples, std::uint64_t seed,
                                         int threads = 1);

// Edge list ("i j" with i < j) followed by a degree table ("i n_R n_2R").
void export_graph(std::ostream& out, const GeometricGraph& graph);

}  // namespace rcg
