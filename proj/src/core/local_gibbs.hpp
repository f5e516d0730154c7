#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "point_process.hpp"
#include "spin_model.hpp"

namespace rcg {

// Finite volume eta (indices into the configuration) with boundary field xi
// over the whole configuration. Values of xi on eta seed the chain.
struct KernelSpec {
  Configuration config;
  std::vector<std::size_t> eta;
  SpinField xi;
  ModelParams model;
  // Admits parameter sets outside the validated window (oracle tests only).
  bool allow_unvalidated = false;

  void check() const;
};

struct SamplerConfig {
  std::size_t burn_in = 1000;
  std::size_t sweeps = 10000;  // retained sweeps before thinning
  std::size_t thinning = 1;
  std::vector<double> proposal_sd{1.0};  // per spin component, or one value for all
  std::size_t adapt_window = 50;
  double target_acceptance = 0.3;
  std::size_t batches = 50;
  bool store_fields = true;
  std::uint64_t seed = 0;

  void validate(int spin_dim) const;
  std::size_t retained() const { return sweeps / thinning; }
};

// Observable on the spins of eta: argument is |eta| * m values, row-major.
struct Observable {
  std::string name;
  std::function<double(std::span<const double>)> fn;
};

struct Estimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

// Batch-means standard error; `batches` is clamped to the trace length.
Estimate batch_means(std::span<const double> trace, std::size_t batches);

struct KernelSampleSet {
  std::size_t eta_size = 0;
  int spin_dim = 1;
  std::size_t retained = 0;
  std::vector<double> fields;  // retained x |eta| x m when stored
  double acceptance = 0.0;     // post burn-in
  std::vector<double> site_acceptance;
  std::vector<double> scales_after_burn_in;
  std::vector<double> scales_final;
  std::vector<std::string> observable_names;
  std::vector<std::vector<double>> traces;
  std::size_t batches = 50;

  std::span<const double> field(std::size_t k) const {
    const std::size_t w = eta_size * static_cast<std::size_t>(spin_dim);
    return {fields.data() + k * w, w};
  }
  bool scales_frozen() const { return scales_after_burn_in == scales_final; }
  Estimate estimate(std::size_t observable) const;
};

KernelSampleSet mcmc_sample(const KernelSpec& spec, const SamplerConfig& cfg,
                            const std::vector<Observable>& observables = {});

// Uniform trapezoid rule on [-u_max, u_max] with an odd node count.
struct QuadratureGrid {
  double u_max = 3.0;
  int nodes = 201;

  void validate() const;
  double step() const { return 2.0 * u_max / (nodes - 1); }
  double node(int i) const { return -u_max + step() * i; }
  double weight(int i) const { return (i == 0 || i == nodes - 1) ? 0.5 * step() : step(); }
};

// Relative mass of exp(-V) outside [-u_max, u_max] for a one-component spin.
double tail_mass(const SinglePotential& V, double u_max);
constexpr double kTailTolerance = 1e-12;

// Normalized kernel weights at the tensor grid nodes (m = 1, |eta| <= 3),
// stored lexicographically with the first eta site varying slowest.
class GridDistribution {
 public:
  GridDistribution(QuadratureGrid grid, std::size_t sites, std::vector<double> prob)
      : grid_(grid), sites_(sites), prob_(std::move(prob)) {}

  const QuadratureGrid& grid() const { return grid_; }
  std::size_t sites() const { return sites_; }
  const std::vector<double>& probabilities() const { return prob_; }
  double expect(const std::function<double(std::span<const double>)>& f) const;
  std::vector<double> marginal(std::size_t site) const;

 private:
  QuadratureGrid grid_;
  std::size_t sites_;
  std::vector<double> prob_;
};

GridDistribution quadrature_kernel(const KernelSpec& spec, const QuadratureGrid& grid);

struct DlrObservable {
  std::string name;
  // Argument: spins of eta2 in eta2 order.
  std::function<double(std::span<const double>)> fn;
};

struct DlrResult {
  double max_residual = 0.0;
  std::vector<std::string> names;
  std::vector<double> composed;  // int Pi_eta1(f|sigma) Pi_eta2(dsigma|xi)
  std::vector<double> direct;    // Pi_eta2(f|xi)
};

// Grid-level check of Pi_eta2 Pi_eta1 = Pi_eta2 for eta1 subset of eta2.
// The inner kernel is assembled from its own volume and boundary, not from
// the outer one. Memory is O(G^|eta2 \ eta1|).
DlrResult dlr_consistency_check(const Configuration& config, std::span<const std::size_t> eta1,
                                std::span<const std::size_t> eta2, const SpinField& xi,
                                const ModelParams& model, const QuadratureGrid& grid,
                                const std::vector<DlrObservable>& observables,
                                bool allow_unvalidated = false);

// Observables f(u) applied to site `position` of eta2: u, u^2, tanh u.
std::vector<DlrObservable> standard_dlr_observables(std::size_t position);

struct DetailedBalanceReport {
  double max_violation = 0.0;           // max |pi_i P_ij - pi_j P_ji|
  double stationarity_residual = 0.0;   // max |(pi P)_j - pi_j|
  double max_row_sum_error = 0.0;
  double max_asymmetry = 0.0;           // max |P_ij - P_ji|
  std::size_t states = 0;
};

// Builds the transition matrix of the grid-discretized single-site
// Metropolis chain: symmetric proposal q_ij ~ exp(-(u_i-u_j)^2 / 2s^2)
// normalized by the largest row sum, unused mass kept in place.
DetailedBalanceReport detailed_balance_check(std::span<const double> target,
                                             std::span<const double> nodes, double proposal_sd);
DetailedBalanceReport detailed_balance_check(const SinglePotential& V, const QuadratureGrid& grid,
                                             double proposal_sd);

}  // namespace rcg
