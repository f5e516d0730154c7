#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geometric_graph.hpp"
#include "local_gibbs.hpp"
#include "point_process.hpp"
#include "spin_model.hpp"
#include "stats.hpp"

namespace rcg {

// Measurable section x -> u(x) used as boundary condition.
//   zero:     u = 0
//   constant: u = c * direction
//   radial:   u = c * exp(beta |x - origin|) * direction
struct BoundarySection {
  enum class Rule { Zero, Constant, Radial };
  Rule rule = Rule::Zero;
  double c = 0.0;
  double beta = 0.0;
  std::vector<double> direction;  // unit vector in R^m; empty means e_1

  void validate(int spin_dim) const;
  std::string rule_name() const;
  static Rule parse_rule(const std::string& name);
  BoundarySection scaled(double factor) const;
};

// `origin` is the point |x| is measured from (normally the weight origin).
SpinField build_section(const BoundarySection& section, const Configuration& config, int spin_dim,
                        std::span<const double> origin);

// Concentric boxes around the window origin; box k has half-extents
// ratio^(k - count) times those of the window, so the last box is the window.
class VolumeSequence {
 public:
  VolumeSequence(const Window& window, std::size_t count, double ratio = 1.3);

  std::size_t size() const { return lower_.size(); }
  std::span<const double> lower(std::size_t k) const { return lower_[k]; }
  std::span<const double> upper(std::size_t k) const { return upper_[k]; }
  Window box(std::size_t k) const;
  double ratio() const { return ratio_; }

 private:
  std::vector<std::vector<double>> lower_, upper_;
  std::vector<double> origin_;
  double ratio_;
};

// Points of `config` inside `box`, as a configuration on that box.
Configuration restrict_to(const Configuration& config, const Window& box);

struct VolumeMoment {
  std::size_t volume = 0;
  std::size_t sites = 0;
  double xi_scale = 1.0;
  Estimate moment;        // E ||sigma||^p_{alpha,p}
  Estimate exp_moment;    // E exp(lambda ||sigma||^p)
  double ess_fraction = 0.0;
  bool exp_moment_trusted = false;
  double hill_index = 0.0;
  double acceptance = 0.0;
  // Regressors: b_alpha and a_{alpha,p'} of the configuration inside the
  // volume, and ||xi||^p over the frozen complement.
  double b = 0.0, a = 0.0, xi_norm = 0.0;
};

struct MomentReport {
  double p = 0.0, p_prime = 0.0, lambda = 0.0;
  std::vector<VolumeMoment> volumes;  // the nested sequence at xi scale 1
  std::vector<VolumeMoment> design;   // regression design points
  TrendTest trend;
  double C1 = 0.0, C2 = 0.0, C3 = 0.0;  // nonnegative fit on the design
  double r_squared = 0.0;
  double xi_stand_in = 0.0;  // max estimated exp moment (fitted stand-in for Xi(lambda))
};

struct MomentStudyConfig {
  double lambda = -1.0;  // < 0: 0.1 * a_V
  std::vector<std::size_t> design_volumes;  // empty: every volume
  std::vector<double> design_scales{1.0};
  double ess_threshold = 0.1;  // minimum ESS / n for the exp moment
  int threads = 1;
};

MomentReport moment_study(const Configuration& config, const VolumeSequence& volumes,
                          const BoundarySection& section, const ModelParams& model,
                          const SamplerConfig& sampler, const MomentStudyConfig& study);

struct MarkedRecord {
  Configuration config;
  SpinField sigma;
};

struct AnnealedReport {
  std::size_t draws = 0;
  std::vector<double> phi;  // b_alpha(gamma) + ||sigma||^p per draw
  MomentSummary phi_summary;
  MomentSummary b_summary;
  MomentSummary norm_summary;
  std::vector<MarkedRecord> records;
};

// gamma ~ process on the window, sigma ~ kernel on the points of `volume`
// given the section outside; one retained field per draw.
AnnealedReport annealed_sample(const ProcessSpec& process, const Window& window,
                               const Window& volume, const BoundarySection& section,
                               const ModelParams& model, const SamplerConfig& sampler,
                               std::size_t num_disorder, std::uint64_t seed, int threads = 1);

struct CesaroReport {
  std::vector<std::string> observables;
  std::vector<std::size_t> volume_sites;
  // [observable][volume]
  std::vector<std::vector<double>> g, g_se, running, running_se;
  std::vector<double> tail_fluctuation;  // max - min over the last third of running means
  std::vector<double> tail_se;           // largest running-mean SE over the same range
};

// Library observables on the spins inside `obs_box`:
//   tanh   mean of tanh(sigma_1(x))
//   gauss  mean of exp(-|sigma(x)|^2)
//   pair   tanh(sigma(x) . sigma(y)) for the first adjacent pair
//   const  1
std::vector<std::string> cesaro_observable_names();

CesaroReport cesaro_study(const Configuration& config, const VolumeSequence& volumes,
                          const Window& obs_box, const BoundarySection& section,
                          const std::vector<std::string>& observables, const ModelParams& model,
                          const SamplerConfig& sampler, int threads = 1);

}  // namespace rcg
