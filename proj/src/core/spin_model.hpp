#pragma once

#include <span>
#include <string>
#include <vector>

#include "geometric_graph.hpp"
#include "point_process.hpp"

namespace rcg {

// Spins sigma(x) in R^m for x in a point set, stored row-major.
class SpinField {
 public:
  SpinField() = default;
  SpinField(std::size_t sites, int spin_dim, double fill = 0.0);
  SpinField(std::size_t sites, int spin_dim, std::vector<double> values);

  std::size_t size() const { return m_ ? values_.size() / m_ : 0; }
  int spin_dim() const { return m_; }
  std::span<const double> spin(std::size_t i) const {
    return {values_.data() + i * m_, static_cast<std::size_t>(m_)};
  }
  std::span<double> spin(std::size_t i) {
    return {values_.data() + i * m_, static_cast<std::size_t>(m_)};
  }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  bool all_finite() const;

  bool operator==(const SpinField&) const = default;

 private:
  int m_ = 0;
  std::vector<double> values_;
};

double norm(std::span<const double> u);
double dot(std::span<const double> u, std::span<const double> v);

// Finite-range pair potential W_xy(u, v) = j(|x-y|) * K(u, v), with
// j supported on [0, R] and sup|j| = 1.
//   bilinear:   K(u, v) = u . A v, A symmetric m x m
//   polynomial: K(u, v) = sum_k c_k (u . v)^k
// Coupling J > 0 in `ferromagnetic` means A = -J I (alignment lowers energy).
class PairPotential {
 public:
  enum class Kind { Bilinear, Polynomial };
  enum class Profile { Constant, Linear };

  static PairPotential bilinear(double range, std::vector<double> matrix, int spin_dim,
                                Profile profile = Profile::Constant);
  static PairPotential ferromagnetic(double range, double coupling, int spin_dim,
                                     Profile profile = Profile::Constant);
  static PairPotential polynomial(double range, std::vector<double> coefficients, int spin_dim,
                                  Profile profile = Profile::Constant);
  static PairPotential none(double range, int spin_dim) { return ferromagnetic(range, 0.0, spin_dim); }

  Kind kind() const { return kind_; }
  Profile profile() const { return profile_; }
  double range() const { return range_; }
  int spin_dim() const { return m_; }
  const std::vector<double>& matrix() const { return matrix_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  double scale() const { return scale_; }
  bool vanishes() const;

  // Growth constants of |W(u,v)| <= I_W (|u|^r + |v|^r) + J_W.
  double growth_exponent() const { return growth_r_; }
  double growth_I() const { return growth_I_ * scale_; }
  double growth_J() const { return growth_J_ * scale_; }

  PairPotential scaled(double factor) const;

  double profile_value(double distance) const;
  double kernel(std::span<const double> u, std::span<const double> v) const;
  double energy(double distance, std::span<const double> u, std::span<const double> v) const;

 private:
  PairPotential() = default;
  void derive_growth();

  Kind kind_ = Kind::Bilinear;
  Profile profile_ = Profile::Constant;
  double range_ = 1.0;
  int m_ = 1;
  std::vector<double> matrix_;
  std::vector<double> coefficients_;
  double scale_ = 1.0;
  double growth_r_ = 2.0, growth_I_ = 0.0, growth_J_ = 0.0;
};

// V(u) = scale * (a |u|^q + kappa |u|^2). Stability constants are derived so
// that V(u) >= a_V |u|^q - b_V holds everywhere.
class SinglePotential {
 public:
  SinglePotential(double a, double q, double kappa = 0.0, int spin_dim = 1);

  double operator()(std::span<const double> u) const { return radial(norm(u)); }
  double radial(double t) const;

  double leading() const { return a_; }
  double exponent() const { return q_; }
  double quadratic() const { return kappa_; }
  int spin_dim() const { return m_; }
  double scale() const { return scale_; }
  double stability_a() const { return stab_a_ * scale_; }
  double stability_b() const { return stab_b_ * scale_; }

  SinglePotential scaled(double factor) const;

 private:
  double a_, q_, kappa_;
  int m_;
  double scale_ = 1.0;
  double stab_a_ = 0.0, stab_b_ = 0.0;
};

struct Violation {
  std::string inequality;
  std::string detail;
};

struct ValidityReport {
  bool valid = true;
  std::vector<Violation> violations;
  // Derived quantities (NaN when undefined).
  double p_prime = 0.0;
  double m_lower_bound = 0.0;  // 2q/(q-2)
  double p_lower_bound = 0.0;  // 2M/(M-2)
};

struct ModelParams {
  PairPotential pair = PairPotential::none(1.0, 1);
  SinglePotential single{1.0, 4.0};
  double alpha = 1.0;
  double p = 3.0;
  int M = 6;

  double p_prime() const { return 2.0 / (p - 2.0); }
  int spin_dim() const { return single.spin_dim(); }
  // Multiplies both V and W (inverse temperature).
  ModelParams with_beta(double beta) const;
};

ValidityReport validate_params(const ModelParams& params);

double pair_energy(const PairPotential& W, std::span<const double> x, std::span<const double> y,
                   std::span<const double> u, std::span<const double> v);

// Membership table: position of each configuration index in eta, or -1.
std::vector<long> eta_positions(std::size_t sites, std::span<const std::size_t> eta);

// E_eta(sigma | xi): pairs inside eta once each, plus eta-to-complement pairs
// with the complement held at xi. `sigma` has one spin per eta entry; `xi`
// covers the whole configuration. Non-adjacent pairs are skipped via `graph`,
// whose radius must be at least the interaction range.
double local_energy(const Configuration& config, const GeometricGraph& graph,
                    std::span<const std::size_t> eta, const SpinField& sigma, const SpinField& xi,
                    const PairPotential& W);

// ||sigma||_{alpha,p}^p = sum_x |sigma(x)|^p w_alpha(x).
double tempered_norm_pow(const Configuration& config, const SpinField& sigma,
                         const WeightParams& w, double p);
double tempered_norm(const Configuration& config, const SpinField& sigma, const WeightParams& w,
                     double p);

}  // namespace rcg
