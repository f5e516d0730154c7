#include "spin_model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace rcg {

SpinField::SpinField(std::size_t sites, int spin_dim, double fill)
    : m_(spin_dim), values_(sites * static_cast<std::size_t>(spin_dim), fill) {
  require(spin_dim >= 1, "spin field: spin dimension must be >= 1");
}

SpinField::SpinField(std::size_t sites, int spin_dim, std::vector<double> values)
    : m_(spin_dim), values_(std::move(values)) {
  require(spin_dim >= 1, "spin field: spin dimension must be >= 1");
  require(values_.size() == sites * static_cast<std::size_t>(spin_dim),
          "spin field: value count does not match sites x spin dimension");
}

bool SpinField::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
  return s;
}

double norm(std::span<const double> u) { return std::sqrt(dot(u, u)); }

PairPotential PairPotential::bilinear(double range, std::vector<double> matrix, int spin_dim,
                                      Profile profile) {
  require(std::isfinite(range) && range > 0.0, "pair potential: range must be > 0");
  require(spin_dim >= 1, "pair potential: spin dimension must be >= 1");
  require(matrix.size() == static_cast<std::size_t>(spin_dim * spin_dim),
          "pair potential: matrix must have m*m entries");
  for (int i = 0; i < spin_dim; ++i)
    for (int j = 0; j < spin_dim; ++j) {
      require(std::isfinite(matrix[i * spin_dim + j]), "pair potential: matrix entries must be finite");
      require(matrix[i * spin_dim + j] == matrix[j * spin_dim + i],
              "pair potential: matrix must be symmetric");
    }
  PairPotential W;
  W.kind_ = Kind::Bilinear;
  W.profile_ = profile;
  W.range_ = range;
  W.m_ = spin_dim;
  W.matrix_ = std::move(matrix);
  W.derive_growth();
  return W;
}

PairPotential PairPotential::ferromagnetic(double range, double coupling, int spin_dim,
                                           Profile profile) {
  std::vector<double> a(static_cast<std::size_t>(spin_dim) * spin_dim, 0.0);
  for (int i = 0; i < spin_dim; ++i) a[i * spin_dim + i] = -coupling;
  return bilinear(range, std::move(a), spin_dim, profile);
}

PairPotential PairPotential::polynomial(double range, std::vector<double> coefficients,
                                        int spin_dim, Profile profile) {
  require(std::isfinite(range) && range > 0.0, "pair potential: range must be > 0");
  require(spin_dim >= 1, "pair potential: spin dimension must be >= 1");
  require(!coefficients.empty(), "pair potential: polynomial needs coefficients");
  for (double c : coefficients) require(std::isfinite(c), "pair potential: coefficients must be finite");
  PairPotential W;
  W.kind_ = Kind::Polynomial;
  W.profile_ = profile;
  W.range_ = range;
  W.m_ = spin_dim;
  W.coefficients_ = std::move(coefficients);
  W.derive_growth();
  return W;
}

void PairPotential::derive_growth() {
  if (kind_ == Kind::Bilinear) {
    // |u.Av| <= ||A||_2 |u||v| <= ||A||_2 (|u|^2 + |v|^2) / 2
    Eigen::MatrixXd A(m_, m_);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) A(i, j) = matrix_[i * m_ + j];
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    const double spectral = es.eigenvalues().cwiseAbs().maxCoeff();
    growth_r_ = 2.0;
    growth_I_ = spectral / 2.0;
    growth_J_ = 0.0;
    return;
  }
  // |s|^k <= (|u|^2k + |v|^2k)/2 and |u|^2k <= |u|^2K + 1 for k <= K.
  const std::size_t K = coefficients_.size() - 1;
  growth_r_ = 2.0 * static_cast<double>(K);
  growth_I_ = 0.0;
  growth_J_ = std::abs(coefficients_[0]);
  for (std::size_t k = 1; k <= K; ++k) {
    growth_I_ += std::abs(coefficients_[k]) / 2.0;
    growth_J_ += std::abs(coefficients_[k]);
  }
}

bool PairPotential::vanishes() const {
  if (scale_ == 0.0) return true;
  const auto& c = kind_ == Kind::Bilinear ? matrix_ : coefficients_;
  for (double v : c)
    if (v != 0.0) return false;
  return true;
}

PairPotential PairPotential::scaled(double factor) const {
  require(std::isfinite(factor) && factor >= 0.0, "pair potential: scale must be >= 0");
  PairPotential W = *this;
  W.scale_ *= factor;
  return W;
}

double PairPotential::profile_value(double distance) const {
  if (!(distance <= range_)) return 0.0;
  return profile_ == Profile::Constant ? 1.0 : 1.0 - distance / range_;
}

double PairPotential::kernel(std::span<const double> u, std::span<const double> v) const {
  if (u.size() != static_cast<std::size_t>(m_) || v.size() != static_cast<std::size_t>(m_))
    fail(ErrorCode::DimensionMismatch, "pair potential: spin dimension mismatch");
  if (kind_ == Kind::Bilinear) {
    double s = 0.0;
    for (int i = 0; i < m_; ++i) {
      double row = 0.0;
      for (int j = 0; j < m_; ++j) row += matrix_[i * m_ + j] * v[j];
      s += u[i] * row;
    }
    return s;
  }
  const double s = dot(u, v);
  double acc = 0.0;
  for (std::size_t k = coefficients_.size(); k-- > 0;) acc = acc * s + coefficients_[k];
  return acc;
}

double PairPotential::energy(double distance, std::span<const double> u,
                             std::span<const double> v) const {
  const double j = profile_value(distance);
  if (j == 0.0) {
    if (u.size() != static_cast<std::size_t>(m_) || v.size() != static_cast<std::size_t>(m_))
      fail(ErrorCode::DimensionMismatch, "pair potential: spin dimension mismatch");
    return 0.0;
  }
  return scale_ * j * kernel(u, v);
}

SinglePotential::SinglePotential(double a, double q, double kappa, int spin_dim)
    : a_(a), q_(q), kappa_(kappa), m_(spin_dim) {
  require(std::isfinite(a) && a > 0.0, "single potential: leading coefficient must be > 0");
  require(std::isfinite(q) && q > 0.0, "single potential: exponent q must be > 0");
  require(std::isfinite(kappa), "single potential: quadratic coefficient must be finite");
  require(spin_dim >= 1, "single potential: spin dimension must be >= 1");
  if (kappa >= 0.0) {
    stab_a_ = a;
    stab_b_ = 0.0;
  } else if (q > 2.0) {
    // a t^q - |k| t^2 >= (a/2) t^q - b_V with b_V = max_t (|k| t^2 - (a/2) t^q).
    stab_a_ = a / 2.0;
    const double t = std::pow(4.0 * -kappa / (a * q), 1.0 / (q - 2.0));
    stab_b_ = -kappa * t * t - 0.5 * a * std::pow(t, q);
  } else if (q == 2.0) {
    require(a + kappa > 0.0, "single potential: a + kappa must be > 0 when q = 2");
    stab_a_ = a + kappa;
    stab_b_ = 0.0;
  } else {
    fail(ErrorCode::InvalidArgument, "single potential: negative quadratic term needs q >= 2");
  }
}

double SinglePotential::radial(double t) const {
  return scale_ * (a_ * std::pow(t, q_) + kappa_ * t * t);
}

SinglePotential SinglePotential::scaled(double factor) const {
  require(std::isfinite(factor) && factor > 0.0, "single potential: scale must be > 0");
  SinglePotential V = *this;
  V.scale_ *= factor;
  return V;
}

ModelParams ModelParams::with_beta(double beta) const {
  ModelParams out = *this;
  out.pair = pair.scaled(beta);
  out.single = single.scaled(beta);
  return out;
}

ValidityReport validate_params(const ModelParams& params) {
  ValidityReport rep;
  auto violate = [&](std::string ineq, std::string detail) {
    rep.valid = false;
    rep.violations.push_back({std::move(ineq), std::move(detail)});
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double q = params.single.exponent();
  const double p = params.p;
  const int M = params.M;
  rep.m_lower_bound = q > 2.0 ? 2.0 * q / (q - 2.0) : nan;
  rep.p_lower_bound = M > 2 ? 2.0 * M / (M - 2.0) : nan;
  rep.p_prime = p > 2.0 ? params.p_prime() : nan;

  if (!(q > 2.0))
    violate("q > 2", "single-spin growth exponent q = " + std::to_string(q) +
                         " (the case q = 2 is not covered)");
  if (M < 2) violate("M >= 2", "correlation order M = " + std::to_string(M));
  if (q > 2.0 && !(M > rep.m_lower_bound))
    violate("M > 2q/(q-2)", "M = " + std::to_string(M) + " but 2q/(q-2) = " +
                                std::to_string(rep.m_lower_bound));
  if (M > 2 && !(p >= rep.p_lower_bound))
    violate("p >= 2M/(M-2)", "p = " + std::to_string(p) + " but 2M/(M-2) = " +
                                 std::to_string(rep.p_lower_bound));
  if (M <= 2) violate("M > 2", "p window [2M/(M-2), q] undefined for M <= 2");
  if (!(p <= q)) violate("p <= q", "p = " + std::to_string(p) + ", q = " + std::to_string(q));
  if (!(params.alpha > 0.0) || !std::isfinite(params.alpha))
    violate("alpha > 0", "alpha = " + std::to_string(params.alpha));
  if (!(params.pair.growth_exponent() < p) && !params.pair.vanishes())
    violate("r < p", "pair growth exponent r = " + std::to_string(params.pair.growth_exponent()) +
                         " must be below p = " + std::to_string(p));
  if (!(params.single.stability_a() > 0.0))
    violate("a_V > 0", "single potential stability constant must be positive");
  if (params.pair.spin_dim() != params.single.spin_dim())
    violate("spin dimensions agree", "pair potential and single potential use different m");
  return rep;
}

double pair_energy(const PairPotential& W, std::span<const double> x, std::span<const double> y,
                   std::span<const double> u, std::span<const double> v) {
  require(x.size() == y.size(), "pair_energy: point dimension mismatch");
  double d2 = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) d2 += (x[a] - y[a]) * (x[a] - y[a]);
  return W.energy(std::sqrt(d2), u, v);
}

std::vector<long> eta_positions(std::size_t sites, std::span<const std::size_t> eta) {
  std::vector<long> pos(sites, -1);
  for (std::size_t k = 0; k < eta.size(); ++k) {
    require(eta[k] < sites, "volume: site index out of range");
    require(pos[eta[k]] < 0, "volume: repeated site index");
    pos[eta[k]] = static_cast<long>(k);
  }
  return pos;
}

double local_energy(const Configuration& config, const GeometricGraph& graph,
                    std::span<const std::size_t> eta, const SpinField& sigma, const SpinField& xi,
                    const PairPotential& W) {
  require(&graph.configuration() == &config || graph.configuration() == config,
          "local_energy: graph built on a different configuration");
  require(graph.radius() >= W.range(), "local_energy: graph radius below interaction range");
  if (sigma.size() != eta.size() || xi.size() != config.size())
    fail(ErrorCode::DimensionMismatch, "local_energy: spin field domain mismatch");
  if (sigma.spin_dim() != W.spin_dim() || xi.spin_dim() != W.spin_dim())
    fail(ErrorCode::DimensionMismatch, "local_energy: spin dimension mismatch");
  const auto pos = eta_positions(config.size(), eta);
  double e = 0.0;
  for (std::size_t k = 0; k < eta.size(); ++k) {
    const std::size_t x = eta[k];
    for (auto y : graph.neighbors(x)) {
      if (pos[y] >= 0) {
        if (y < x) continue;  // unordered pair inside eta counted once
        e += pair_energy(W, config.point(x), config.point(y), sigma.spin(k), sigma.spin(pos[y]));
      } else {
        e += pair_energy(W, config.point(x), config.point(y), sigma.spin(k), xi.spin(y));
      }
    }
  }
  return e;
}

double tempered_norm_pow(const Configuration& config, const SpinField& sigma,
                         const WeightParams& w, double p) {
  require(p >= 1.0, "tempered_norm: p must be >= 1");
  if (sigma.size() != config.size())
    fail(ErrorCode::DimensionMismatch, "tempered_norm: field does not cover the configuration");
  w.validate(config.dim());
  double s = 0.0;
  for (std::size_t x = 0; x < config.size(); ++x) {
    const double mag = norm(sigma.spin(x));
    if (mag == 0.0) continue;
    s += std::pow(mag, p) * w.weight(config.point(x));
  }
  return s;
}

double tempered_norm(const Configuration& config, const SpinField& sigma, const WeightParams& w,
                     double p) {
  return std::pow(tempered_norm_pow(config, sigma, w, p), 1.0 / p);
}

}  // namespace rcg
