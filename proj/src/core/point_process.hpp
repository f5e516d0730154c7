#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rcg {

// Axis-aligned box in R^n with free boundaries. `origin` anchors the
// temperedness weights w_alpha(x) = exp(-alpha |x - origin|).
class Window {
 public:
  Window() = default;
  // Origin defaults to the box center.
  Window(std::vector<double> lower, std::vector<double> upper);
  Window(std::vector<double> lower, std::vector<double> upper, std::vector<double> origin);

  int dim() const { return static_cast<int>(lower_.size()); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<double>& origin() const { return origin_; }
  double volume() const;
  bool contains(std::span<const double> x) const;
  double distance_to_origin(std::span<const double> x) const;

  bool operator==(const Window&) const = default;

 private:
  std::vector<double> lower_, upper_, origin_;
};

struct ProcessSpec {
  enum class Kind { Poisson, MaternHardcore };
  Kind kind = Kind::Poisson;
  double intensity = 1.0;
  double hardcore_radius = 0.0;

  void validate() const;
  std::string kind_name() const;
  static Kind parse_kind(const std::string& name);
};

struct Provenance {
  std::string sampler = "explicit";
  std::uint64_t seed = 0;
  ProcessSpec spec{};
};

// Finite simple point set inside a window; coordinates stored row-major.
class Configuration {
 public:
  Configuration() = default;
  // Validates that every point lies in the window and points are distinct.
  Configuration(Window window, std::vector<double> coords, Provenance provenance = {});

  const Window& window() const { return window_; }
  int dim() const { return window_.dim(); }
  std::size_t size() const { return dim() ? coords_.size() / dim() : 0; }
  bool empty() const { return coords_.empty(); }
  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim(), static_cast<std::size_t>(dim())};
  }
  const std::vector<double>& coords() const { return coords_; }
  const Provenance& provenance() const { return provenance_; }

  // Points lying in the closed box [lo, hi], as indices into this configuration.
  std::vector<std::size_t> indices_in_box(std::span<const double> lo,
                                          std::span<const double> hi) const;

  bool operator==(const Configuration& o) const {
    return window_ == o.window_ && coords_ == o.coords_;
  }

 private:
  Window window_;
  std::vector<double> coords_;
  Provenance provenance_;
};

Configuration sample_poisson(const Window& window, double intensity, std::uint64_t seed);
Configuration sample_matern_hardcore(const Window& window, double intensity,
                                     double radius, std::uint64_t seed);
Configuration sample_process(const ProcessSpec& spec, const Window& window, std::uint64_t seed);

// Matern type-II rule: point i survives iff no other point within `radius`
// carries a strictly smaller mark.
std::vector<bool> matern_survivors(const Configuration& proposal,
                                   std::span<const double> marks, double radius);

struct CorrelationEstimate {
  int order = 1;
  double cell_size = 0.0;
  std::vector<std::size_t> cells_per_axis;
  std::vector<double> cell_volumes;
  // order 1: one entry per cell. order 2: row-major cells x cells matrix.
  std::vector<double> estimates;
  std::vector<double> standard_errors;
  double sup_estimate = 0.0;
  std::size_t sample_count = 0;
  // Volume-weighted pooled estimate over all cells (order 1) or over all
  // off-diagonal cell pairs (order 2), with its standard error.
  double pooled = 0.0;
  double pooled_se = 0.0;
  // Order 2 only: pooled estimate over diagonal cells.
  double pooled_diagonal = 0.0;
  double pooled_diagonal_se = 0.0;

  std::size_t cell_count() const { return cell_volumes.size(); }
};

CorrelationEstimate estimate_correlation(std::span<const Configuration> samples, int order,
                                         double cell_size);

void save_configuration(std::ostream& out, const Configuration& config, bool hex = false);
Configuration load_configuration(std::istream& in);

}  // namespace rcg
