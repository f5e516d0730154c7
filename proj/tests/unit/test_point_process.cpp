#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "error.hpp"
#include "point_process.hpp"
#include "rng.hpp"

using namespace rcg;

namespace {

Window unit_square(double side) { return Window({0.0, 0.0}, {side, side}); }

// Independent retention integral z * int_0^1 exp(-z pi d^2 t) dt by Simpson.
double matern_intensity_oracle(double z, double d) {
  const int n = 2000;
  const double c = z * std::numbers::pi * d * d;
  double s = 1.0 + std::exp(-c);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * std::exp(-c * i / n);
  return z * s / (3.0 * n);
}

}  // namespace

TEST_CASE("window validation and origin") {
  CHECK_THROWS_AS(Window({0.0}, {0.0}), Error);
  CHECK_THROWS_AS(Window({0.0, 0.0}, {1.0}), Error);
  CHECK_THROWS_AS(Window({0.0}, {1.0}, {2.0}), Error);
  const Window w({0.0, 2.0}, {4.0, 6.0});
  CHECK(w.origin() == std::vector<double>{2.0, 4.0});
  CHECK(w.volume() == doctest::Approx(16.0));
  const std::vector<double> corner{4.0, 6.0};
  CHECK(w.contains(corner));
}

TEST_CASE("configuration rejects duplicates and outside points") {
  const Window w = unit_square(1.0);
  CHECK_THROWS_AS(Configuration(w, {0.5, 0.5, 0.5, 0.5}), Error);
  CHECK_THROWS_AS(Configuration(w, {1.5, 0.5}), Error);
  CHECK_THROWS_AS(Configuration(w, {0.5}), Error);
  const Configuration c(w, {0.1, 0.1, 0.9, 0.9});
  CHECK(c.size() == 2);
  const std::vector<double> lo{0.0, 0.0}, hi{0.5, 0.5};
  CHECK(c.indices_in_box(lo, hi) == std::vector<std::size_t>{0});
}

TEST_CASE("poisson sampler: determinism and count law") {
  const Window w = unit_square(5.0);
  CHECK(sample_poisson(w, 1.0, 3) == sample_poisson(w, 1.0, 3));
  CHECK(!(sample_poisson(w, 1.0, 3) == sample_poisson(w, 1.0, 4)));
  CHECK_THROWS_AS(sample_poisson(w, 0.0, 1), Error);
  const int draws = 4000;
  double s = 0, s2 = 0;
  for (int i = 0; i < draws; ++i) {
    const double n = static_cast<double>(sample_poisson(w, 2.0, 1000 + i).size());
    s += n;
    s2 += n * n;
  }
  const double mean = s / draws, var = s2 / draws - mean * mean;
  CHECK(std::abs(mean - 50.0) < 4.0 * std::sqrt(50.0 / draws));
  CHECK(std::abs(var / 50.0 - 1.0) < 0.1);
}

TEST_CASE("matern survivors match the brute-force rule") {
  Stream rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const Configuration prop = sample_poisson(unit_square(4.0), 3.0, 500 + trial);
    std::vector<double> marks(prop.size());
    for (auto& m : marks) m = rng.uniform();
    const double d = 0.3;
    const auto keep = matern_survivors(prop, marks, d);
    for (std::size_t i = 0; i < prop.size(); ++i) {
      bool survives = true;
      for (std::size_t j = 0; j < prop.size(); ++j) {
        if (i == j) continue;
        const double dx = prop.point(i)[0] - prop.point(j)[0], dy = prop.point(i)[1] - prop.point(j)[1];
        if (std::sqrt(dx * dx + dy * dy) <= d && marks[j] < marks[i]) survives = false;
      }
      CHECK(keep[i] == survives);
    }
  }
}

TEST_CASE("matern hardcore: spacing and retained intensity") {
  const Window w = unit_square(10.0);
  const double z = 1.0, d = 0.5;
  const int draws = 400;
  double s = 0, s2 = 0;
  const std::vector<double> lo{d, d}, hi{10.0 - d, 10.0 - d};
  for (int i = 0; i < draws; ++i) {
    const auto c = sample_matern_hardcore(w, z, d, 9000 + i);
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = a + 1; b < c.size(); ++b) {
        const double dx = c.point(a)[0] - c.point(b)[0], dy = c.point(a)[1] - c.point(b)[1];
        REQUIRE(dx * dx + dy * dy > d * d);
      }
    const double n = static_cast<double>(c.indices_in_box(lo, hi).size());
    s += n;
    s2 += n * n;
  }
  const double area = (10.0 - 2 * d) * (10.0 - 2 * d);
  const double mean = s / draws, se = std::sqrt((s2 / draws - mean * mean) / draws);
  const double expected = matern_intensity_oracle(z, d) * area;
  CHECK(std::abs(mean - expected) < 4.0 * se);
  CHECK(matern_intensity_oracle(z, d) ==
        doctest::Approx((1.0 - std::exp(-z * std::numbers::pi * d * d)) / (std::numbers::pi * d * d)));
}

TEST_CASE("correlation estimator on fixed configurations") {
  const Window w = unit_square(2.0);
  // Two points in cell 0, one in cell 3.
  const Configuration c(w, {0.2, 0.2, 0.7, 0.4, 1.5, 1.5});
  const std::vector<Configuration> samples{c, c};
  const auto k1 = estimate_correlation(samples, 1, 1.0);
  REQUIRE(k1.cell_count() == 4);
  CHECK(k1.estimates[0] == 2.0);
  CHECK(k1.estimates[3] == 1.0);
  CHECK(k1.standard_errors[0] == 0.0);
  CHECK(k1.pooled == doctest::Approx(3.0 / 4.0));
  const auto k2 = estimate_correlation(samples, 2, 1.0);
  CHECK(k2.estimates[0 * 4 + 0] == 2.0);  // 2*1 ordered pairs
  CHECK(k2.estimates[0 * 4 + 3] == 2.0);
  CHECK(k2.estimates[3 * 4 + 3] == 0.0);
  // (N(N-1) - sum N_c(N_c-1)) / (V^2 - sum V_c^2) = (6 - 2) / (16 - 4)
  CHECK(k2.pooled == doctest::Approx(4.0 / 12.0));
  // Clipped last cell.
  const auto clipped = estimate_correlation(std::vector<Configuration>{Configuration(Window({0.0}, {2.5}), {2.4})}, 1, 1.0);
  REQUIRE(clipped.cell_count() == 3);
  CHECK(clipped.cell_volumes[2] == doctest::Approx(0.5));
  CHECK(clipped.estimates[2] == doctest::Approx(2.0));
}

TEST_CASE("configuration files round-trip bit-exactly") {
  const auto c = sample_matern_hardcore(Window({-1.0, 0.0, 0.0}, {1.0, 2.0, 3.0}), 4.0, 0.2, 12);
  for (bool hex : {false, true}) {
    std::stringstream ss;
    save_configuration(ss, c, hex);
    const auto back = load_configuration(ss);
    CHECK(back == c);
    CHECK(back.provenance().seed == 12);
    CHECK(back.provenance().sampler == c.provenance().sampler);
    std::stringstream again;
    save_configuration(again, back, hex);
    std::stringstream first;
    save_configuration(first, c, hex);
    CHECK(again.str() == first.str());
  }
  std::stringstream bad("# rcgibbs configuration v1\ndimension 2\nlower 0 0 0\n");
  CHECK_THROWS_AS(load_configuration(bad), Error);
  std::stringstream corrupt("not a header\n");
  CHECK_THROWS_AS(load_configuration(corrupt), Error);
}
