#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "error.hpp"
#include "geometric_graph.hpp"
#include "point_process.hpp"
#include "rng.hpp"

using namespace rcg;

namespace {

double dist(const Configuration& c, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (int a = 0; a < c.dim(); ++a) s += (c.point(i)[a] - c.point(j)[a]) * (c.point(i)[a] - c.point(j)[a]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("cell-list adjacency equals all pairs") {
  Stream rng(4);
  for (int t = 0; t < 30; ++t) {
    const int dim = 1 + t % 3;
    std::vector<double> lo(dim, 0.0), hi(dim, 3.0 + t % 4);
    const auto c = sample_poisson(Window(lo, hi), dim == 1 ? 20.0 : (dim == 2 ? 5.0 : 2.0), 100 + t);
    const double R = 0.2 + rng.uniform();
    const GeometricGraph g(c, R);
    std::size_t edges = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      std::uint32_t deg = 0, deg2 = 0;
      for (std::size_t j = 0; j < c.size(); ++j) {
        if (i == j) continue;
        const double d = dist(c, i, j);
        REQUIRE(g.adjacent(i, j) == (d <= R));
        deg += d <= R;
        deg2 += d <= 2 * R;
      }
      CHECK(g.degree(i) == deg);
      CHECK(g.degree_2r(i) == deg2);
      edges += deg;
    }
    CHECK(g.edge_count() * 2 == edges);
  }
}

TEST_CASE("closed ball and no self loops") {
  const Configuration c(Window({0.0, 0.0}, {4.0, 1.0}), {0.5, 0.5, 1.5, 0.5, 3.5, 0.5});
  const GeometricGraph g(c, 1.0);
  CHECK(g.adjacent(0, 1));
  CHECK(!g.adjacent(1, 2));
  CHECK(!g.adjacent(0, 0));
  CHECK(g.degree_2r(1) == 2);
  const Configuration empty(Window({0.0}, {1.0}), {});
  const GeometricGraph ge(empty, 1.0);
  CHECK(ge.edge_count() == 0);
  CHECK_THROWS_AS(GeometricGraph(c, 0.0), Error);
}

TEST_CASE("functionals against direct sums") {
  const auto c = sample_poisson(Window({0.0, 0.0}, {6.0, 6.0}), 1.5, 8);
  const auto w = WeightParams::from_window(0.7, c.window());
  const GeometricGraph g(c, 1.0);
  double b = 0, a = 0, maj = 0;
  for (std::size_t x = 0; x < c.size(); ++x) {
    const double d = std::hypot(c.point(x)[0] - 3.0, c.point(x)[1] - 3.0);
    const double wx = std::exp(-0.7 * d);
    b += wx;
    for (std::size_t y = 0; y < c.size(); ++y)
      if (y != x && dist(c, x, y) <= 1.0) a += wx * std::pow(double(g.degree(x)) * g.degree(y), 1.5);
    maj += wx * std::pow(double(g.degree_2r(x)), 5);
  }
  CHECK(functional_b(c, w) == doctest::Approx(b).epsilon(1e-12));
  CHECK(functional_a(g, w, 1.5) == doctest::Approx(a).epsilon(1e-12));
  CHECK(functional_majorant(g, w, 6) == doctest::Approx(maj).epsilon(1e-12));
  const auto f = compute_functionals(g, w, 2.0, 6);
  CHECK(f.a <= f.majorant);
}

TEST_CASE("expected b_alpha matches the radial integral") {
  // E b_alpha = z * int exp(-alpha |x|) dx = z 2 pi / alpha^2 on R^2; the
  // window [-15,15]^2 with alpha = 1 truncates below 1e-5.
  const Window w({-15.0, -15.0}, {15.0, 15.0});
  const auto wp = WeightParams::from_window(1.0, w);
  const int draws = 400;
  double s = 0, s2 = 0;
  for (int i = 0; i < draws; ++i) {
    const double b = functional_b(sample_poisson(w, 1.0, 300 + i), wp);
    s += b;
    s2 += b * b;
  }
  const double mean = s / draws, se = std::sqrt((s2 / draws - mean * mean) / draws);
  CHECK(std::abs(mean - 2.0 * std::numbers::pi) < 4.0 * se);
}

TEST_CASE("integrability study is reproducible and thread independent") {
  const ProcessSpec spec{ProcessSpec::Kind::Poisson, 1.0, 0.0};
  const Window w({0.0, 0.0}, {8.0, 8.0});
  const auto wp = WeightParams::from_window(1.0, w);
  const auto s1 = integrability_study(spec, w, 1.0, wp, 2.0, 6, 40, 5, 1);
  const auto s2 = integrability_study(spec, w, 1.0, wp, 2.0, 6, 40, 5, 3);
  CHECK(s1.a.mean == s2.a.mean);
  CHECK(s1.majorant.max == s2.majorant.max);
  CHECK(s1.r_within_hypothesis);
  CHECK(!integrability_study(spec, w, 1.0, wp, 2.5, 6, 2, 5).r_within_hypothesis);
}

TEST_CASE("graph export lists each edge once") {
  const Configuration c(Window({0.0, 0.0}, {3.0, 1.0}), {0.5, 0.5, 1.0, 0.5, 2.5, 0.5});
  const GeometricGraph g(c, 1.0);
  std::ostringstream out;
  export_graph(out, g);
  CHECK(out.str() == "# edges 1\n0 1\n# degrees 3\n0 1 2\n1 1 2\n2 0 2\n");
}
