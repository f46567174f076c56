#include <catch2/catch.hpp>

#include "geoheat/geometry.hpp"
#include "geoheat/oracle.hpp"
#include "test_helpers.hpp"

using namespace geoheat;
using geoheat::testing::loglog_slope;
using geoheat::testing::random_point;
using geoheat::testing::random_tangent;

namespace {
const std::vector<Manifold> kModels = {
    Manifold::circle(2.0), Manifold::flat_torus({1.0, 1.5}),
    Manifold::sphere(1.0)};
}

TEST_CASE("manifold invariants: injectivity radius and volume") {
  CHECK(Manifold::circle(2.0).injectivity_radius() == Approx(2.0 * kPi));
  CHECK(Manifold::circle(2.0).volume() == Approx(4.0 * kPi));
  const Manifold t = Manifold::flat_torus({1.0, 1.5});
  CHECK(t.injectivity_radius() == Approx(0.5));
  CHECK(t.volume() == Approx(1.5));
  CHECK(Manifold::sphere(1.0).injectivity_radius() == Approx(kPi));
  CHECK(Manifold::sphere(1.0).volume() == Approx(4.0 * kPi));
}

TEST_CASE("distance: wraparound, quarter circle, half circumference") {
  const Manifold torus = Manifold::flat_torus({1.0});
  CHECK(torus.distance(torus.make_point({0.1}), torus.make_point({0.9})) ==
        Approx(0.2));

  const Manifold sphere = Manifold::sphere(1.0);
  const Point north = sphere.make_point({0, 0, 1});
  const Point equator = sphere.make_point({1, 0, 0});
  CHECK(sphere.distance(north, equator) == Approx(kPi / 2));

  const Manifold circle = Manifold::circle(2.0);
  CHECK(circle.distance(circle.make_point({0.0}), circle.make_point({kPi})) ==
        Approx(2.0 * kPi));
}

TEST_CASE("distance is symmetric with triangle inequality") {
  for (const Manifold& m : kModels) {
    const CounterRng rng(7, 0);
    for (uint64_t k = 0; k < 50; ++k) {
      const Point a = random_point(m, rng, 3 * k);
      const Point b = random_point(m, rng, 3 * k + 1);
      const Point c = random_point(m, rng, 3 * k + 2);
      CHECK(m.distance(a, b) == Approx(m.distance(b, a)).margin(1e-13));
      CHECK(m.distance(a, c) <= m.distance(a, b) + m.distance(b, c) + 1e-12);
      CHECK(m.distance(a, a) == 0.0);
    }
  }
}

TEST_CASE("exp_map: zero vector, flat translation, great circle") {
  for (const Manifold& m : kModels) {
    const Point x = random_point(m, CounterRng(11, 0), 1);
    TangentVector zero;
    zero.base = x;
    zero.comps = SmallVec::zero(m.dim());
    CHECK(m.distance(m.exp_map(x, zero), x) == Approx(0.0).margin(1e-14));
  }

  const Manifold torus = Manifold::flat_torus({1.0, 1.5});
  const Point x = torus.make_point({0.9, 0.2});
  TangentVector xi;
  xi.base = x;
  xi.comps = SmallVec{2, {0.3, -0.4, 0}};
  const Point y = torus.exp_map(x, xi);
  CHECK(y.c[0] == Approx(0.2).margin(1e-14));          // 1.2 mod 1
  CHECK(y.c[1] == Approx(1.3).margin(1e-14));          // -0.2 mod 1.5

  const Manifold sphere = Manifold::sphere(1.0);
  const Point north = sphere.make_point({0, 0, 1});
  TangentVector quarter;
  quarter.base = north;
  quarter.comps = SmallVec{2, {kPi / 2, 0, 0}};
  const Point reached = sphere.exp_map(north, quarter);
  CHECK(std::abs(reached.c[2]) < 1e-12);  // lands on the equator
  CHECK(sphere.distance(north, reached) == Approx(kPi / 2));
}

TEST_CASE("log_map: inverse of exp inside the injectivity radius") {
  for (const Manifold& m : kModels) {
    const CounterRng rng(13, 1);
    for (uint64_t k = 0; k < 60; ++k) {
      const Point x = random_point(m, rng, 2 * k);
      const TangentVector xi =
          random_tangent(m, x, rng, 2 * k + 1, 0.9 * m.injectivity_radius());
      const Point y = m.exp_map(x, xi);
      const TangentVector back = m.log_map(x, y);
      CHECK((back.comps - xi.comps).norm() <= 1e-9);
      CHECK(back.norm() == Approx(m.distance(x, y)).margin(1e-10));
      CHECK(m.distance(m.exp_map(x, back), y) <= 1e-10);
    }
  }
}

TEST_CASE("log_map of a point at itself is the zero vector") {
  for (const Manifold& m : kModels) {
    const Point x = random_point(m, CounterRng(51, 9), 4);
    CHECK(m.log_map(x, x).norm() == 0.0);
  }
}

TEST_CASE("log_map cut-locus errors") {
  const Manifold sphere = Manifold::sphere(1.0);
  CHECK_THROWS_AS(
      sphere.log_map(sphere.make_point({0, 0, 1}), sphere.make_point({0, 0, -1})),
      CutLocusError);
  const Manifold torus = Manifold::flat_torus({1.0, 1.5});
  CHECK_THROWS_AS(
      torus.log_map(torus.make_point({0.1, 0.2}), torus.make_point({0.6, 0.2})),
      CutLocusError);
  const Manifold circle = Manifold::circle(1.0);
  CHECK_THROWS_AS(
      circle.log_map(circle.make_point({0.0}), circle.make_point({kPi})),
      CutLocusError);
}

TEST_CASE("geodesic_point: endpoints, flat midpoint, great-circle bisection") {
  const Manifold torus = Manifold::flat_torus({1.0});
  const Point a = torus.make_point({0.9});
  const Point b = torus.make_point({0.1});
  CHECK(torus.geodesic_point(a, b, 0, 1, 0).c[0] == Approx(0.9));
  CHECK(torus.geodesic_point(a, b, 0, 1, 1).c[0] == Approx(0.1));
  CHECK(torus.geodesic_point(a, b, 0, 1, 0.5).c[0] == Approx(0.0).margin(1e-14));

  const Manifold sphere = Manifold::sphere(1.0);
  const Point north = sphere.make_point({0, 0, 1});
  const Point equator = sphere.make_point({1, 0, 0});
  const Point mid = sphere.geodesic_point(north, equator, 0, 1, 0.5);
  CHECK(std::acos(mid.c[2]) == Approx(kPi / 4));

  CHECK_THROWS_AS(sphere.geodesic_point(north, equator, 0, 1, 1.5), DomainError);
}

TEST_CASE("geodesic speed is constant") {
  for (const Manifold& m : kModels) {
    const CounterRng rng(17, 2);
    for (uint64_t k = 0; k < 20; ++k) {
      const Point x = random_point(m, rng, 2 * k);
      const TangentVector xi =
          random_tangent(m, x, rng, 2 * k + 1, 0.9 * m.injectivity_radius());
      const Point y = m.exp_map(x, xi);
      const double d = m.distance(x, y);
      for (double s : {0.0, 0.25, 0.5, 0.75, 1.0})
        CHECK(m.distance(x, m.geodesic_point(x, y, 0, 1, s)) ==
              Approx(s * d).margin(1e-9));
    }
  }
}

TEST_CASE("volume distortion: diagonal, flat, quarter sphere") {
  for (const Manifold& m : kModels) {
    const Point x = random_point(m, CounterRng(19, 3), 5);
    CHECK(m.volume_distortion(x, x) == Approx(1.0));
  }
  const Manifold torus = Manifold::flat_torus({1.0, 1.5});
  CHECK(torus.volume_distortion(torus.make_point({0.1, 0.2}),
                                torus.make_point({0.4, 0.9})) == 1.0);

  const Manifold sphere = Manifold::sphere(1.0);
  const Point north = sphere.make_point({0, 0, 1});
  const Point equator = sphere.make_point({1, 0, 0});
  CHECK(sphere.volume_distortion(north, equator) == Approx(2.0 / kPi));
  // independent finite-difference route
  CHECK(oracle::jacobian_mu_oracle(sphere, north, equator) ==
        Approx(2.0 / kPi).margin(1e-6));
}

TEST_CASE("volume distortion matches the finite-difference Jacobian") {
  for (const Manifold& m : kModels) {
    const CounterRng rng(23, 4);
    for (uint64_t k = 0; k < 15; ++k) {
      const Point x = random_point(m, rng, 2 * k);
      const TangentVector xi =
          random_tangent(m, x, rng, 2 * k + 1, 0.8 * m.injectivity_radius());
      const Point y = m.exp_map(x, xi);
      CHECK(m.volume_distortion(y, x) ==
            Approx(oracle::jacobian_mu_oracle(m, y, x)).margin(1e-6));
    }
  }
}

TEST_CASE("scalar curvature: 0, 0, 2/r^2") {
  CHECK(Manifold::flat_torus({1.0, 1.0}).scalar_curvature() == 0.0);
  CHECK(Manifold::circle(3.0).scalar_curvature() == 0.0);
  CHECK(Manifold::sphere(1.0).scalar_curvature() == Approx(2.0));
  CHECK(Manifold::sphere(2.0).scalar_curvature() == Approx(0.5));
}

TEST_CASE("sphere mu Taylor expansion: 1 - ric(xi,xi)/6 + O(|xi|^3)") {
  const Manifold sphere = Manifold::sphere(1.0);
  const Point y = sphere.make_point({0.3, -0.5, 0.9});
  std::vector<double> lens, errs;
  for (double len = 1e-3; len <= 0.1 + 1e-12; len *= std::sqrt(10.0)) {
    TangentVector xi;
    xi.base = y;
    xi.comps = SmallVec{2, {len * 0.8, len * 0.6, 0}};
    const double ric = xi.comps.dot(xi.comps);  // ric = g/r^2 on S^2(r)
    const double mu = sphere.volume_distortion(sphere.exp_map(y, xi), y);
    lens.push_back(len);
    errs.push_back(std::abs(mu - (1.0 - ric / 6.0)));
  }
  CHECK(loglog_slope(lens, errs) >= 2.7);
}

TEST_CASE("grids: weights, total volume") {
  const Manifold circle = Manifold::circle(1.0);
  const GridQuadrature gc = circle.make_grid(4);
  REQUIRE(gc.size() == 4);
  for (double w : gc.weights) CHECK(w == Approx(kPi / 2));

  const Manifold torus = Manifold::flat_torus({1.0, 1.0});
  const GridQuadrature gt = torus.make_grid(8);
  REQUIRE(gt.size() == 64);
  for (double w : gt.weights) CHECK(w == Approx(1.0 / 64));

  const Manifold sphere = Manifold::sphere(1.0);
  const GridQuadrature gs = sphere.make_grid(1000);
  CHECK(gs.total_weight() == Approx(4.0 * kPi).epsilon(1e-12));

  for (const Manifold& m : kModels)
    CHECK(m.make_grid(24).total_weight() == Approx(m.volume()).epsilon(1e-6));

  CHECK_THROWS_AS(circle.make_grid(1), DomainError);
}

TEST_CASE("sphere quadrature converges on a first-degree harmonic square") {
  const Manifold sphere = Manifold::sphere(1.0);
  std::vector<double> ns, errs;
  for (int n : {64, 256, 1024, 4096}) {
    const GridQuadrature g = sphere.make_grid(n);
    double integral = 0.0;
    for (size_t i = 0; i < g.size(); ++i) {
      const double y10 = std::sqrt(3.0 / (4.0 * kPi)) * g.nodes[i].c[2];
      integral += g.weights[i] * y10 * y10;
    }
    ns.push_back(double(n));
    errs.push_back(std::abs(integral - 1.0) + 1e-18);
  }
  CHECK(loglog_slope(ns, errs) <= -0.5);  // observed rate at least N^{-1/2}
}

TEST_CASE("point canonicalization") {
  const Manifold sphere = Manifold::sphere(2.0);
  const Point p = sphere.make_point({10.0, -3.0, 4.0});
  CHECK(v3_norm(p.c) == Approx(2.0).epsilon(1e-12));

  const Manifold torus = Manifold::flat_torus({1.0, 1.5});
  const Point q = torus.make_point({-0.25, 3.2});
  CHECK(q.c[0] == Approx(0.75));
  CHECK(q.c[1] == Approx(0.2).margin(1e-12));

  // sphere tangent vectors stay orthogonal to the base point when embedded
  const Point x = sphere.make_point({0.5, 1.2, -0.7});
  TangentVector xi;
  xi.base = x;
  xi.comps = SmallVec{2, {0.4, -0.9, 0}};
  CHECK(std::abs(v3_dot(sphere.embed_tangent(xi), x.c)) <= 1e-12 * 2.0);
}
