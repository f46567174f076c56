#include <catch2/catch.hpp>

#include "geoheat/polygon.hpp"
#include "test_helpers.hpp"

using namespace geoheat;
using geoheat::testing::random_point;

TEST_CASE("partition bookkeeping") {
  const Partition t({0.1, 0.3, 0.2});
  CHECK(t.r() == 3);
  CHECK(t.length() == Approx(0.6));
  CHECK(t.mesh() == Approx(0.3));
  CHECK(t.sigma(0) == 0.0);
  CHECK(t.sigma(2) == Approx(0.4));
  CHECK(t.sigma(3) == Approx(t.length()));
  CHECK_THROWS_AS(Partition({0.1, -0.2}), DomainError);
  CHECK_THROWS_AS(Partition(std::vector<double>{}), DomainError);

  const Partition u = Partition::uniform(1.0, 4);
  CHECK(u.mesh() == Approx(0.25));
  const Partition p = Partition::with_pinned_last(1.0, 5, 0.04);
  CHECK(p.step(4) == Approx(0.04));
  CHECK(p.step(0) == Approx(0.24));
  CHECK(p.length() == Approx(1.0));
}

TEST_CASE("polygon evaluation hits vertices exactly") {
  const Manifold s = Manifold::sphere(1.0);
  const CounterRng rng(41, 0);
  std::vector<Point> verts{random_point(s, rng, 0)};
  const Partition t({0.2, 0.5, 0.1});
  for (int j = 1; j <= 3; ++j) {
    // short hops keep consecutive vertices well off the cut locus
    TangentVector xi;
    xi.base = verts.back();
    xi.comps = SmallVec{2, {0.4 * rng.uniform(10 * uint64_t(j)),
                            0.3 * rng.uniform(10 * uint64_t(j) + 1), 0}};
    verts.push_back(s.exp_map(verts.back(), xi));
  }
  const GeodesicPolygon poly(s, t, verts);
  for (int j = 0; j <= 3; ++j)
    CHECK(s.distance(poly.at(t.sigma(j)), verts[size_t(j)]) == 0.0);
  // interior points stay on the segment geodesic
  const Point mid = poly.at(0.45);
  CHECK(s.distance(mid, s.geodesic_point(verts[1], verts[2], 0.2, 0.7, 0.45)) <=
        1e-14);
}

TEST_CASE("polygon constructor rejects cut-locus hops") {
  const Manifold s = Manifold::sphere(1.0);
  CHECK_THROWS_AS(GeodesicPolygon(s, Partition({1.0}),
                                  {s.make_point({0, 0, 1}),
                                   s.make_point({0, 0, -1})}),
                  CutLocusError);
}

TEST_CASE("energy: constant, two hops, reparametrization") {
  const Manifold t2 = Manifold::flat_torus({4.0, 4.0});
  const Point p = t2.make_point({0.3, 0.3});
  const GeodesicPolygon constant(t2, Partition({0.25, 0.25}), {p, p, p});
  CHECK(energy(constant) == 0.0);

  const GeodesicPolygon hops(
      t2, Partition({0.25, 0.25}),
      {t2.make_point({0.0, 0.0}), t2.make_point({1.0, 0.0}),
       t2.make_point({1.0, 0.0})});
  CHECK(energy(hops) == Approx(2.0));

  const GeodesicPolygon slower(
      t2, Partition({0.5, 0.5}),
      {t2.make_point({0.0, 0.0}), t2.make_point({1.0, 0.0}),
       t2.make_point({1.0, 0.0})});
  CHECK(energy(slower) == Approx(1.0));
}

TEST_CASE("normalizer: value and multiplicativity") {
  CHECK(normalizer(Partition({1.0 / (4.0 * kPi)}), 1) == Approx(1.0));
  CHECK(normalizer(Partition({0.25, 0.25}), 2) == Approx(kPi * kPi));
  const Partition a({0.1, 0.2});
  const Partition b({0.3});
  CHECK(normalizer(a.concat(b), 2) ==
        Approx(normalizer(a, 2) * normalizer(b, 2)));
}

TEST_CASE("cutoff product over hops") {
  const Manifold c = Manifold::circle(1.0);
  const CutoffChi chi = CutoffChi::for_injectivity_radius(c.injectivity_radius());
  const Point p = c.make_point({1.0});
  CHECK(cutoff_product(GeodesicPolygon(c, Partition({0.1, 0.1}), {p, p, p}),
                       chi) == 1.0);

  // one hop past half the injectivity radius kills the product
  const GeodesicPolygon far(
      c, Partition({0.1}), {c.make_point({0.0}), c.make_point({kPi / 2 + 0.1})});
  CHECK(cutoff_product(far, chi) == 0.0);

  // single mid-transition hop equals the scalar cutoff value
  const double mid_u = 0.5 * (chi.plateau_end + chi.support_end);
  const double d = std::sqrt(mid_u);
  const GeodesicPolygon single(c, Partition({0.1}),
                               {c.make_point({0.0}), c.make_point({d})});
  CHECK(cutoff_product(single, chi) == Approx(chi(mid_u)));
  CHECK(chi(mid_u) == Approx(0.5));
  CHECK(cutoff_chi(chi, 0.0) == 1.0);
  CHECK(cutoff_chi(chi, chi.support_end) == 0.0);
}

TEST_CASE("measure product") {
  const Manifold t2 = Manifold::flat_torus({1.0, 1.0});
  const GeodesicPolygon flat(
      t2, Partition({0.1, 0.1}),
      {t2.make_point({0.0, 0.0}), t2.make_point({0.2, 0.1}),
       t2.make_point({0.3, 0.4})});
  CHECK(measure_product(flat, 1.0) == 1.0);
  CHECK(measure_product(flat, -1.0) == Approx(1.0));
  CHECK(measure_product(flat, 0.35) == Approx(1.0));

  const Manifold s = Manifold::sphere(1.0);
  const GeodesicPolygon quarter(
      s, Partition({0.1}), {s.make_point({0, 0, 1}), s.make_point({1, 0, 0})});
  CHECK(measure_product(quarter, 1.0) == 1.0);
  CHECK(measure_product(quarter, -1.0) == Approx(kPi / 2));
}

TEST_CASE("sampler: per-coordinate variance matches 2t") {
  const Manifold t2 = Manifold::flat_torus({4.0, 4.0});
  const Point x0 = t2.make_point({2.0, 2.0});
  const Partition t({0.02});
  const long n = 100000;
  double s1 = 0.0, s2 = 0.0;
  for (long p = 0; p < n; ++p) {
    const auto sample = sample_pinned_start(t2, x0, t, CounterRng(5, uint64_t(p)));
    REQUIRE(sample.alive);
    const TangentVector hop = t2.log_map(x0, sample.polygon.vertex(1));
    s1 += hop.comps[0];
    s2 += hop.comps[0] * hop.comps[0];
  }
  const double var = (s2 - s1 * s1 / n) / (n - 1.0);
  const double expected = 2.0 * 0.02;
  // variance of the sample variance for Gaussians: 2 var^2 / n
  const double stderr3 = 3.0 * expected * std::sqrt(2.0 / n);
  CHECK(std::abs(var - expected) <= stderr3);
}

TEST_CASE("sampler: short steps concentrate near the start") {
  const Manifold s = Manifold::sphere(1.0);
  const Point x0 = s.make_point({0, 0, 1});
  for (double tj : {1e-2, 1e-4, 1e-6}) {
    double worst = 0.0;
    for (long p = 0; p < 200; ++p) {
      const auto sample =
          sample_pinned_start(s, x0, Partition({tj}), CounterRng(6, uint64_t(p)));
      worst = std::max(worst, s.distance(x0, sample.polygon.vertex(1)));
    }
    CHECK(worst <= 8.0 * std::sqrt(2.0 * tj));
  }
}

TEST_CASE("sampler: zero-weight fraction matches the chi-square tail") {
  const Manifold s = Manifold::sphere(1.0);
  const Point x0 = s.make_point({0, 0, 1});
  const Partition t({1.0});
  const long n = 100000;
  long dead = 0;
  for (long p = 0; p < n; ++p)
    if (!sample_pinned_start(s, x0, t, CounterRng(7, uint64_t(p))).alive) ++dead;
  // |xi|^2 / (2 t) ~ chi^2_2, so P(|xi| >= pi) = exp(-pi^2 / 4t)
  const double expect = std::exp(-kPi * kPi / 4.0);
  const double frac = double(dead) / double(n);
  const double stderr3 = 3.0 * std::sqrt(expect * (1.0 - expect) / n);
  CHECK(std::abs(frac - expect) <= stderr3);
}

TEST_CASE("sampled polygon energy equals the Gaussian quadratic form") {
  const Manifold t2 = Manifold::flat_torus({2.0, 2.0});
  const Point x0 = t2.make_point({1.0, 1.0});
  const Partition t({0.01, 0.02, 0.015});
  for (long p = 0; p < 200; ++p) {
    const auto sample = sample_pinned_start(t2, x0, t, CounterRng(8, uint64_t(p)));
    if (!sample.alive) continue;
    double quad = 0.0;
    for (int j = 1; j <= t.r(); ++j) {
      const TangentVector hop =
          t2.log_map(sample.polygon.vertex(j - 1), sample.polygon.vertex(j));
      quad += 0.5 * hop.comps.dot(hop.comps) / t.step(j - 1);
    }
    CHECK(energy(sample.polygon) == Approx(quad).epsilon(1e-12));
  }
}

TEST_CASE("vertices determine the polygon (off the cut locus)") {
  const Manifold s = Manifold::sphere(1.0);
  const CounterRng rng(9, 3);
  const Partition t({0.1, 0.1});
  const Point a = random_point(s, rng, 0);
  const auto sample = sample_pinned_start(s, a, t, rng);
  const GeodesicPolygon& poly = sample.polygon;
  const GeodesicPolygon rebuilt(
      s, t, {poly.vertex(0), poly.vertex(1), poly.vertex(2)});
  for (double u : {0.05, 0.1, 0.17})
    CHECK(s.distance(poly.at(u), rebuilt.at(u)) <= 1e-14);
}
