#pragma once

#include "geoheat/geometry.hpp"
#include "geoheat/rng.hpp"

namespace geoheat::testing {

/// Deterministic pseudo-random point on the manifold.
inline Point random_point(const Manifold& m, const CounterRng& rng,
                          uint64_t counter) {
  switch (m.kind()) {
    case ManifoldKind::Circle:
      return m.make_point({2.0 * kPi * rng.uniform(counter * 8)});
    case ManifoldKind::FlatTorus: {
      std::array<double, 3> c{0, 0, 0};
      for (int i = 0; i < m.dim(); ++i)
        c[size_t(i)] = m.period(i) * rng.uniform(counter * 8 + uint64_t(i));
      return m.make_point(std::span<const double>(c.data(), size_t(m.dim())));
    }
    case ManifoldKind::Sphere2: {
      // inverse-CDF uniform on the sphere
      const double z = 2.0 * rng.uniform(counter * 8) - 1.0;
      const double phi = 2.0 * kPi * rng.uniform(counter * 8 + 1);
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      return m.make_point({m.radius() * rho * std::cos(phi),
                           m.radius() * rho * std::sin(phi), m.radius() * z});
    }
  }
  return Point{};
}

/// Deterministic random tangent vector with |xi| <= max_len.
inline TangentVector random_tangent(const Manifold& m, const Point& base,
                                    const CounterRng& rng, uint64_t counter,
                                    double max_len) {
  TangentVector xi;
  xi.base = base;
  xi.comps = SmallVec::zero(m.dim());
  double nsq = 0.0;
  for (int i = 0; i < m.dim(); ++i) {
    xi.comps[i] = 2.0 * rng.uniform(counter * 8 + 4 + uint64_t(i)) - 1.0;
    nsq += xi.comps[i] * xi.comps[i];
  }
  const double len = max_len * rng.uniform(counter * 8 + 7);
  const double scale = len / std::max(1e-300, std::sqrt(nsq));
  xi.comps = xi.comps * scale;
  return xi;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x,
                           const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace geoheat::testing
