#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "geoheat/cutoff.hpp"
#include "geoheat/geometry.hpp"
#include "geoheat/rng.hpp"

namespace geoheat {

/// Tuple of positive step durations subdividing a time interval.
class Partition {
 public:
  explicit Partition(std::vector<double> steps) : steps_(std::move(steps)) {
    if (steps_.empty()) throw DomainError("partition must be non-empty");
    sigma_.reserve(steps_.size() + 1);
    sigma_.push_back(0.0);
    for (double t : steps_) {
      if (!(t > 0.0)) throw DomainError("partition steps must be positive");
      sigma_.push_back(sigma_.back() + t);
    }
  }

  static Partition uniform(double total, int r) {
    if (r < 1) throw DomainError("partition needs at least one step");
    return Partition(std::vector<double>(size_t(r), total / r));
  }

  /// Final step pinned to t_last, the rest uniform on what remains.
  static Partition with_pinned_last(double total, int r, double t_last) {
    if (r < 2 || !(t_last > 0.0) || !(t_last < total))
      throw DomainError("pinned-last partition needs r >= 2, 0 < t_last < total");
    std::vector<double> s(size_t(r - 1), (total - t_last) / (r - 1));
    s.push_back(t_last);
    return Partition(std::move(s));
  }

  int r() const { return static_cast<int>(steps_.size()); }
  double step(int j) const { return steps_[size_t(j)]; }          // j in [0,r)
  double sigma(int j) const { return sigma_[size_t(j)]; }          // j in [0,r]
  double length() const { return sigma_.back(); }
  double mesh() const {
    double m = 0.0;
    for (double t : steps_) m = std::max(m, t);
    return m;
  }
  const std::vector<double>& steps() const { return steps_; }

  Partition concat(const Partition& tail) const {
    std::vector<double> s = steps_;
    s.insert(s.end(), tail.steps_.begin(), tail.steps_.end());
    return Partition(std::move(s));
  }

 private:
  std::vector<double> steps_;
  std::vector<double> sigma_;
};

/// A path that restricts to the unique shortest constant-speed geodesic on
/// each partition subinterval. Construction rejects vertex pairs on each
/// other's cut locus.
class GeodesicPolygon {
 public:
  GeodesicPolygon(Manifold manifold, Partition partition,
                  std::vector<Point> vertices)
      : m_(std::move(manifold)),
        t_(std::move(partition)),
        verts_(std::move(vertices)) {
    if (static_cast<int>(verts_.size()) != t_.r() + 1)
      throw DomainError("polygon needs r+1 vertices");
    for (int j = 1; j <= t_.r(); ++j)
      (void)m_.log_map(verts_[size_t(j - 1)], verts_[size_t(j)]);
  }

  const Manifold& manifold() const { return m_; }
  const Partition& partition() const { return t_; }
  const Point& vertex(int j) const { return verts_[size_t(j)]; }
  int segments() const { return t_.r(); }

  /// gamma(s); exact at the vertex times sigma_j.
  Point at(double s) const {
    if (s < 0.0 || s > t_.length())
      throw DomainError("polygon parameter out of range");
    int j = 1;
    while (j < t_.r() && s > t_.sigma(j)) ++j;
    if (s == t_.sigma(j - 1)) return verts_[size_t(j - 1)];
    if (s == t_.sigma(j)) return verts_[size_t(j)];
    return m_.geodesic_point(verts_[size_t(j - 1)], verts_[size_t(j)],
                             t_.sigma(j - 1), t_.sigma(j), s);
  }

  bool is_closed(double tol) const {
    return m_.distance(verts_.front(), verts_.back()) <= tol;
  }

 private:
  Manifold m_;
  Partition t_;
  std::vector<Point> verts_;
};

/// E = 1/2 sum d(x_{j-1},x_j)^2 / t_j. Zero exactly when all vertices agree.
inline double energy(const GeodesicPolygon& poly) {
  double e = 0.0;
  const Partition& t = poly.partition();
  for (int j = 1; j <= t.r(); ++j) {
    const double d = poly.manifold().distance(poly.vertex(j - 1), poly.vertex(j));
    e += 0.5 * d * d / t.step(j - 1);
  }
  return e;
}

/// Gaussian normalizer prod_j (4 pi t_j)^{m/2}.
inline double normalizer(const Partition& t, int dim) {
  double z = 1.0;
  for (double tj : t.steps()) z *= std::pow(4.0 * kPi * tj, 0.5 * dim);
  return z;
}

/// Product of the cutoff over all hops: prod_j chi(d(x_{j-1},x_j)^2).
inline double cutoff_product(const GeodesicPolygon& poly, const CutoffChi& chi) {
  double p = 1.0;
  for (int j = 1; j <= poly.segments(); ++j) {
    const double d =
        poly.manifold().distance(poly.vertex(j - 1), poly.vertex(j));
    p *= chi(d * d);
    if (p == 0.0) break;
  }
  return p;
}

/// prod_j mu(x_{j-1}, x_j)^{(lambda-1)/2}; identically 1 at lambda = 1.
inline double measure_product(const GeodesicPolygon& poly, double lambda) {
  const double expo = 0.5 * (lambda - 1.0);
  if (expo == 0.0) return 1.0;
  double p = 1.0;
  for (int j = 1; j <= poly.segments(); ++j)
    p *= std::pow(
        poly.manifold().volume_distortion(poly.vertex(j - 1), poly.vertex(j)),
        expo);
  return p;
}

struct SampledPolygon {
  GeodesicPolygon polygon;
  double log_weight;  // 0 for live paths, -inf for zero-weight paths
  bool alive;
};

/// Draws a start-pinned polygon: step j takes a centered Gaussian with
/// per-coordinate variance 2 t_j in the tangent space at the current vertex.
/// Steps reaching the injectivity radius mark the path zero-weight; remaining
/// vertices stay put so the polygon is still well formed.
inline SampledPolygon sample_pinned_start(const Manifold& m, const Point& x0,
                                          const Partition& t,
                                          const CounterRng& rng) {
  const int dim = m.dim();
  const double injrad = m.injectivity_radius();
  std::vector<Point> verts;
  verts.reserve(size_t(t.r()) + 1);
  verts.push_back(x0);
  bool alive = true;
  Point cur = x0;
  for (int j = 0; j < t.r(); ++j) {
    if (!alive) {
      verts.push_back(cur);
      continue;
    }
    const double sd = std::sqrt(2.0 * t.step(j));
    TangentVector xi;
    xi.base = cur;
    xi.comps = SmallVec::zero(dim);
    // fixed counter layout: 4 draw slots per step
    for (int i = 0; i < dim; i += 2) {
      double n0, n1;
      rng.normal_pair(uint64_t(j) * 4 + uint64_t(i) / 2, n0, n1);
      xi.comps[i] = sd * n0;
      if (i + 1 < dim) xi.comps[i + 1] = sd * n1;
    }
    if (xi.norm() >= injrad) {
      alive = false;
      verts.push_back(cur);
      continue;
    }
    cur = m.exp_map(cur, xi);
    verts.push_back(cur);
  }
  return SampledPolygon{
      GeodesicPolygon(m, t, std::move(verts)),
      alive ? 0.0 : -std::numeric_limits<double>::infinity(), alive};
}

}  // namespace geoheat
