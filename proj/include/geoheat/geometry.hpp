#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "geoheat/common.hpp"

namespace geoheat {

enum class ManifoldKind { Circle, FlatTorus, Sphere2 };

/// A point on a model manifold. Interpretation depends on the manifold kind:
/// circle stores the angle in [0,2pi), the torus a representative in
/// [0,L_1)x...x[0,L_m), the sphere the embedded 3-vector of length r.
struct Point {
  std::array<double, 3> c{0.0, 0.0, 0.0};
};

struct TangentVector {
  Point base;
  SmallVec comps;  // components in the orthonormal frame at `base`

  double norm() const { return comps.norm(); }
};

/// Manifold nodes with positive quadrature weights; sum of weights equals the
/// total volume.
struct GridQuadrature {
  std::vector<Point> nodes;
  std::vector<double> weights;

  size_t size() const { return nodes.size(); }
  double total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

/// One of the three model spaces: circle S^1(r), flat torus R^m/(L_1 Z x ... x
/// L_m Z), or the round 2-sphere of radius r. All geometric primitives are in
/// closed form. Every member is pure; instances are safe to share across
/// threads.
class Manifold {
 public:
  static Manifold circle(double radius) {
    require_positive(radius);
    Manifold m;
    m.kind_ = ManifoldKind::Circle;
    m.radius_ = radius;
    m.dim_ = 1;
    return m;
  }

  static Manifold flat_torus(std::span<const double> periods) {
    if (periods.empty() || periods.size() > kMaxDim)
      throw DomainError("torus dimension must be 1..3");
    Manifold m;
    m.kind_ = ManifoldKind::FlatTorus;
    m.dim_ = static_cast<int>(periods.size());
    for (int i = 0; i < m.dim_; ++i) {
      require_positive(periods[size_t(i)]);
      m.periods_[size_t(i)] = periods[size_t(i)];
    }
    return m;
  }
  static Manifold flat_torus(std::initializer_list<double> periods) {
    return flat_torus(std::span<const double>(periods.begin(), periods.size()));
  }

  static Manifold sphere(double radius) {
    require_positive(radius);
    Manifold m;
    m.kind_ = ManifoldKind::Sphere2;
    m.radius_ = radius;
    m.dim_ = 2;
    return m;
  }

  ManifoldKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double radius() const { return radius_; }
  double period(int i) const { return periods_[size_t(i)]; }

  double injectivity_radius() const {
    switch (kind_) {
      case ManifoldKind::Circle:
        return kPi * radius_;
      case ManifoldKind::FlatTorus: {
        double m = periods_[0];
        for (int i = 1; i < dim_; ++i) m = std::min(m, periods_[size_t(i)]);
        return 0.5 * m;
      }
      case ManifoldKind::Sphere2:
        return kPi * radius_;
    }
    return 0.0;
  }

  double volume() const {
    switch (kind_) {
      case ManifoldKind::Circle:
        return 2.0 * kPi * radius_;
      case ManifoldKind::FlatTorus: {
        double v = 1.0;
        for (int i = 0; i < dim_; ++i) v *= periods_[size_t(i)];
        return v;
      }
      case ManifoldKind::Sphere2:
        return 4.0 * kPi * radius_ * radius_;
    }
    return 0.0;
  }

  /// Scalar curvature; constant on each model space.
  double scalar_curvature(const Point&) const { return scalar_curvature(); }
  double scalar_curvature() const {
    return kind_ == ManifoldKind::Sphere2 ? 2.0 / (radius_ * radius_) : 0.0;
  }

  /// Builds a point from raw coordinates and canonicalizes it (angle wrap,
  /// torus representative, sphere renormalization).
  Point make_point(std::span<const double> coords) const {
    Point p;
    switch (kind_) {
      case ManifoldKind::Circle:
        p.c[0] = coords[0];
        break;
      case ManifoldKind::FlatTorus:
        for (int i = 0; i < dim_; ++i) p.c[size_t(i)] = coords[size_t(i)];
        break;
      case ManifoldKind::Sphere2:
        p.c = {coords[0], coords[1], coords[2]};
        break;
    }
    return canonical(p);
  }
  Point make_point(std::initializer_list<double> coords) const {
    return make_point(std::span<const double>(coords.begin(), coords.size()));
  }

  Point canonical(Point p) const {
    switch (kind_) {
      case ManifoldKind::Circle:
        p.c[0] = wrap_to(p.c[0], 2.0 * kPi);
        break;
      case ManifoldKind::FlatTorus:
        for (int i = 0; i < dim_; ++i)
          p.c[size_t(i)] = wrap_to(p.c[size_t(i)], periods_[size_t(i)]);
        break;
      case ManifoldKind::Sphere2: {
        const double n = v3_norm(p.c);
        p.c = v3_scale(p.c, radius_ / n);
        break;
      }
    }
    return p;
  }

  /// Geodesic distance. Symmetric, zero on the diagonal, triangle inequality.
  double distance(const Point& x, const Point& y) const {
    switch (kind_) {
      case ManifoldKind::Circle:
        return radius_ * std::abs(wrap_signed(y.c[0] - x.c[0], 2.0 * kPi));
      case ManifoldKind::FlatTorus: {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) {
          const double d =
              wrap_signed(y.c[size_t(i)] - x.c[size_t(i)], periods_[size_t(i)]);
          s += d * d;
        }
        return std::sqrt(s);
      }
      case ManifoldKind::Sphere2: {
        const Vec3 cr = v3_cross(x.c, y.c);
        return radius_ * std::atan2(v3_norm(cr), v3_dot(x.c, y.c));
      }
    }
    return 0.0;
  }

  /// Endpoint of the unit-time geodesic with initial velocity xi. Defined for
  /// every xi.
  Point exp_map(const Point& x, const TangentVector& xi) const {
    switch (kind_) {
      case ManifoldKind::Circle: {
        Point p;
        p.c[0] = x.c[0] + xi.comps[0] / radius_;
        return canonical(p);
      }
      case ManifoldKind::FlatTorus: {
        Point p = x;
        for (int i = 0; i < dim_; ++i) p.c[size_t(i)] += xi.comps[i];
        return canonical(p);
      }
      case ManifoldKind::Sphere2: {
        const double len = xi.comps.norm();
        if (len < 1e-300) return x;
        Vec3 f1, f2;
        tangent_frame(x, f1, f2);
        const Vec3 dir = v3_normalized(v3_add(v3_scale(f1, xi.comps[0]),
                                              v3_scale(f2, xi.comps[1])));
        const double ang = len / radius_;
        const Vec3 p = v3_add(v3_scale(x.c, std::cos(ang)),
                              v3_scale(dir, radius_ * std::sin(ang)));
        return canonical(Point{p});
      }
    }
    return x;
  }

  /// Inverse of exp_map. Throws CutLocusError when y is within eps_cut of the
  /// cut locus of x (antipodal on circle/sphere, a half-period tie on the
  /// torus).
  TangentVector log_map(const Point& x, const Point& y) const {
    const double eps_cut = 1e-9 * injectivity_radius();
    TangentVector xi;
    xi.base = x;
    xi.comps = SmallVec::zero(dim_);
    switch (kind_) {
      case ManifoldKind::Circle: {
        const double d = wrap_signed(y.c[0] - x.c[0], 2.0 * kPi);
        if (kPi - std::abs(d) <= eps_cut / radius_)
          throw CutLocusError("circle: antipodal pair");
        xi.comps[0] = radius_ * d;
        return xi;
      }
      case ManifoldKind::FlatTorus: {
        for (int i = 0; i < dim_; ++i) {
          const double li = periods_[size_t(i)];
          const double d = wrap_signed(y.c[size_t(i)] - x.c[size_t(i)], li);
          if (0.5 * li - std::abs(d) <= eps_cut)
            throw CutLocusError("torus: half-period tie in coordinate " +
                                std::to_string(i));
          xi.comps[i] = d;
        }
        return xi;
      }
      case ManifoldKind::Sphere2: {
        const double d = distance(x, y);
        if (kPi * radius_ - d <= eps_cut)
          throw CutLocusError("sphere: antipodal pair");
        if (d < 1e-300) return xi;
        const double cosang = v3_dot(x.c, y.c) / (radius_ * radius_);
        const Vec3 perp = v3_sub(y.c, v3_scale(x.c, cosang));
        const Vec3 dir = v3_normalized(perp);
        Vec3 f1, f2;
        tangent_frame(x, f1, f2);
        xi.comps[0] = d * v3_dot(dir, f1);
        xi.comps[1] = d * v3_dot(dir, f2);
        return xi;
      }
    }
    return xi;
  }

  /// Point gamma(s) on the constant-speed shortest geodesic with gamma(a)=x,
  /// gamma(b)=y. Requires a < b and s in [a,b].
  Point geodesic_point(const Point& x, const Point& y, double a, double b,
                       double s) const {
    if (!(a < b)) throw DomainError("geodesic_point: need a < b");
    if (s < a || s > b)
      throw DomainError("geodesic_point: s outside parameter interval");
    if (s == a) return x;
    if (s == b) return y;
    const double f = (s - a) / (b - a);
    TangentVector xi = log_map(x, y);
    xi.comps = xi.comps * f;
    return exp_map(x, xi);
  }

  /// Jacobian determinant of exp_y at log_y(x); the volume distortion of
  /// normal coordinates. Equals 1 on flat spaces and sin(u)/u (u = d/r) on the
  /// sphere.
  double volume_distortion(const Point& x, const Point& y) const {
    switch (kind_) {
      case ManifoldKind::Circle:
      case ManifoldKind::FlatTorus:
        (void)log_map(y, x);  // cut-locus check only
        return 1.0;
      case ManifoldKind::Sphere2: {
        const double d = distance(x, y);
        const double eps_cut = 1e-9 * injectivity_radius();
        if (kPi * radius_ - d <= eps_cut)
          throw CutLocusError("sphere: antipodal pair");
        const double u = d / radius_;
        if (u < 1e-4) return 1.0 - u * u / 6.0 + u * u * u * u / 120.0;
        return std::sin(u) / u;
      }
    }
    return 1.0;
  }

  /// Quadrature grid: equispaced angles on the circle, a tensor grid with n
  /// nodes per axis on the torus, and an n-point Fibonacci lattice with equal
  /// weights on the sphere.
  GridQuadrature make_grid(int n) const {
    if (n < 2) throw DomainError("make_grid: resolution must be >= 2");
    GridQuadrature g;
    switch (kind_) {
      case ManifoldKind::Circle: {
        const double w = 2.0 * kPi * radius_ / n;
        g.nodes.reserve(size_t(n));
        for (int i = 0; i < n; ++i) {
          g.nodes.push_back(make_point({2.0 * kPi * i / n}));
          g.weights.push_back(w);
        }
        break;
      }
      case ManifoldKind::FlatTorus: {
        int total = 1;
        for (int i = 0; i < dim_; ++i) total *= n;
        const double w = volume() / total;
        g.nodes.reserve(size_t(total));
        for (int idx = 0; idx < total; ++idx) {
          Point p;
          int rem = idx;
          for (int i = 0; i < dim_; ++i) {
            p.c[size_t(i)] = periods_[size_t(i)] * (rem % n) / n;
            rem /= n;
          }
          g.nodes.push_back(p);
          g.weights.push_back(w);
        }
        break;
      }
      case ManifoldKind::Sphere2: {
        const double w = 4.0 * kPi * radius_ * radius_ / n;
        const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
        g.nodes.reserve(size_t(n));
        for (int i = 0; i < n; ++i) {
          const double z = 1.0 - (2.0 * i + 1.0) / n;
          const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
          const double phi = golden_angle * i;
          g.nodes.push_back(canonical(Point{
              {radius_ * rho * std::cos(phi), radius_ * rho * std::sin(phi),
               radius_ * z}}));
          g.weights.push_back(w);
        }
        break;
      }
    }
    return g;
  }

  /// Orthonormal frame of the embedded tangent plane at a sphere point.
  /// Deterministic; smooth away from a band switch near the poles.
  void tangent_frame(const Point& p, Vec3& f1, Vec3& f2) const {
    const Vec3 up =
        std::abs(p.c[2]) < 0.9 * radius_ ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
    f1 = v3_normalized(v3_cross(up, p.c));
    f2 = v3_normalized(v3_cross(p.c, f1));
  }

  /// Embedded 3-vector of a sphere tangent vector.
  Vec3 embed_tangent(const TangentVector& xi) const {
    Vec3 f1, f2;
    tangent_frame(xi.base, f1, f2);
    return v3_add(v3_scale(f1, xi.comps[0]), v3_scale(f2, xi.comps[1]));
  }

  bool operator==(const Manifold& o) const {
    if (kind_ != o.kind_ || dim_ != o.dim_) return false;
    if (kind_ == ManifoldKind::FlatTorus) {
      for (int i = 0; i < dim_; ++i)
        if (periods_[size_t(i)] != o.periods_[size_t(i)]) return false;
      return true;
    }
    return radius_ == o.radius_;
  }

 private:
  Manifold() = default;

  static void require_positive(double v) {
    if (!(v > 0.0)) throw DomainError("metric parameter must be positive");
  }

  // wrap to [0, period)
  static double wrap_to(double v, double period) {
    double w = std::fmod(v, period);
    if (w < 0) w += period;
    if (w == period) w = 0.0;
    return w;
  }
  // wrap to [-period/2, period/2]
  static double wrap_signed(double v, double period) {
    double w = v - period * std::round(v / period);
    if (w < -0.5 * period) w += period;
    return w;
  }

  ManifoldKind kind_ = ManifoldKind::Circle;
  int dim_ = 1;
  double radius_ = 1.0;
  std::array<double, kMaxDim> periods_{1.0, 1.0, 1.0};
};

}  // namespace geoheat
