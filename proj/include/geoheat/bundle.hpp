#pragma once

#include <functional>
#include <map>
#include <string>
#include <variant>

#include "geoheat/fiber_matrix.hpp"
#include "geoheat/geometry.hpp"
#include "geoheat/polygon.hpp"
#include "geoheat/quadrature.hpp"

namespace geoheat {

enum class Field { Real, Complex };

struct TrivialConnection {};

/// Flat connection with constant 1-form `form (x) generator` on a circle or
/// torus base; the generator must be anti-Hermitian so transport is unitary.
struct ConstantFormConnection {
  SmallVec form;
  FiberMatrix generator;
};

/// Levi-Civita connection on the tangent planes of the round 2-sphere
/// (rank 2, real).
struct TangentConnection {};

using Connection =
    std::variant<TrivialConnection, ConstantFormConnection, TangentConnection>;

using PotentialFn = std::function<FiberMatrix(const Manifold&, const Point&)>;

/// Metric vector bundle over a model manifold with an optional symmetric
/// potential. Rank is at most 4.
class Bundle {
 public:
  Bundle(Manifold base, int rank, Field field, Connection connection,
         PotentialFn potential = nullptr)
      : base_(std::move(base)),
        rank_(rank),
        field_(field),
        conn_(std::move(connection)),
        potential_(std::move(potential)) {
    if (rank_ < 1 || rank_ > kMaxRank) throw DomainError("bundle rank 1..4");
    if (const auto* cf = std::get_if<ConstantFormConnection>(&conn_)) {
      if (base_.kind() == ManifoldKind::Sphere2)
        throw DomainError("constant-form connection needs a flat base");
      if (cf->form.dim != base_.dim())
        throw DomainError("connection form dimension mismatch");
      if (cf->generator.rows() != rank_)
        throw DomainError("generator rank mismatch");
      if (!cf->generator.is_anti_hermitian(1e-12))
        throw DomainError("constant-form generator must be anti-Hermitian");
      if (field_ == Field::Real && cf->generator.max_imag_abs() > 1e-12)
        throw DomainError("real bundle with complex generator");
    }
    if (std::holds_alternative<TangentConnection>(conn_)) {
      if (base_.kind() != ManifoldKind::Sphere2 || rank_ != 2 ||
          field_ != Field::Real)
        throw DomainError("tangent connection is the rank-2 real sphere case");
    }
  }

  static Bundle trivial_line(Manifold base, PotentialFn potential = nullptr) {
    return Bundle(std::move(base), 1, Field::Real, TrivialConnection{},
                  std::move(potential));
  }

  const Manifold& base() const { return base_; }
  int rank() const { return rank_; }
  Field field() const { return field_; }
  const Connection& connection() const { return conn_; }
  bool has_potential() const { return static_cast<bool>(potential_); }
  const PotentialFn& potential() const { return potential_; }
  bool trivial_connection() const {
    return std::holds_alternative<TrivialConnection>(conn_);
  }

 private:
  Manifold base_;
  int rank_;
  Field field_;
  Connection conn_;
  PotentialFn potential_;
};

/// Linear map between fibers, tagged with its endpoints.
struct FiberMap {
  Point source;
  Point target;
  FiberMatrix matrix;
};

/// Constant-speed shortest geodesic parametrized on [a,b].
struct GeodesicSegment {
  Point start;
  Point end;
  double a;
  double b;

  double duration() const { return b - a; }
};

inline Point segment_point(const Manifold& m, const GeodesicSegment& seg,
                           double s) {
  if (m.distance(seg.start, seg.end) == 0.0) return seg.start;
  return m.geodesic_point(seg.start, seg.end, seg.a, seg.b, s);
}

/// Potential evaluated at a point; zero matrix when the bundle carries none.
/// Rejects non-Hermitian handles.
inline FiberMatrix potential_at(const Bundle& b, const Point& x) {
  if (!b.has_potential()) return FiberMatrix::zero(b.rank());
  FiberMatrix v = b.potential()(b.base(), x);
  if (v.rows() != b.rank()) throw PreconditionError("potential rank mismatch");
  if (!v.is_hermitian(1e-12 * (1.0 + v.max_abs())))
    throw PreconditionError("potential must be symmetric/Hermitian");
  return v;
}

/// Parallel transport tau_s^{s2} along a geodesic segment. An isometry; the
/// inverse is the transport in the opposite direction (equivalently the
/// adjoint).
inline FiberMap transport(const Bundle& b, const GeodesicSegment& seg, double s,
                          double s2) {
  if (s < seg.a || s > seg.b || s2 < seg.a || s2 > seg.b)
    throw DomainError("transport: times outside the segment interval");
  FiberMap out;
  out.source = segment_point(b.base(), seg, s);
  out.target = segment_point(b.base(), seg, s2);

  if (std::holds_alternative<TrivialConnection>(b.connection())) {
    out.matrix = FiberMatrix::identity(b.rank());
    return out;
  }
  if (const auto* cf = std::get_if<ConstantFormConnection>(&b.connection())) {
    const TangentVector disp = b.base().log_map(seg.start, seg.end);
    const double frac = (s2 - s) / seg.duration();
    double phase = 0.0;
    for (int i = 0; i < b.base().dim(); ++i)
      phase += cf->form[i] * disp.comps[i];
    out.matrix = (cf->generator * (-phase * frac)).exp();
    return out;
  }
  // Tangent connection: the rotation about the great-circle axis carries
  // tangent planes along the geodesic and preserves parallel fields.
  const Manifold& m = b.base();
  const double total = m.distance(seg.start, seg.end);
  if (total < 1e-300) {
    out.matrix = FiberMatrix::identity(2);
    return out;
  }
  const Vec3 axis = v3_normalized(v3_cross(seg.start.c, seg.end.c));
  const double angle =
      (s2 - s) / seg.duration() * (total / m.radius());
  Vec3 f1a, f2a, f1b, f2b;
  m.tangent_frame(out.source, f1a, f2a);
  m.tangent_frame(out.target, f1b, f2b);
  FiberMatrix t(2);
  const Vec3 r1 = v3_rotate(f1a, axis, angle);
  const Vec3 r2 = v3_rotate(f2a, axis, angle);
  t(0, 0) = v3_dot(f1b, r1);
  t(0, 1) = v3_dot(f1b, r2);
  t(1, 0) = v3_dot(f2b, r1);
  t(1, 1) = v3_dot(f2b, r2);
  out.matrix = t;
  return out;
}

/// Gauss-Legendre approximation of int_a^b tau_s^b V(gamma(s)) tau_b^s ds,
/// conjugated into the fiber at the segment end. Hermitian up to rounding.
inline FiberMatrix conjugated_potential_integral(const Bundle& b,
                                                 const GeodesicSegment& seg,
                                                 int q) {
  if (q < 1) throw DomainError("quadrature order must be >= 1");
  FiberMatrix acc = FiberMatrix::zero(b.rank());
  if (!b.has_potential()) return acc;
  const GaussLegendreRule& rule = gauss_legendre(q);
  const double half = 0.5 * seg.duration();
  const double mid = 0.5 * (seg.a + seg.b);
  const bool conjugate = !b.trivial_connection();
  for (int i = 0; i < q; ++i) {
    const double s = mid + half * rule.nodes[size_t(i)];
    const double w = half * rule.weights[size_t(i)];
    const Point p = segment_point(b.base(), seg, s);
    FiberMatrix v = potential_at(b, p);
    if (conjugate) {
      const FiberMatrix fwd = transport(b, seg, s, seg.b).matrix;
      v = fwd * v * fwd.adjoint();
    }
    acc = acc + v * w;
  }
  return acc;
}

/// exp(-int_{sigma_{j-1}}^{sigma_j} tau_s^L V tau_L^s ds) for segment j
/// (1-based) of a polygon, expressed in the fiber at the polygon endpoint.
/// Identity when the potential vanishes.
inline FiberMap segment_potential_factor(const Bundle& b,
                                         const GeodesicPolygon& poly, int j,
                                         int q) {
  if (j < 1 || j > poly.segments())
    throw DomainError("segment index out of range");
  const Partition& t = poly.partition();
  const GeodesicSegment seg{poly.vertex(j - 1), poly.vertex(j), t.sigma(j - 1),
                            t.sigma(j)};
  const FiberMatrix local = (conjugated_potential_integral(b, seg, q) * -1.0).exp();
  // carry the factor from the fiber at x_j to the fiber at the endpoint
  FiberMatrix chain = FiberMatrix::identity(b.rank());
  for (int i = j + 1; i <= poly.segments(); ++i) {
    const GeodesicSegment si{poly.vertex(i - 1), poly.vertex(i), t.sigma(i - 1),
                             t.sigma(i)};
    chain = transport(b, si, si.a, si.b).matrix * chain;
  }
  FiberMap out;
  out.source = poly.vertex(poly.segments());
  out.target = out.source;
  out.matrix = chain * local * chain.adjoint();
  return out;
}

/// Parallel transport once around a closed polygon, as a map on the fiber at
/// the base vertex. The trace is independent of the base point.
inline FiberMap holonomy(const Bundle& b, const GeodesicPolygon& poly) {
  if (!poly.is_closed(1e-10 * b.base().injectivity_radius()))
    throw PreconditionError("holonomy needs a closed polygon");
  const Partition& t = poly.partition();
  FiberMatrix h = FiberMatrix::identity(b.rank());
  for (int j = 1; j <= poly.segments(); ++j) {
    const GeodesicSegment seg{poly.vertex(j - 1), poly.vertex(j),
                              t.sigma(j - 1), t.sigma(j)};
    h = transport(b, seg, seg.a, seg.b).matrix * h;
  }
  FiberMap out;
  out.source = poly.vertex(0);
  out.target = poly.vertex(0);
  out.matrix = h;
  return out;
}

// ---------------------------------------------------------------------------
// Named potentials. The registry is the extension point used by experiment
// configs; adding an entry makes the name available everywhere.

struct NamedPotential {
  int rank;
  PotentialFn fn;  // nullptr encodes the zero potential
};

inline double primary_angle(const Manifold& m, const Point& p) {
  switch (m.kind()) {
    case ManifoldKind::Circle:
      return p.c[0];
    case ManifoldKind::FlatTorus:
      return 2.0 * kPi * p.c[0] / m.period(0);
    case ManifoldKind::Sphere2:
      return std::acos(std::clamp(p.c[2] / m.radius(), -1.0, 1.0));
  }
  return 0.0;
}

inline FiberMatrix demo_matrix_potential(const Manifold& m, const Point& p) {
  const double c = std::cos(primary_angle(m, p));
  const double s = std::sin(primary_angle(m, p));
  FiberMatrix v(2);
  v(0, 0) = 1.0 + 0.5 * c;
  v(1, 1) = 2.0 - 0.5 * c;
  v(0, 1) = 0.3 * s;
  v(1, 0) = 0.3 * s;
  return v;
}

inline double demo_matrix_potential_min_eigenvalue(const Manifold& m,
                                                   const Point& p) {
  const double c = std::cos(primary_angle(m, p));
  const double s = std::sin(primary_angle(m, p));
  return 1.5 - std::sqrt(0.25 * (c - 1.0) * (c - 1.0) + 0.09 * s * s);
}

inline std::map<std::string, NamedPotential>& potential_registry() {
  static std::map<std::string, NamedPotential> reg = [] {
    std::map<std::string, NamedPotential> r;
    r["zero"] = NamedPotential{1, nullptr};
    r["cos-theta"] = NamedPotential{
        1, [](const Manifold& m, const Point& p) {
          FiberMatrix v(1);
          v(0, 0) = std::cos(primary_angle(m, p));
          return v;
        }};
    r["matrix-demo"] = NamedPotential{2, demo_matrix_potential};
    r["matrix-demo-min"] = NamedPotential{
        1, [](const Manifold& m, const Point& p) {
          FiberMatrix v(1);
          v(0, 0) = demo_matrix_potential_min_eigenvalue(m, p);
          return v;
        }};
    return r;
  }();
  return reg;
}

inline const NamedPotential& named_potential(const std::string& name) {
  const auto& reg = potential_registry();
  const auto it = reg.find(name);
  if (it == reg.end()) throw ConfigError("unknown potential: " + name);
  return it->second;
}

}  // namespace geoheat
