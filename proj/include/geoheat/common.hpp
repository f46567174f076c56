#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace geoheat {

inline constexpr int kMaxDim = 3;  // largest intrinsic dimension we support
inline constexpr double kPi = 3.14159265358979323846;

/// Requested point lies on (or numerically too close to) the cut locus of the
/// base point, so the shortest geodesic is not unique.
class CutLocusError : public std::runtime_error {
 public:
  explicit CutLocusError(const std::string& what) : std::runtime_error(what) {}
};

class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

class PreconditionError : public std::invalid_argument {
 public:
  explicit PreconditionError(const std::string& what)
      : std::invalid_argument(what) {}
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Fixed-capacity coordinate vector for intrinsic dimensions up to kMaxDim.
struct SmallVec {
  int dim = 0;
  std::array<double, kMaxDim> v{0.0, 0.0, 0.0};

  static SmallVec zero(int dim) { return SmallVec{dim, {0.0, 0.0, 0.0}}; }

  double& operator[](int i) { return v[static_cast<size_t>(i)]; }
  double operator[](int i) const { return v[static_cast<size_t>(i)]; }

  SmallVec operator+(const SmallVec& o) const {
    SmallVec r = *this;
    for (int i = 0; i < dim; ++i) r.v[size_t(i)] += o.v[size_t(i)];
    return r;
  }
  SmallVec operator-(const SmallVec& o) const {
    SmallVec r = *this;
    for (int i = 0; i < dim; ++i) r.v[size_t(i)] -= o.v[size_t(i)];
    return r;
  }
  SmallVec operator*(double s) const {
    SmallVec r = *this;
    for (int i = 0; i < dim; ++i) r.v[size_t(i)] *= s;
    return r;
  }
  double dot(const SmallVec& o) const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += v[size_t(i)] * o.v[size_t(i)];
    return s;
  }
  double norm() const { return std::sqrt(dot(*this)); }
};

// 3-vector helpers for the embedded sphere.
using Vec3 = std::array<double, 3>;

inline Vec3 v3_add(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 v3_sub(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 v3_scale(const Vec3& a, double s) {
  return {a[0] * s, a[1] * s, a[2] * s};
}
inline double v3_dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline Vec3 v3_cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}
inline double v3_norm(const Vec3& a) { return std::sqrt(v3_dot(a, a)); }
inline Vec3 v3_normalized(const Vec3& a) {
  const double n = v3_norm(a);
  return {a[0] / n, a[1] / n, a[2] / n};
}

/// Rodrigues rotation of `p` about unit `axis` by `angle`.
inline Vec3 v3_rotate(const Vec3& p, const Vec3& axis, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  const Vec3 ax = v3_cross(axis, p);
  const double ad = v3_dot(axis, p);
  return {p[0] * c + ax[0] * s + axis[0] * ad * (1.0 - c),
          p[1] * c + ax[1] * s + axis[1] * ad * (1.0 - c),
          p[2] * c + ax[2] * s + axis[2] * ad * (1.0 - c)};
}

}  // namespace geoheat
