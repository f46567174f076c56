#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <functional>

#include "geoheat/bundle.hpp"
#include "geoheat/propagator.hpp"
#include "geoheat/quadrature.hpp"

namespace geoheat {
namespace oracle {

// Reference computations, deliberately built on different numerics than the
// kernel pipeline: eigenfunction expansions, image sums, dense matrix
// exponentials and finite differences.

/// Wrapped-Gaussian image sum for one periodic axis of circumference L.
inline double periodic_heat_kernel_image(double length, double t, double dx) {
  const double g = 1.0 / std::sqrt(4.0 * kPi * t);
  double s = 0.0;
  for (int n = 0;; ++n) {
    const double up = dx + n * length;  // images n and -(n+1)
    const double dn = dx - (n + 1) * length;
    const double term =
        std::exp(-up * up / (4.0 * t)) + std::exp(-dn * dn / (4.0 * t));
    s += term;
    if (term < 1e-18 * (1.0 + s) || n > 10000) break;
  }
  return g * s;
}

/// Eigenfunction sum for one periodic axis of circumference L.
inline double periodic_heat_kernel_eigen(double length, double t, double dx) {
  double s = 1.0;
  for (int n = 1;; ++n) {
    const double lam = 2.0 * kPi * n / length;
    const double term = 2.0 * std::exp(-lam * lam * t) * std::cos(lam * dx);
    s += term;
    if (std::exp(-lam * lam * t) < 1e-18) break;
    if (n > 100000) break;
  }
  return s / length;
}

/// One periodic axis, choosing whichever series converges faster.
inline double periodic_heat_kernel(double length, double t, double dx) {
  return (4.0 * t < 0.5 * length * length)
             ? periodic_heat_kernel_image(length, t, dx)
             : periodic_heat_kernel_eigen(length, t, dx);
}

inline double sphere_heat_kernel(double radius, double t, double geodesic_d) {
  const double r2 = radius * radius;
  const double ct = std::clamp(std::cos(geodesic_d / radius), -1.0, 1.0);
  double p_prev = 1.0;       // P_0
  double p_cur = ct;         // P_1
  double sum = 1.0 / (4.0 * kPi * r2);
  for (int l = 1;; ++l) {
    const double weight =
        (2.0 * l + 1.0) * std::exp(-l * (l + 1.0) * t / r2) / (4.0 * kPi * r2);
    sum += weight * p_cur;
    if (weight < 1e-16 * std::abs(sum) && l > 4) break;
    if (l > 100000) break;
    const double p_next = ((2.0 * l + 1.0) * ct * p_cur - l * p_prev) / (l + 1.0);
    p_prev = p_cur;
    p_cur = p_next;
  }
  return sum;
}

/// Heat kernel of the Laplace-Beltrami operator on the model space.
inline double spectral_kernel(const Manifold& m, double t, const Point& x,
                              const Point& y) {
  if (!(t > 0.0)) throw DomainError("spectral_kernel: t must be positive");
  switch (m.kind()) {
    case ManifoldKind::Circle:
      return periodic_heat_kernel(2.0 * kPi * m.radius(), t,
                                  m.distance(x, y));
    case ManifoldKind::FlatTorus: {
      double prod = 1.0;
      for (int i = 0; i < m.dim(); ++i) {
        const double li = m.period(i);
        double d = std::fmod(y.c[size_t(i)] - x.c[size_t(i)], li);
        if (d < 0) d += li;
        prod *= periodic_heat_kernel(li, t, d);
      }
      return prod;
    }
    case ManifoldKind::Sphere2:
      return sphere_heat_kernel(m.radius(), t, m.distance(x, y));
  }
  return 0.0;
}

inline double circle_trace(double radius, double t) {
  double s = 1.0;
  for (int n = 1;; ++n) {
    const double term = 2.0 * std::exp(-double(n) * n * t / (radius * radius));
    s += term;
    if (term < 1e-18) break;
  }
  return s;
}

/// Heat trace of the Laplace-Beltrami operator.
inline double spectral_trace(const Manifold& m, double t) {
  if (!(t > 0.0)) throw DomainError("spectral_trace: t must be positive");
  switch (m.kind()) {
    case ManifoldKind::Circle:
      return circle_trace(m.radius(), t);
    case ManifoldKind::FlatTorus: {
      double prod = 1.0;
      for (int i = 0; i < m.dim(); ++i)
        prod *= circle_trace(m.period(i) / (2.0 * kPi), t);
      return prod;
    }
    case ManifoldKind::Sphere2: {
      const double r2 = m.radius() * m.radius();
      double s = 0.0;
      for (int l = 0;; ++l) {
        const double term = (2.0 * l + 1.0) * std::exp(-l * (l + 1.0) * t / r2);
        s += term;
        if (term < 1e-18 * s && l > 2) break;
      }
      return s;
    }
  }
  return 0.0;
}

/// Reference propagator e^{-tH} for H = Laplacian + V on the circle,
/// discretized with a Fourier-multiplier Laplacian on N equispaced nodes and
/// exponentiated through a dense symmetric eigensolve. Real bundles with
/// trivial connection only.
inline KernelMatrix operator_reference_1d(const Bundle& b, int n, double t) {
  if (b.base().kind() != ManifoldKind::Circle)
    throw PreconditionError("operator_reference_1d needs a circle base");
  if (b.field() != Field::Real || !b.trivial_connection())
    throw PreconditionError("operator_reference_1d: real trivial bundles only");
  if (n < 16 || n % 2 != 0)
    throw DomainError("operator_reference_1d: need even N >= 16");
  const int k = b.rank();
  const double r = b.base().radius();
  const GridQuadrature grid = b.base().make_grid(n);

  // circulant Fourier-multiplier Laplacian on node values
  Eigen::VectorXd symbol(n);
  for (int mode = 0; mode < n; ++mode) {
    const int folded = std::min(mode, n - mode);
    symbol[mode] = double(folded) * folded / (r * r);
  }
  Eigen::MatrixXd lap(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      double s = symbol[0];
      for (int mode = 1; mode < n / 2; ++mode)
        s += 2.0 * symbol[mode] * std::cos(2.0 * kPi * mode * (p - q) / n);
      s += symbol[n / 2] * ((p - q) % 2 == 0 ? 1.0 : -1.0);
      lap(p, q) = s / n;
    }

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n * k, n * k);
  for (int p = 0; p < n; ++p) {
    const FiberMatrix v = potential_at(b, grid.nodes[size_t(p)]);
    for (int q = 0; q < n; ++q)
      for (int a = 0; a < k; ++a) h(p * k + a, q * k + a) = lap(p, q);
    for (int a = 0; a < k; ++a)
      for (int c = 0; c < k; ++c) h(p * k + a, p * k + c) += v(a, c).real();
  }
  h = 0.5 * (h + h.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const Eigen::VectorXd decay = (-t * es.eigenvalues().array()).exp();
  KernelMatrix out;
  out.rank = k;
  out.weights = grid.weights;
  out.op = es.eigenvectors() * decay.asDiagonal() * es.eigenvectors().transpose();
  return out;
}

/// Central finite-difference determinant of the differential of exp_y at
/// log_y(x), in orthonormal frames. Independent numerical route to the
/// volume distortion.
inline double jacobian_mu_oracle(const Manifold& m, const Point& x,
                                 const Point& y) {
  const int dim = m.dim();
  const double h = 1e-5 * m.injectivity_radius();
  const TangentVector xi0 = m.log_map(y, x);
  Eigen::MatrixXd jac(dim, dim);
  for (int a = 0; a < dim; ++a) {
    TangentVector plus = xi0, minus = xi0;
    plus.comps[a] += h;
    minus.comps[a] -= h;
    const TangentVector dplus = m.log_map(x, m.exp_map(y, plus));
    const TangentVector dminus = m.log_map(x, m.exp_map(y, minus));
    for (int i = 0; i < dim; ++i)
      jac(i, a) = (dplus.comps[i] - dminus.comps[i]) / (2.0 * h);
  }
  return std::abs(jac.determinant());
}

struct GaussMomentResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_diff = 0.0;
};

/// Second-moment identity check for the Gaussian weight: compares
/// int g_t(xi) B(xi,xi) f(t,xi) dxi against 2t tr(B) int g_t(xi) f(t,xi) dxi
/// by tensor Gauss-Legendre quadrature on a box of radius 12 sqrt(t)
/// (truncation below 1e-14 relative), doubling the order until stable.
inline GaussMomentResult gauss_moment_check(
    int dim, const std::function<double(int, int, double)>& bilinear_entry,
    const std::function<double(double, const double*)>& f, double t) {
  if (dim < 1 || dim > kMaxDim) throw DomainError("gauss_moment_check: dim 1..3");
  if (!(t > 0.0)) throw DomainError("gauss_moment_check: t must be positive");
  double trace_b = 0.0;
  for (int i = 0; i < dim; ++i) trace_b += bilinear_entry(i, i, 0.0);
  const double box = 12.0 * std::sqrt(t);
  const double norm = std::pow(4.0 * kPi * t, -0.5 * dim);

  auto integrate = [&](int order, double& lhs, double& rhs) {
    const GaussLegendreRule& rule = gauss_legendre(order);
    lhs = 0.0;
    rhs = 0.0;
    std::array<int, kMaxDim> idx{};
    std::array<double, kMaxDim> xi{};
    const long total = [&] {
      long p = 1;
      for (int i = 0; i < dim; ++i) p *= order;
      return p;
    }();
    for (long flat = 0; flat < total; ++flat) {
      long rem = flat;
      double w = 1.0;
      for (int i = 0; i < dim; ++i) {
        idx[size_t(i)] = int(rem % order);
        rem /= order;
        xi[size_t(i)] = box * rule.nodes[size_t(idx[size_t(i)])];
        w *= box * rule.weights[size_t(idx[size_t(i)])];
      }
      double nsq = 0.0;
      for (int i = 0; i < dim; ++i) nsq += xi[size_t(i)] * xi[size_t(i)];
      const double g = norm * std::exp(-nsq / (4.0 * t));
      double bq = 0.0;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          bq += bilinear_entry(i, j, 0.0) * xi[size_t(i)] * xi[size_t(j)];
      const double fv = f(t, xi.data());
      lhs += w * g * bq * fv;
      rhs += w * g * fv;
    }
    rhs *= 2.0 * t * trace_b;
  };

  double lhs = 0.0, rhs = 0.0;
  double prev_lhs = 0.0, prev_rhs = 0.0;
  for (int order = 48;; order *= 2) {
    integrate(order, lhs, rhs);
    if (order > 48) {
      const double scale = std::abs(lhs) + std::abs(rhs) + 1e-300;
      if (std::abs(lhs - prev_lhs) + std::abs(rhs - prev_rhs) < 1e-13 * scale)
        break;
    }
    prev_lhs = lhs;
    prev_rhs = rhs;
    if (order >= 384) break;
  }
  return GaussMomentResult{lhs, rhs, std::abs(lhs - rhs)};
}

}  // namespace oracle
}  // namespace geoheat
