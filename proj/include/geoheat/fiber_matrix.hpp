#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include "geoheat/common.hpp"

namespace geoheat {

inline constexpr int kMaxRank = 4;

using Cplx = std::complex<double>;

/// Dense k x k matrix over C with k <= 4, stored on the stack. Used for fiber
/// endomorphisms and transports; real bundles simply keep zero imaginary
/// parts.
class FiberMatrix {
 public:
  FiberMatrix() : n_(1) {}
  explicit FiberMatrix(int n) : n_(n) {
    if (n < 1 || n > kMaxRank) throw DomainError("fiber rank out of range");
  }

  static FiberMatrix identity(int n) {
    FiberMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static FiberMatrix zero(int n) { return FiberMatrix(n); }

  int rows() const { return n_; }

  Cplx& operator()(int i, int j) { return a_[size_t(i * n_ + j)]; }
  const Cplx& operator()(int i, int j) const { return a_[size_t(i * n_ + j)]; }

  FiberMatrix operator+(const FiberMatrix& o) const {
    FiberMatrix r(n_);
    for (int i = 0; i < n_ * n_; ++i) r.a_[size_t(i)] = a_[size_t(i)] + o.a_[size_t(i)];
    return r;
  }
  FiberMatrix operator-(const FiberMatrix& o) const {
    FiberMatrix r(n_);
    for (int i = 0; i < n_ * n_; ++i) r.a_[size_t(i)] = a_[size_t(i)] - o.a_[size_t(i)];
    return r;
  }
  FiberMatrix operator*(const FiberMatrix& o) const {
    FiberMatrix r(n_);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k) {
        const Cplx aik = (*this)(i, k);
        if (aik == 0.0) continue;
        for (int j = 0; j < n_; ++j) r(i, j) += aik * o(k, j);
      }
    return r;
  }
  FiberMatrix operator*(Cplx s) const {
    FiberMatrix r(n_);
    for (int i = 0; i < n_ * n_; ++i) r.a_[size_t(i)] = a_[size_t(i)] * s;
    return r;
  }
  FiberMatrix operator*(double s) const { return (*this) * Cplx(s, 0.0); }

  FiberMatrix adjoint() const {
    FiberMatrix r(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) r(i, j) = std::conj((*this)(j, i));
    return r;
  }

  Cplx trace() const {
    Cplx t = 0.0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (int i = 0; i < n_ * n_; ++i) m = std::max(m, std::abs(a_[size_t(i)]));
    return m;
  }

  double max_imag_abs() const {
    double m = 0.0;
    for (int i = 0; i < n_ * n_; ++i)
      m = std::max(m, std::abs(a_[size_t(i)].imag()));
    return m;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (int i = 0; i < n_ * n_; ++i) s += std::norm(a_[size_t(i)]);
    return std::sqrt(s);
  }

  bool is_hermitian(double tol) const {
    return ((*this) - adjoint()).max_abs() <= tol;
  }
  bool is_anti_hermitian(double tol) const {
    return ((*this) + adjoint()).max_abs() <= tol;
  }

  /// Matrix exponential by scaling and squaring with a Taylor series on the
  /// scaled matrix. Ranks are <= 4 and norms small, so this is accurate to
  /// near machine precision.
  FiberMatrix exp() const {
    double norm1 = 0.0;  // max row sum
    for (int i = 0; i < n_; ++i) {
      double s = 0.0;
      for (int j = 0; j < n_; ++j) s += std::abs((*this)(i, j));
      norm1 = std::max(norm1, s);
    }
    int squarings = 0;
    double scale = 1.0;
    while (norm1 * scale > 0.25) {
      scale *= 0.5;
      ++squarings;
    }
    const FiberMatrix t = (*this) * scale;
    FiberMatrix result = identity(n_);
    FiberMatrix term = identity(n_);
    for (int k = 1; k <= 30; ++k) {
      term = term * t * (1.0 / k);
      result = result + term;
      if (term.max_abs() < 1e-20 * (1.0 + result.max_abs())) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
  }

  /// Eigenvalues of a Hermitian matrix, ascending (cyclic complex Jacobi).
  std::array<double, kMaxRank> hermitian_eigenvalues() const {
    FiberMatrix a = *this;
    for (int sweep = 0; sweep < 30; ++sweep) {
      double off = 0.0;
      for (int p = 0; p < n_; ++p)
        for (int q = p + 1; q < n_; ++q) off += std::norm(a(p, q));
      if (off <= 1e-30 * (1.0 + a.frobenius_norm())) break;
      for (int p = 0; p < n_; ++p)
        for (int q = p + 1; q < n_; ++q) {
          const Cplx apq = a(p, q);
          const double mag = std::abs(apq);
          if (mag < 1e-300) continue;
          const Cplx phase = apq / mag;
          const double app = a(p, p).real();
          const double aqq = a(q, q).real();
          const double tau = (aqq - app) / (2.0 * mag);
          const double t = (tau >= 0 ? 1.0 : -1.0) /
                           (std::abs(tau) + std::sqrt(1.0 + tau * tau));
          const double c = 1.0 / std::sqrt(1.0 + t * t);
          const double s = t * c;
          // columns: [p q] <- [p q] * [[c, s*phase], [-s*conj(phase), c]]
          for (int i = 0; i < n_; ++i) {
            const Cplx aip = a(i, p), aiq = a(i, q);
            a(i, p) = c * aip - s * std::conj(phase) * aiq;
            a(i, q) = s * phase * aip + c * aiq;
          }
          for (int j = 0; j < n_; ++j) {
            const Cplx apj = a(p, j), aqj = a(q, j);
            a(p, j) = c * apj - s * phase * aqj;
            a(q, j) = s * std::conj(phase) * apj + c * aqj;
          }
        }
    }
    std::array<double, kMaxRank> ev{0.0, 0.0, 0.0, 0.0};
    for (int i = 0; i < n_; ++i) ev[size_t(i)] = a(i, i).real();
    std::sort(ev.begin(), ev.begin() + n_);
    return ev;
  }

  double min_eigenvalue_hermitian() const { return hermitian_eigenvalues()[0]; }

  /// Operator (spectral) norm: sqrt of the largest eigenvalue of A* A.
  double op_norm() const {
    const FiberMatrix ata = adjoint() * (*this);
    const auto ev = ata.hermitian_eigenvalues();
    return std::sqrt(std::max(0.0, ev[size_t(n_ - 1)]));
  }

 private:
  int n_;
  std::array<Cplx, kMaxRank * kMaxRank> a_{};
};

inline FiberMatrix operator*(double s, const FiberMatrix& m) { return m * s; }
inline FiberMatrix operator*(Cplx s, const FiberMatrix& m) { return m * s; }

/// Fiber vector (k complex components, k <= 4).
struct FiberVector {
  int dim = 1;
  std::array<Cplx, kMaxRank> v{};

  static FiberVector zero(int k) { return FiberVector{k, {}}; }

  Cplx& operator[](int i) { return v[size_t(i)]; }
  Cplx operator[](int i) const { return v[size_t(i)]; }

  FiberVector operator+(const FiberVector& o) const {
    FiberVector r = *this;
    for (int i = 0; i < dim; ++i) r.v[size_t(i)] += o.v[size_t(i)];
    return r;
  }
  FiberVector operator*(Cplx s) const {
    FiberVector r = *this;
    for (int i = 0; i < dim; ++i) r.v[size_t(i)] *= s;
    return r;
  }
};

inline FiberVector operator*(const FiberMatrix& m, const FiberVector& x) {
  FiberVector r = FiberVector::zero(m.rows());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.rows(); ++j) r[i] += m(i, j) * x[j];
  return r;
}

}  // namespace geoheat
