#pragma once

#include <Eigen/Dense>
#include <cstring>
#include <map>
#include <vector>

#include "geoheat/bundle.hpp"
#include "geoheat/cutoff.hpp"
#include "geoheat/parallel.hpp"

namespace geoheat {

/// One-step kernel families. All share the heat-semigroup generator, so
/// composing any of them over partitions with vanishing mesh yields the same
/// limit.
///  - CutoffMu:     cutoff * mu^{-1/2} Gaussian, curvature/6 inside the
///                  conjugated exponent.
///  - Plain:        bare Gaussian, curvature/3 inside the exponent, no cutoff
///                  (cut-locus pairs are valued zero).
///  - Lambda:       cutoff * mu^{(lambda-1)/2}, curvature (lambda+1)/6.
///                  lambda = 1 matches Plain-with-cutoff, lambda = -1 carries
///                  mu^{-1} and no curvature term.
///  - EndpointScal: bare Gaussian with t/6 (scal(x)+scal(y)) in the exponent.
enum class KernelVariant { CutoffMu, Plain, Lambda, EndpointScal };

struct StepKernelConfig {
  Bundle bundle;
  KernelVariant variant = KernelVariant::CutoffMu;
  double lambda = 0.0;
  CutoffChi chi;
  int quad_order = 4;
};

inline StepKernelConfig make_step_config(Bundle bundle, KernelVariant variant,
                                         double lambda = 0.0,
                                         int quad_order = 4) {
  const double injrad = bundle.base().injectivity_radius();
  return StepKernelConfig{std::move(bundle), variant, lambda,
                          CutoffChi::for_injectivity_radius(injrad),
                          quad_order};
}

/// Count of node pairs valued zero because they hit the cut locus.
struct CutDiagnostics {
  long zeroed_pairs = 0;
};

/// (4 pi t)^{-m/2} exp(-d(x,y)^2 / 4t), optionally with the cutoff factor.
inline double gauss_factor(const Manifold& m, double t, const Point& x,
                           const Point& y, bool with_cutoff,
                           const CutoffChi& chi) {
  if (!(t > 0.0)) throw DomainError("gauss_factor: t must be positive");
  const double d = m.distance(x, y);
  double g = std::pow(4.0 * kPi * t, -0.5 * m.dim()) *
             std::exp(-d * d / (4.0 * t));
  if (with_cutoff) g *= chi(d * d);
  return g;
}

namespace detail {

inline bool variant_has_cutoff(KernelVariant v) {
  return v == KernelVariant::CutoffMu || v == KernelVariant::Lambda;
}

inline double mu_exponent(const StepKernelConfig& cfg) {
  switch (cfg.variant) {
    case KernelVariant::CutoffMu:
      return -0.5;
    case KernelVariant::Lambda:
      return 0.5 * (cfg.lambda - 1.0);
    default:
      return 0.0;
  }
}

inline double mu_power(double mu, double expo) {
  if (expo == 0.0) return 1.0;
  if (expo == -1.0) return 1.0 / mu;
  if (expo == -0.5) return 1.0 / std::sqrt(mu);
  if (expo == 0.5) return std::sqrt(mu);
  return std::pow(mu, expo);
}

/// Curvature contribution to the exponent. All model spaces have constant
/// scalar curvature, so the line integral along the step geodesic is exact.
inline double curvature_exponent(const StepKernelConfig& cfg, double t,
                                 const Point& x, const Point& y) {
  const Manifold& m = cfg.bundle.base();
  switch (cfg.variant) {
    case KernelVariant::CutoffMu:
      return t / 6.0 * m.scalar_curvature();
    case KernelVariant::Plain:
      return t / 3.0 * m.scalar_curvature();
    case KernelVariant::Lambda:
      return (cfg.lambda + 1.0) / 6.0 * t * m.scalar_curvature();
    case KernelVariant::EndpointScal:
      return t / 6.0 * (m.scalar_curvature(x) + m.scalar_curvature(y));
  }
  return 0.0;
}

struct ScalarKernelTerms {
  double prefactor = 0.0;  // gaussian * cutoff * mu-power
  double exponent = 0.0;   // curvature part of the exponent
  bool zero = false;
};

inline ScalarKernelTerms scalar_terms(const StepKernelConfig& cfg, double t,
                                      const Point& x, const Point& y,
                                      CutDiagnostics* diag) {
  const Manifold& m = cfg.bundle.base();
  ScalarKernelTerms out;
  double g = gauss_factor(m, t, x, y, variant_has_cutoff(cfg.variant), cfg.chi);
  if (g == 0.0) {
    out.zero = true;
    return out;
  }
  const double expo = mu_exponent(cfg);
  double mu = 1.0;
  try {
    mu = m.volume_distortion(x, y);  // also detects cut-locus pairs
  } catch (const CutLocusError&) {
    if (diag) ++diag->zeroed_pairs;
    out.zero = true;
    return out;
  }
  out.prefactor = g * mu_power(mu, expo);
  out.exponent = curvature_exponent(cfg, t, x, y);
  return out;
}

}  // namespace detail

/// One-step kernel value as a map E_y -> E_x. Cut-locus pairs give the zero
/// map.
inline FiberMap step_kernel(const StepKernelConfig& cfg, double t,
                            const Point& x, const Point& y,
                            CutDiagnostics* diag = nullptr) {
  if (!(t > 0.0)) throw DomainError("step_kernel: t must be positive");
  const Bundle& b = cfg.bundle;
  FiberMap out;
  out.source = y;
  out.target = x;
  const detail::ScalarKernelTerms terms =
      detail::scalar_terms(cfg, t, x, y, diag);
  if (terms.zero) {
    out.matrix = FiberMatrix::zero(b.rank());
    return out;
  }
  if (b.rank() == 1 && b.trivial_connection()) {
    double pot = 0.0;
    if (b.has_potential()) {
      const GeodesicSegment seg{x, y, 0.0, t};
      pot = conjugated_potential_integral(b, seg, cfg.quad_order)(0, 0).real();
    }
    FiberMatrix mm(1);
    mm(0, 0) = terms.prefactor * std::exp(terms.exponent - pot);
    out.matrix = mm;
    return out;
  }
  const GeodesicSegment seg{x, y, 0.0, t};
  FiberMatrix expo = FiberMatrix::identity(b.rank()) * terms.exponent;
  if (b.has_potential())
    expo = expo - conjugated_potential_integral(b, seg, cfg.quad_order);
  const FiberMatrix back = transport(b, seg, t, 0.0).matrix;  // E_y -> E_x
  out.matrix = (back * expo.exp()) * terms.prefactor;
  return out;
}

namespace detail {

template <class Scalar>
void write_block(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& mat,
                 int k, int i, int j, const FiberMatrix& f) {
  for (int a = 0; a < k; ++a)
    for (int c = 0; c < k; ++c) {
      if constexpr (std::is_same_v<Scalar, double>)
        mat(i * k + a, j * k + c) = f(a, c).real();
      else
        mat(i * k + a, j * k + c) = f(a, c);
    }
}

}  // namespace detail

/// Dense matrix of one-step kernel values over a grid: block (i,j) is
/// step_kernel(t, x_i, y_j). No quadrature weights. Rows fill in parallel.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> step_kernel_matrix(
    const StepKernelConfig& cfg, double t, const GridQuadrature& grid,
    CutDiagnostics* diag = nullptr) {
  const int k = cfg.bundle.rank();
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> mat(n * k, n * k);
  std::vector<long> row_zeroed(grid.size(), 0);
  parallel_for(grid.size(), [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      CutDiagnostics local;
      for (size_t j = 0; j < grid.size(); ++j) {
        const FiberMap f = step_kernel(cfg, t, grid.nodes[i], grid.nodes[j],
                                       diag ? &local : nullptr);
        detail::write_block(mat, k, int(i), int(j), f.matrix);
      }
      row_zeroed[i] = local.zeroed_pairs;
    }
  });
  if (diag)
    for (long z : row_zeroed) diag->zeroed_pairs += z;
  return mat;
}

namespace detail {

/// Cache of step matrices keyed by the step duration; uniform partitions
/// assemble one matrix and reuse it.
template <class Scalar>
class StepMatrixCache {
 public:
  StepMatrixCache(const StepKernelConfig& cfg, const GridQuadrature& grid,
                  CutDiagnostics* diag)
      : cfg_(cfg), grid_(grid), diag_(diag) {}

  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& get(double t) {
    uint64_t key = 0;
    std::memcpy(&key, &t, sizeof(double));
    auto it = cache_.find(key);
    if (it == cache_.end())
      it = cache_.emplace(key, step_kernel_matrix<Scalar>(cfg_, t, grid_, diag_))
               .first;
    return it->second;
  }

 private:
  const StepKernelConfig& cfg_;
  const GridQuadrature& grid_;
  CutDiagnostics* diag_;
  std::map<uint64_t, Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>
      cache_;
};

/// Left-to-right chain: row_0(z) = s_{t_1}(x, z) w_z, then
/// row_j = (row_{j-1} K(t_j)) .* w through j = r-1. The trailing step is
/// applied by the callers without weights.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> pinned_row_chain(
    const StepKernelConfig& cfg, const Partition& t, const Point& x,
    const GridQuadrature& grid, StepMatrixCache<Scalar>& cache,
    CutDiagnostics* diag) {
  const int k = cfg.bundle.rank();
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> row(k, n * k);
  for (size_t j = 0; j < grid.size(); ++j) {
    const FiberMap f = step_kernel(cfg, t.step(0), x, grid.nodes[j], diag);
    write_block(row, k, 0, int(j), f.matrix * grid.weights[j]);
  }
  for (int j = 2; j <= t.r() - 1; ++j) {
    row = (row * cache.get(t.step(j - 1))).eval();
    for (Eigen::Index c = 0; c < n; ++c)
      row.middleCols(c * k, k) *= grid.weights[size_t(c)];
  }
  return row;
}

template <class Scalar>
FiberMatrix read_block(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& mat, int k,
    int i, int j) {
  FiberMatrix f(k);
  for (int a = 0; a < k; ++a)
    for (int c = 0; c < k; ++c) f(a, c) = mat(i * k + a, j * k + c);
  return f;
}

template <class Scalar>
std::vector<FiberMatrix> pinned_row_impl(const StepKernelConfig& cfg,
                                         const Partition& t, const Point& x,
                                         const GridQuadrature& grid,
                                         CutDiagnostics* diag) {
  const int k = cfg.bundle.rank();
  std::vector<FiberMatrix> out(grid.size(), FiberMatrix::zero(k));
  if (t.r() == 1) {
    for (size_t j = 0; j < grid.size(); ++j)
      out[j] = step_kernel(cfg, t.step(0), x, grid.nodes[j], diag).matrix;
    return out;
  }
  StepMatrixCache<Scalar> cache(cfg, grid, diag);
  const auto row = pinned_row_chain<Scalar>(cfg, t, x, grid, cache, diag);
  const auto full = (row * cache.get(t.step(t.r() - 1))).eval();
  for (size_t j = 0; j < grid.size(); ++j)
    out[j] = read_block(full, k, 0, int(j));
  return out;
}

}  // namespace detail

/// Pinned multi-step kernel k_T(x, y_j) for every grid node y_j at once: the
/// (r-1) intermediate integrals are evaluated by grid quadrature, organized
/// as a vector-matrix chain.
inline std::vector<FiberMatrix> pinned_kernel_row(const StepKernelConfig& cfg,
                                                  const Partition& t,
                                                  const Point& x,
                                                  const GridQuadrature& grid,
                                                  CutDiagnostics* diag = nullptr) {
  if (cfg.bundle.field() == Field::Real)
    return detail::pinned_row_impl<double>(cfg, t, x, grid, diag);
  return detail::pinned_row_impl<Cplx>(cfg, t, x, grid, diag);
}

/// Pinned multi-step kernel at a single endpoint pair. For r = 1 this is the
/// one-step integrand; otherwise the intermediate vertices are integrated
/// over the grid.
inline FiberMap pinned_kernel(const StepKernelConfig& cfg, const Partition& t,
                              const Point& x, const Point& y,
                              const GridQuadrature& grid,
                              CutDiagnostics* diag = nullptr) {
  FiberMap out;
  out.source = y;
  out.target = x;
  if (t.r() == 1) return step_kernel(cfg, t.step(0), x, y, diag);
  const int k = cfg.bundle.rank();
  const auto contract = [&](auto scalar_tag) {
    using Scalar = decltype(scalar_tag);
    detail::StepMatrixCache<Scalar> cache(cfg, grid, diag);
    const auto row = detail::pinned_row_chain<Scalar>(cfg, t, x, grid, cache, diag);
    FiberMatrix acc = FiberMatrix::zero(k);
    for (size_t j = 0; j < grid.size(); ++j) {
      const FiberMatrix a = detail::read_block(row, k, 0, int(j));
      const FiberMatrix s =
          step_kernel(cfg, t.step(t.r() - 1), grid.nodes[j], y, diag).matrix;
      acc = acc + a * s;
    }
    return acc;
  };
  out.matrix = cfg.bundle.field() == Field::Real ? contract(double{})
                                                 : contract(Cplx{});
  return out;
}

}  // namespace geoheat
