#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>

#include "geoheat/kernels.hpp"
#include "geoheat/rng.hpp"

namespace geoheat {

/// Dense operator matrix acting on stacked section values at the grid nodes
/// (k entries per node). Quadrature weights are folded in, so applying the
/// matrix to sampled section values performs the kernel integrals.
template <class Scalar>
struct KernelMatrixT {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> op;
  int rank = 1;
  std::vector<double> weights;

  FiberMatrix kernel_block(int i, int j) const {
    FiberMatrix f(rank);
    for (int a = 0; a < rank; ++a)
      for (int c = 0; c < rank; ++c)
        f(a, c) = op(i * rank + a, j * rank + c) / weights[size_t(j)];
    return f;
  }
  /// Kernel value for rank-1 problems.
  Scalar kernel_value(int i, int j) const {
    return op(i, j) / weights[size_t(j)];
  }
};

using KernelMatrix = KernelMatrixT<double>;

template <class Scalar>
using SectionVec = Eigen::Vector<Scalar, Eigen::Dynamic>;

/// Samples a scalar function into a rank-1 section vector.
inline Eigen::VectorXd scalar_section(
    const GridQuadrature& grid, const std::function<double(const Point&)>& f) {
  Eigen::VectorXd u(static_cast<Eigen::Index>(grid.size()));
  for (size_t i = 0; i < grid.size(); ++i)
    u[static_cast<Eigen::Index>(i)] = f(grid.nodes[i]);
  return u;
}

namespace detail {

template <class Scalar>
SectionVec<Scalar> compose_apply_impl(const StepKernelConfig& cfg,
                                      std::span<const double> steps,
                                      const SectionVec<Scalar>& u,
                                      const GridQuadrature& grid,
                                      CutDiagnostics* diag) {
  const int k = cfg.bundle.rank();
  if (u.size() != static_cast<Eigen::Index>(grid.size()) * k)
    throw DomainError("section size does not match grid");
  SectionVec<Scalar> v = u;
  StepMatrixCache<Scalar> cache(cfg, grid, diag);
  for (size_t idx = steps.size(); idx-- > 0;) {
    SectionVec<Scalar> wv = v;
    for (size_t j = 0; j < grid.size(); ++j)
      wv.segment(static_cast<Eigen::Index>(j) * k, k) *= grid.weights[j];
    v = cache.get(steps[idx]) * wv;
  }
  return v;
}

template <class Scalar>
KernelMatrixT<Scalar> heat_kernel_matrix_impl(const StepKernelConfig& cfg,
                                              const Partition& t,
                                              const GridQuadrature& grid,
                                              CutDiagnostics* diag) {
  const int k = cfg.bundle.rank();
  const auto n = static_cast<Eigen::Index>(grid.size());
  StepMatrixCache<Scalar> cache(cfg, grid, diag);
  Eigen::Vector<Scalar, Eigen::Dynamic> wdiag(n * k);
  for (size_t j = 0; j < grid.size(); ++j)
    wdiag.segment(static_cast<Eigen::Index>(j) * k, k)
        .setConstant(Scalar(grid.weights[j]));
  KernelMatrixT<Scalar> out;
  out.rank = k;
  out.weights = grid.weights;
  out.op = cache.get(t.step(0)) * wdiag.asDiagonal();
  for (int j = 2; j <= t.r(); ++j)
    out.op = (out.op * (cache.get(t.step(j - 1)) * wdiag.asDiagonal())).eval();
  return out;
}

}  // namespace detail

/// Applies the composed one-step operators for the given steps (rightmost
/// step first) to a section sampled on the grid. An empty step list returns
/// the section unchanged.
inline Eigen::VectorXd compose_apply(const StepKernelConfig& cfg,
                                     std::span<const double> steps,
                                     const Eigen::VectorXd& u,
                                     const GridQuadrature& grid,
                                     CutDiagnostics* diag = nullptr) {
  if (cfg.bundle.field() != Field::Real)
    throw PreconditionError("real section required for a real bundle apply");
  return detail::compose_apply_impl<double>(cfg, steps, u, grid, diag);
}
inline Eigen::VectorXd compose_apply(const StepKernelConfig& cfg,
                                     const Partition& t,
                                     const Eigen::VectorXd& u,
                                     const GridQuadrature& grid,
                                     CutDiagnostics* diag = nullptr) {
  return compose_apply(cfg, std::span<const double>(t.steps()), u, grid, diag);
}
inline Eigen::VectorXcd compose_apply_complex(const StepKernelConfig& cfg,
                                              std::span<const double> steps,
                                              const Eigen::VectorXcd& u,
                                              const GridQuadrature& grid,
                                              CutDiagnostics* diag = nullptr) {
  return detail::compose_apply_impl<Cplx>(cfg, steps, u, grid, diag);
}

/// Multi-step kernel sampled on the grid as an operator matrix: the chain of
/// per-step kernel matrices with quadrature weights.
inline KernelMatrix heat_kernel_matrix(const StepKernelConfig& cfg,
                                       const Partition& t,
                                       const GridQuadrature& grid,
                                       CutDiagnostics* diag = nullptr) {
  if (cfg.bundle.field() != Field::Real)
    throw PreconditionError("heat_kernel_matrix needs a real bundle; use "
                            "heat_kernel_matrix_complex");
  return detail::heat_kernel_matrix_impl<double>(cfg, t, grid, diag);
}
inline KernelMatrixT<Cplx> heat_kernel_matrix_complex(
    const StepKernelConfig& cfg, const Partition& t, const GridQuadrature& grid,
    CutDiagnostics* diag = nullptr) {
  return detail::heat_kernel_matrix_impl<Cplx>(cfg, t, grid, diag);
}

namespace detail {

inline Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& a, int p) {
  Eigen::MatrixXd result;
  Eigen::MatrixXd base = a;
  bool have = false;
  int e = p;
  while (e > 0) {
    if (e & 1) {
      result = have ? Eigen::MatrixXd(result * base) : base;
      have = true;
    }
    e >>= 1;
    if (e > 0) base = (base * base).eval();
  }
  return result;
}

}  // namespace detail

/// Quadrature of the closed-polygon functional: sum_i w_i tr k_T(x_i, x_i),
/// i.e. the trace of the operator-matrix chain. Uniform partitions use
/// power-of-two squaring so only O(log r) dense products are needed.
inline double trace_estimate(const StepKernelConfig& cfg, const Partition& t,
                             const GridQuadrature& grid,
                             CutDiagnostics* diag = nullptr) {
  bool uniform = true;
  for (int j = 1; j < t.r(); ++j)
    if (t.step(j) != t.step(0)) uniform = false;
  if (!uniform || t.r() <= 2) {
    const KernelMatrix km = heat_kernel_matrix(cfg, t, grid, diag);
    return km.op.trace();
  }
  detail::StepMatrixCache<double> cache(cfg, grid, diag);
  const auto n = static_cast<Eigen::Index>(grid.size()) * cfg.bundle.rank();
  Eigen::VectorXd wdiag(n);
  const int k = cfg.bundle.rank();
  for (size_t j = 0; j < grid.size(); ++j)
    wdiag.segment(static_cast<Eigen::Index>(j) * k, k)
        .setConstant(grid.weights[j]);
  const Eigen::MatrixXd a = cache.get(t.step(0)) * wdiag.asDiagonal();
  const int half = t.r() / 2;
  const Eigen::MatrixXd pa = detail::matrix_power(a, half);
  const Eigen::MatrixXd pb =
      (t.r() - half == half) ? pa : Eigen::MatrixXd(pa * a);
  // tr(pa * pb) without forming the product
  return pa.cwiseProduct(pb.transpose()).sum();
}

/// Monte Carlo estimate of the start-pinned functional.
struct McEstimate {
  FiberVector mean;                    // fiber value at the start point
  std::array<double, kMaxRank> stderr_per_component{};
  double zero_weight_fraction = 0.0;
  long paths = 0;
};

/// Start-pinned Monte Carlo: draws Gaussian polygons from the normal-
/// coordinate proposal and weights them with the volume-distortion, curvature
/// and potential factors of the selected kernel family. The lambda = -1
/// family is sampled exactly (unit weights); steps past the injectivity
/// radius contribute zero. Paths are processed in fixed chunks so results do
/// not depend on the worker count.
inline McEstimate compose_apply_mc(
    const StepKernelConfig& cfg, const Partition& t,
    const std::function<FiberVector(const Point&)>& u, const Point& x0,
    long paths, uint64_t seed) {
  if (paths < 2) throw DomainError("compose_apply_mc: need at least 2 paths");
  const Bundle& b = cfg.bundle;
  const Manifold& m = b.base();
  const int k = b.rank();
  const int r = t.r();
  const bool endpoint_curv = cfg.variant == KernelVariant::EndpointScal;
  double lambda = cfg.lambda;
  if (cfg.variant == KernelVariant::Plain) lambda = 1.0;
  if (cfg.variant == KernelVariant::CutoffMu) lambda = 0.0;
  if (endpoint_curv) lambda = 1.0;
  const double mu_expo = 0.5 * (lambda + 1.0);  // kernel factor times sampler Jacobian
  const bool need_fiber = b.has_potential() || !b.trivial_connection();

  struct ChunkAcc {
    std::array<Cplx, kMaxRank> sum{};
    std::array<double, kMaxRank> sumsq{};
    long zero = 0;
  };
  const long chunk_size = 16384;
  const long num_chunks = (paths + chunk_size - 1) / chunk_size;
  std::vector<ChunkAcc> acc(static_cast<size_t>(num_chunks));

  parallel_for(size_t(num_chunks), [&](size_t cbegin, size_t cend) {
    for (size_t c = cbegin; c < cend; ++c) {
      ChunkAcc& a = acc[c];
      const long p0 = long(c) * chunk_size;
      const long p1 = std::min(paths, p0 + chunk_size);
      for (long p = p0; p < p1; ++p) {
        const CounterRng rng(seed, uint64_t(p));
        const SampledPolygon sample = sample_pinned_start(m, x0, t, rng);
        if (!sample.alive) {
          ++a.zero;
          continue;
        }
        const GeodesicPolygon& poly = sample.polygon;
        double logw = 0.0;
        FiberMatrix chain = FiberMatrix::identity(k);
        for (int j = 1; j <= r; ++j) {
          const double tj = t.step(j - 1);
          if (mu_expo != 0.0)
            logw += mu_expo * std::log(m.volume_distortion(poly.vertex(j - 1),
                                                           poly.vertex(j)));
          if (endpoint_curv)
            logw += tj / 6.0 *
                    (m.scalar_curvature(poly.vertex(j - 1)) +
                     m.scalar_curvature(poly.vertex(j)));
          else
            logw += (lambda + 1.0) / 6.0 * tj * m.scalar_curvature();
          if (need_fiber) {
            const GeodesicSegment seg{poly.vertex(j - 1), poly.vertex(j),
                                      t.sigma(j - 1), t.sigma(j)};
            FiberMatrix factor =
                transport(b, seg, seg.b, seg.a).matrix;  // end -> start
            if (b.has_potential())
              factor = factor *
                       (conjugated_potential_integral(b, seg, cfg.quad_order) *
                        -1.0)
                           .exp();
            chain = chain * factor;
          }
        }
        const double w = std::exp(logw);
        FiberVector val = u(poly.vertex(r));
        if (need_fiber) val = chain * val;
        for (int i = 0; i < k; ++i) {
          const Cplx vi = w * val[i];
          a.sum[size_t(i)] += vi;
          a.sumsq[size_t(i)] += std::norm(vi);
        }
      }
    }
  });

  McEstimate out;
  out.paths = paths;
  out.mean = FiberVector::zero(k);
  std::array<Cplx, kMaxRank> total{};
  std::array<double, kMaxRank> totalsq{};
  long zeros = 0;
  for (const ChunkAcc& a : acc) {
    for (int i = 0; i < k; ++i) {
      total[size_t(i)] += a.sum[size_t(i)];
      totalsq[size_t(i)] += a.sumsq[size_t(i)];
    }
    zeros += a.zero;
  }
  const double n = static_cast<double>(paths);
  for (int i = 0; i < k; ++i) {
    out.mean[i] = total[size_t(i)] / n;
    const double var =
        std::max(0.0, (totalsq[size_t(i)] - std::norm(total[size_t(i)]) / n) /
                          (n - 1.0));
    out.stderr_per_component[size_t(i)] = std::sqrt(var / n);
  }
  out.zero_weight_fraction = static_cast<double>(zeros) / n;
  return out;
}

/// Pointwise kernel-domination check against the scalar comparison problem
/// with potential v: returns max over node pairs of |k_T(x,y)|_op - k~_T(x,y).
/// Requires v(x) <= min eigenvalue of V(x) at every node.
inline double hsu_compare(const StepKernelConfig& cfg,
                          const PotentialFn& lower_bound, const Partition& t,
                          const GridQuadrature& grid,
                          CutDiagnostics* diag = nullptr) {
  const Bundle& b = cfg.bundle;
  for (const Point& p : grid.nodes) {
    const double vmin = potential_at(b, p).min_eigenvalue_hermitian();
    const double low = lower_bound ? lower_bound(b.base(), p)(0, 0).real() : 0.0;
    if (low > vmin + 1e-12)
      throw PreconditionError(
          "comparison potential exceeds an eigenvalue of the bundle potential");
  }
  Bundle comparison(b.base(), 1, Field::Real, TrivialConnection{}, lower_bound);
  StepKernelConfig comparison_cfg{std::move(comparison), cfg.variant,
                                  cfg.lambda, cfg.chi, cfg.quad_order};
  const KernelMatrix full = heat_kernel_matrix(cfg, t, grid, diag);
  const KernelMatrix scalar = heat_kernel_matrix(comparison_cfg, t, grid, diag);
  const auto n = static_cast<int>(grid.size());
  std::vector<double> row_max(grid.size(),
                              -std::numeric_limits<double>::infinity());
  parallel_for(grid.size(), [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        const double lhs = full.kernel_block(int(i), j).op_norm();
        const double rhs = scalar.kernel_value(int(i), j);
        mx = std::max(mx, lhs - rhs);
      }
      row_max[i] = mx;
    }
  });
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : row_max) mx = std::max(mx, v);
  return mx;
}

}  // namespace geoheat
