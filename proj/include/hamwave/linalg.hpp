#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <lapacke.h>

#include "hamwave/errors.hpp"

namespace hamwave {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct QrFactors {
  MatrixXd Q;  // m x n, orthonormal columns
  MatrixXd R;  // n x n, upper triangular
};

namespace detail {

inline void check_lapack(int info, const char* what) {
  if (info != 0) throw Error(std::string(what) + ": LAPACK failure");
}

/// In-place thin Householder QR of `A` (m >= n): returns R and replaces `A`
/// by its explicit thin Q factor. Rank checked against |R_ii|.
inline MatrixXd qr_inplace(MatrixXd& A, const char* caller) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (m < n) throw InvalidArgument(std::string(caller) + ": QR expects m >= n");
  VectorXd tau(n);
  check_lapack(LAPACKE_dgeqrf(LAPACK_COL_MAJOR, m, n, A.data(), m, tau.data()),
               caller);
  MatrixXd R = MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) R(i, j) = A(i, j);
  double dmax = 0.0;
  for (int i = 0; i < n; ++i) dmax = std::max(dmax, std::abs(R(i, i)));
  const double tol = std::max(m, n) * std::numeric_limits<double>::epsilon() * dmax;
  int rank = 0;
  for (int i = 0; i < n; ++i)
    if (std::abs(R(i, i)) > tol) ++rank;
  if (rank < n) {
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) dmin = std::min(dmin, std::abs(R(i, i)));
    throw FactorizationError(std::string(caller) + ": rank-deficient matrix",
                             rank, dmax / std::max(dmin, 1e-300));
  }
  check_lapack(LAPACKE_dorgqr(LAPACK_COL_MAJOR, m, n, n, A.data(), m, tau.data()),
               caller);
  return R;
}

struct ThinSvd {
  MatrixXd U;   // m x n
  VectorXd S;   // n
  MatrixXd V;   // n x n
};

/// Thin SVD via dgesdd; `A` is destroyed. lda may exceed the row count so a
/// submatrix of a larger column-major block can be factored in place.
inline ThinSvd svd_inplace(double* a, int m, int n, int lda) {
  ThinSvd out;
  out.U.resize(m, n);
  out.S.resize(n);
  MatrixXd VT(n, n);
  check_lapack(LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', m, n, a, lda, out.S.data(),
                              out.U.data(), m, VT.data(), n),
               "svd");
  out.V = VT.transpose();
  return out;
}

}  // namespace detail

/// Thin QR factorization A = Q R with explicit orthonormal Q.
inline QrFactors qr_prefactor(MatrixXd A) {
  QrFactors f;
  f.R = detail::qr_inplace(A, "qr_prefactor");
  f.Q = std::move(A);
  return f;
}

/// Generalized singular value decomposition of the pair (A, B):
///   A = U diag(C) H^T,  B = V diag(S) H^T,
/// with orthonormal-column U, V, invertible H, and c_i^2 + s_i^2 = 1.
struct GsvdFactors {
  MatrixXd U;       // mA x n
  MatrixXd V;       // mB x n
  VectorXd C, S;    // n, nonnegative
  MatrixXd H;       // n x n
  MatrixXd H_inv_T; // (H^T)^{-1}, precomputed for the eta = H^{-T} zeta map
};

/// GSVD via thin QR of the stacked pair followed by a CS decomposition of the
/// split orthonormal factor (SVD of the top block, completion of the bottom).
inline GsvdFactors gsvd(MatrixXd A, MatrixXd B) {
  const int mA = static_cast<int>(A.rows());
  const int mB = static_cast<int>(B.rows());
  const int n = static_cast<int>(A.cols());
  if (B.cols() != n) throw InvalidArgument("gsvd: column counts differ");
  if (mA < n) throw InvalidArgument("gsvd: A must have at least n rows");

  MatrixXd G(mA + mB, n);
  G.topRows(mA) = A;
  G.bottomRows(mB) = B;
  A.resize(0, 0);
  B.resize(0, 0);

  MatrixXd R = detail::qr_inplace(G, "gsvd");  // G now holds thin Q

  // CS decomposition of (Q_A, Q_B): Q_A = U C W^T, then Q_B W = V S.
  detail::ThinSvd top = detail::svd_inplace(G.data(), mA, n, mA + mB);

  GsvdFactors f;
  f.U = std::move(top.U);
  f.C = top.S.cwiseMin(1.0);  // singular values of an orthonormal block are <= 1

  MatrixXd M = G.bottomRows(mB) * top.V;  // mB x n
  G.resize(0, 0);
  f.S.resize(n);
  f.V.resize(mB, n);
  std::vector<int> degenerate;
  for (int i = 0; i < n; ++i) {
    const double s = M.col(i).norm();
    f.S(i) = s;
    if (s > 16 * std::numeric_limits<double>::epsilon())
      f.V.col(i) = M.col(i) / s;
    else {
      f.S(i) = 0.0;
      degenerate.push_back(i);
    }
  }
  // complete near-null columns of V to an orthonormal set
  for (int idx : degenerate) {
    VectorXd v = VectorXd::Zero(mB);
    bool placed = false;
    for (int seed = 0; seed < mB && !placed; ++seed) {
      v.setZero();
      v(seed) = 1.0;
      for (int j = 0; j < n; ++j) {
        if (j == idx) continue;
        if (f.S(j) == 0.0 && j > idx) continue;  // not yet filled
        v -= f.V.col(j).dot(v) * f.V.col(j);
      }
      if (v.norm() > 0.5) {
        f.V.col(idx) = v / v.norm();
        placed = true;
      }
    }
    if (!placed)
      throw FactorizationError("gsvd: cannot complete V to orthonormal columns",
                               n - static_cast<int>(degenerate.size()));
  }

  f.H = R.transpose() * top.V;        // H^T = W^T R
  // H^{-T} = (W^T R)^{-1} = R^{-1} W
  f.H_inv_T = R.triangularView<Eigen::Upper>().solve(top.V);
  return f;
}

/// Cached projections for the lambda-parameterized diagonal solve.
struct DiagSolveCache {
  VectorXd c2, s2;          // c_i^2, s_i^2
  VectorXd Ub;              // U^T b, refreshed whenever b changes
  VectorXd Vd;              // V^T d, refreshed whenever d changes
  double d_out_sq = 0.0;    // ||d||^2 - ||V^T d||^2 (component outside range(V))

  void init(const GsvdFactors& f) {
    c2 = f.C.cwiseProduct(f.C);
    s2 = f.S.cwiseProduct(f.S);
    Ub = VectorXd::Zero(f.C.size());
    Vd = VectorXd::Zero(f.C.size());
  }
  void set_b(const GsvdFactors& f, const VectorXd& b) { Ub.noalias() = f.U.transpose() * b; }
  void set_d(const GsvdFactors& f, const VectorXd& d) {
    Vd.noalias() = f.V.transpose() * d;
    d_out_sq = std::max(0.0, d.squaredNorm() - Vd.squaredNorm());
  }
};

namespace detail {
inline double shifted_denom(const DiagSolveCache& cache, double lambda, int i) {
  const double denom = cache.c2(i) + lambda * cache.s2(i);
  const double scale = cache.c2(i) + std::abs(lambda) * cache.s2(i);
  if (std::abs(denom) <= 1e-14 * scale)
    throw SingularShift("diag_solve: vanishing shifted denominator", i);
  return denom;
}
}  // namespace detail

/// Solve the shifted diagonal system for a given multiplier:
///   zeta_i = (c_i (U^T b)_i + lambda s_i (V^T d)_i) / (c_i^2 + lambda s_i^2)
/// and map back to coefficients eta = H^{-T} zeta.
inline std::pair<VectorXd, VectorXd> diag_solve(const GsvdFactors& f,
                                                const DiagSolveCache& cache,
                                                double lambda) {
  const int n = static_cast<int>(cache.c2.size());
  VectorXd zeta(n);
  for (int i = 0; i < n; ++i) {
    const double denom = detail::shifted_denom(cache, lambda, i);
    zeta(i) = (f.C(i) * cache.Ub(i) + lambda * f.S(i) * cache.Vd(i)) / denom;
  }
  VectorXd eta = f.H_inv_T * zeta;
  return {std::move(zeta), std::move(eta)};
}

/// Constraint function C_E(lambda) = ||S H^T eta(lambda) - V^T d||^2
///                                   + ||(I - V V^T) d||^2 + N_F.
inline double constraint_residual(const GsvdFactors& f, const DiagSolveCache& cache,
                                  const VectorXd& zeta, double nf_value) {
  double acc = cache.d_out_sq;
  for (int i = 0; i < zeta.size(); ++i) {
    const double r = f.S(i) * zeta(i) - cache.Vd(i);
    acc += r * r;
  }
  return acc + nf_value;
}

/// d/dlambda of the quadratic part of C_E at fixed b, d, N_F:
///   zeta'_i = (s_i (V^T d)_i - s_i^2 zeta_i) / (c_i^2 + lambda s_i^2),
///   C_E'    = 2 sum_i (s_i zeta_i - (V^T d)_i) s_i zeta'_i.
inline double constraint_derivative(const GsvdFactors& f, const DiagSolveCache& cache,
                                    double lambda, const VectorXd& zeta) {
  double acc = 0.0;
  for (int i = 0; i < zeta.size(); ++i) {
    const double denom = detail::shifted_denom(cache, lambda, i);
    const double dzeta = (f.S(i) * cache.Vd(i) - cache.s2(i) * zeta(i)) / denom;
    acc += (f.S(i) * zeta(i) - cache.Vd(i)) * f.S(i) * dzeta;
  }
  return 2.0 * acc;
}

/// Symmetric linear solve with one step of iterative refinement; used for
/// kernel interpolation systems. Throws on numerical singularity.
inline VectorXd solve_spd_refined(const MatrixXd& A, const VectorXd& rhs,
                                  const char* caller) {
  Eigen::PartialPivLU<MatrixXd> lu(A);
  const double rc = lu.rcond();
  if (!(rc > std::numeric_limits<double>::epsilon()))
    throw FactorizationError(std::string(caller) + ": numerically singular system",
                             -1, 1.0 / std::max(rc, 1e-300));
  VectorXd x = lu.solve(rhs);
  VectorXd r = rhs - A * x;
  x += lu.solve(r);
  return x;
}

}  // namespace hamwave
