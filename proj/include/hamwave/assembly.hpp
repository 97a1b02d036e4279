#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "hamwave/errors.hpp"
#include "hamwave/geometry.hpp"
#include "hamwave/kernel.hpp"
#include "hamwave/linalg.hpp"
#include "hamwave/problems.hpp"

namespace hamwave {

enum class Scheme { cn, cnab };

inline int history_depth(Scheme s, int k) {
  if (k <= 1) return 1;          // initialization step needs alpha^0 only
  if (s == Scheme::cn) return 2; // alpha^{k-1}, alpha^{k-2}
  return k == 2 ? 2 : 3;         // CNAB needs alpha^{k-3} from k >= 3
}

/// Coefficient history for one step: alpha[0] = alpha^{k-1},
/// alpha[1] = alpha^{k-2}, alpha[2] = alpha^{k-3}; plus the cached values of
/// the initial velocity interpolant at the collocation and quadrature points.
struct History {
  std::vector<VectorXd> alpha;
  VectorXd v0_X;
  VectorXd v0_P;

  const VectorXd& back(int age) const {  // age 1 -> alpha^{k-1}
    if (age < 1 || age > static_cast<int>(alpha.size()))
      throw StateError("history does not hold alpha^{k-" + std::to_string(age) + "}");
    return alpha[age - 1];
  }
};

using ScalarFn = std::function<double(double)>;

/// Kernel interpolation on the trial centers: solves Phi(Z,Z) alpha = f(Z).
inline VectorXd interpolate(const VectorXd& values_at_Z, const MatrixXd& phi_ZZ) {
  VectorXd alpha = solve_spd_refined(phi_ZZ, values_at_Z, "interpolate");
  const double resid = (phi_ZZ * alpha - values_at_Z).norm();
  if (resid > 1e-10 * std::max(1.0, values_at_Z.norm()))
    throw FactorizationError("interpolate: residual exceeds 1e-10 * ||f(Z)||", -1,
                             resid / std::max(1e-300, values_at_Z.norm()));
  return alpha;
}

inline VectorXd interpolate(const std::function<double(const Eigen::Vector2d&)>& f,
                            const PointSet& Z, const KernelSpec& spec) {
  VectorXd fz(Z.size());
  for (int i = 0; i < Z.size(); ++i) fz(i) = f(Z.point(i));
  MatrixXd phi_ZZ = kernel_matrix(spec, KernelOperator::identity(), Z, Z);
  return interpolate(fz, phi_ZZ);
}

/// Collocation matrix A = [ Phi - (tau^2/4) Lap Phi at (X,Z) ;
///                          h^{-theta} [B Phi](Y,Z) ].
inline MatrixXd assemble_A(const KernelSpec& spec, const PointSet& Z, const PointSet& X,
                           const PointSet& Y, BcKind bc, const MatrixXd& normals_Y,
                           double tau, double theta, double h) {
  if (X.size() + Y.size() < Z.size())
    throw InvalidArgument("assemble_A: undersampled system (n_X + n_Y < n_Z)");
  MatrixXd phi_XZ, lap_XZ;
  kernel_blocks(spec, X, Z, &phi_XZ, &lap_XZ, nullptr);
  MatrixXd bphi = (bc == BcKind::dirichlet)
                      ? kernel_matrix(spec, KernelOperator::identity(), Y, Z)
                      : kernel_matrix(spec, KernelOperator::normal(normals_Y), Y, Z);
  MatrixXd A(X.size() + Y.size(), Z.size());
  A.topRows(X.size()) = phi_XZ - (tau * tau / 4.0) * lap_XZ;
  A.bottomRows(Y.size()) = std::pow(h, -theta) * bphi;
  return A;
}

/// Constraint factor B: row blocks (sqrt2/tau) W^{1/2} Phi(P,Z) and
/// (sqrt2/2) W^{1/2} D^xi Phi(P,Z) per axis.
inline MatrixXd assemble_B(const KernelSpec& spec, const PointSet& Z, const PointSet& P,
                           const VectorXd& w, double tau) {
  if ((w.array() < 0).any()) throw InvalidArgument("assemble_B: negative weights");
  MatrixXd phi_PZ;
  std::vector<MatrixXd> grads;
  kernel_blocks(spec, P, Z, &phi_PZ, nullptr, &grads);
  const int d = P.dim(), nP = P.size(), nZ = Z.size();
  const VectorXd sqw = w.cwiseSqrt();
  MatrixXd B((d + 1) * nP, nZ);
  B.topRows(nP) = (std::sqrt(2.0) / tau) * sqw.asDiagonal() * phi_PZ;
  for (int a = 0; a < d; ++a)
    B.middleRows((a + 1) * nP, nP) = (std::sqrt(2.0) / 2.0) * sqw.asDiagonal() * grads[a];
  return B;
}

/// d = [ -(sqrt2/2) W^{1/2} d_P ; zeros ] matching B's block layout.
inline VectorXd lift_d(const VectorXd& d_P, const VectorXd& w, int dim) {
  VectorXd d = VectorXd::Zero((dim + 1) * d_P.size());
  d.head(d_P.size()) = -(std::sqrt(2.0) / 2.0) * w.cwiseSqrt().cwiseProduct(d_P);
  return d;
}

/// Weighted Gram matrices G_Phi = Phi(P,Z)^T W Phi(P,Z) and
/// G_grad = sum_xi [D^xi Phi]^T W [D^xi Phi].
inline std::pair<MatrixXd, MatrixXd> gram_from_blocks(const MatrixXd& phi_PZ,
                                                      const std::vector<MatrixXd>& grads,
                                                      const VectorXd& w) {
  MatrixXd g_phi = phi_PZ.transpose() * w.asDiagonal() * phi_PZ;
  g_phi = 0.5 * (g_phi + g_phi.transpose()).eval();
  MatrixXd g_grad = MatrixXd::Zero(phi_PZ.cols(), phi_PZ.cols());
  for (const auto& g : grads) g_grad.noalias() += g.transpose() * w.asDiagonal() * g;
  g_grad = 0.5 * (g_grad + g_grad.transpose()).eval();
  return {std::move(g_phi), std::move(g_grad)};
}

inline std::pair<MatrixXd, MatrixXd> gram_matrices(const KernelSpec& spec,
                                                   const PointSet& Z, const PointSet& P,
                                                   const VectorXd& w) {
  MatrixXd phi_PZ;
  std::vector<MatrixXd> grads;
  kernel_blocks(spec, P, Z, &phi_PZ, nullptr, &grads);
  return gram_from_blocks(phi_PZ, grads, w);
}

// ---------------------------------------------------------------------------
// Scheme- and step-specific formulas. The value vectors are evaluations of the
// historical solutions at the block's points:
//   u_km1 = Phi(.,Z) alpha^{k-1},  lap_km1 = LapPhi(.,Z) alpha^{k-1}, etc.
// For k = 1, u_km1/lap_km1 refer to the initial interpolant u^0.
// ---------------------------------------------------------------------------

namespace formulas {

inline VectorXd apply_fn(const ScalarFn& fn, const VectorXd& v) {
  VectorXd out(v.size());
  for (int i = 0; i < v.size(); ++i) out(i) = fn(v(i));
  return out;
}

/// Interior right-hand side b_X for the unified scheme at step k. `u_eta`
/// must hold Phi(X,Z) * eta whenever the formula references the iterate
/// (k = 1 for both schemes, k >= 2 for CN).
inline VectorXd b_interior(Scheme s, int k, double tau, const ScalarFn& fprime,
                           const VectorXd& u_km1, const VectorXd& lap_km1,
                           const VectorXd* u_km2, const VectorXd* lap_km2,
                           const VectorXd* u_km3, const VectorXd* v0,
                           const VectorXd* u_eta) {
  const double t2 = tau * tau;
  if (k < 1) throw InvalidArgument("b_interior: k must be >= 1");
  if (k == 1) {
    if (!v0 || !u_eta) throw StateError("b_interior: initialization needs v0 and eta");
    return (t2 / 4.0) * lap_km1 + u_km1 + tau * (*v0) -
           (t2 / 2.0) * apply_fn(fprime, 0.5 * (*u_eta + u_km1));
  }
  if (s == Scheme::cn) {
    if (!u_km2 || !lap_km2 || !u_eta)
      throw StateError("b_interior: CN at k >= 2 needs alpha^{k-2} values and eta");
    return (t2 / 2.0) * lap_km1 + 2.0 * u_km1 + (t2 / 4.0) * (*lap_km2) - *u_km2 -
           (t2 / 2.0) * apply_fn(fprime, 0.5 * (*u_eta + u_km1)) -
           (t2 / 2.0) * apply_fn(fprime, 0.5 * (u_km1 + *u_km2));
  }
  if (k == 2) {
    if (!u_km2 || !v0) throw StateError("b_interior: CNAB at k = 2 needs u^0 and v^0");
    return (t2 / 4.0) * lap_km1 + 3.0 * u_km1 - 2.0 * (*u_km2) - tau * (*v0) -
           (t2 / 2.0) * apply_fn(fprime, 0.5 * (3.0 * u_km1 - *u_km2));
  }
  if (!u_km2 || !lap_km2 || !u_km3)
    throw StateError("b_interior: CNAB at k >= 3 needs three levels of history");
  return (t2 / 2.0) * lap_km1 + 2.0 * u_km1 + (t2 / 4.0) * (*lap_km2) - *u_km2 -
         (t2 / 2.0) * apply_fn(fprime, 0.5 * (3.0 * u_km1 - *u_km2)) -
         (t2 / 2.0) * apply_fn(fprime, 0.5 * (3.0 * (*u_km2) - *u_km3));
}

/// Step-dependent energy offset d_P^{k-1} at the quadrature points.
inline VectorXd d_P(Scheme s, int k, double tau, const ScalarFn& fprime,
                    const VectorXd& u_km1, const VectorXd* lap_km1,
                    const VectorXd* u_km2, const VectorXd* lap_km2,
                    const VectorXd* u_km3, const VectorXd* v0) {
  if (k < 1) throw InvalidArgument("d_P: k must be >= 1");
  if (k == 1) {
    if (!v0) throw StateError("d_P: initialization needs v^0 values");
    return -(2.0 / tau) * u_km1 - *v0;
  }
  if (s == Scheme::cnab && k == 2) {
    if (!u_km2 || !v0) throw StateError("d_P: CNAB at k = 2 needs u^0 and v^0");
    return -(4.0 / tau) * u_km1 + (2.0 / tau) * (*u_km2) + *v0;
  }
  if (!lap_km1 || !u_km2 || !lap_km2)
    throw StateError("d_P: needs two levels of history with Laplacians");
  VectorXd out = -(tau / 4.0) * (*lap_km1) - (3.0 / tau) * u_km1 -
                 (tau / 4.0) * (*lap_km2) + (1.0 / tau) * (*u_km2);
  if (s == Scheme::cn)
    out += (tau / 2.0) * apply_fn(fprime, 0.5 * (u_km1 + *u_km2));
  else {
    if (!u_km3) throw StateError("d_P: CNAB at k >= 3 needs alpha^{k-3} values");
    out += (tau / 2.0) * apply_fn(fprime, 0.5 * (3.0 * (*u_km2) - *u_km3));
  }
  return out;
}

/// Semi-discrete velocity v^k evaluated at a point block.
inline VectorXd v_values(Scheme s, int k, double tau, const ScalarFn& fprime,
                         const VectorXd& u_k, const VectorXd& u_km1,
                         const VectorXd* lap_km1, const VectorXd* u_km2,
                         const VectorXd* lap_km2, const VectorXd* u_km3,
                         const VectorXd* v0) {
  if (k < 1) throw InvalidArgument("v_values: k must be >= 1");
  if (k == 1) {
    if (!v0) throw StateError("v_values: initialization needs v^0 values");
    return (2.0 / tau) * (u_k - u_km1) - *v0;
  }
  if (s == Scheme::cnab && k == 2) {
    if (!u_km2 || !v0) throw StateError("v_values: CNAB at k = 2 needs u^0 and v^0");
    return (2.0 / tau) * u_k - (4.0 / tau) * u_km1 + (2.0 / tau) * (*u_km2) + *v0;
  }
  if (!lap_km1 || !u_km2 || !lap_km2)
    throw StateError("v_values: needs two levels of history with Laplacians");
  VectorXd out = (2.0 / tau) * u_k - (tau / 4.0) * (*lap_km1) - (3.0 / tau) * u_km1 -
                 (tau / 4.0) * (*lap_km2) + (1.0 / tau) * (*u_km2);
  if (s == Scheme::cn)
    out += (tau / 2.0) * apply_fn(fprime, 0.5 * (u_km1 + *u_km2));
  else {
    if (!u_km3) throw StateError("v_values: CNAB at k >= 3 needs alpha^{k-3} values");
    out += (tau / 2.0) * apply_fn(fprime, 0.5 * (3.0 * (*u_km2) - *u_km3));
  }
  return out;
}

}  // namespace formulas

/// Fully discretized energy E_w(alpha) = Q(alpha) + N(alpha):
///   Q = alpha^T ((2/tau^2) G_Phi + 1/2 G_grad) alpha
///       + (2/tau) d_P^T W Phi(P,Z) alpha + 1/2 d_P^T W d_P,
///   N = 1^T W F(Phi(P,Z) alpha).
inline double energy(const VectorXd& alpha, const VectorXd& d_P, const MatrixXd& gram_phi,
                     const MatrixXd& gram_grad, const MatrixXd& phi_PZ, const VectorXd& w,
                     const ScalarFn& f, double tau) {
  const VectorXd u_P = phi_PZ * alpha;
  const double quad =
      alpha.dot((2.0 / (tau * tau)) * (gram_phi * alpha) + 0.5 * (gram_grad * alpha)) +
      (2.0 / tau) * d_P.cwiseProduct(w).dot(u_P) + 0.5 * d_P.cwiseProduct(w).dot(d_P);
  double nonlin = 0.0;
  for (int i = 0; i < u_P.size(); ++i) nonlin += w(i) * f(u_P(i));
  return quad + nonlin;
}

/// Constraint nonlinearity N_F(eta) = 1^T W F(Phi(P,Z) eta) - E0.
inline double constraint_nonlinearity(const VectorXd& u_P, const VectorXd& w,
                                      const ScalarFn& f, double E0) {
  double acc = 0.0;
  for (int i = 0; i < u_P.size(); ++i) acc += w(i) * f(u_P(i));
  return acc - E0;
}

inline double constraint_nonlinearity(const VectorXd& eta, const MatrixXd& phi_PZ,
                                      const VectorXd& w, const ScalarFn& f, double E0) {
  return constraint_nonlinearity(VectorXd(phi_PZ * eta), w, f, E0);
}

/// Energy of a (u, v) field pair sampled at the quadrature points:
///   sum_j w_j [ 1/2 v_j^2 + 1/2 |grad u|_j^2 + F(u_j) ].
inline double energy_from_fields(const VectorXd& u_P, const VectorXd& v_P,
                                 const std::vector<VectorXd>& grad_u_P,
                                 const VectorXd& w, const ScalarFn& f) {
  double acc = 0.0;
  for (int i = 0; i < u_P.size(); ++i) {
    double g2 = 0.0;
    for (const auto& g : grad_u_P) g2 += g(i) * g(i);
    acc += w(i) * (0.5 * v_P(i) * v_P(i) + 0.5 * g2 + f(u_P(i)));
  }
  return acc;
}

enum class EnergyMode { analytic, interpolant };

/// Initial energy E0: the problem's exact value when available, otherwise the
/// quadrature energy of the kernel interpolants of the initial data.
inline double initial_energy(const ProblemSpec& prob, const VectorXd& u0_P,
                             const VectorXd& v0_P, const std::vector<VectorXd>& grad_u0_P,
                             const VectorXd& w, EnergyMode mode) {
  if (mode == EnergyMode::analytic) {
    if (!prob.exact_E0)
      throw InvalidArgument("initial_energy: no analytic E0 for " + prob.id);
    return *prob.exact_E0;
  }
  return energy_from_fields(u0_P, v0_P, grad_u0_P, w, prob.f);
}

// ---------------------------------------------------------------------------
// Assembled collocation system shared by every step of a run.
// ---------------------------------------------------------------------------

struct CollocationSystem {
  KernelSpec kspec;
  PointSet Z, X, Y, P;
  VectorXd w;            // quadrature weights of P
  MatrixXd normals_Y;    // outward normals at Y (Neumann runs)
  BcKind bc = BcKind::dirichlet;
  double tau = 0.0;
  double theta = 0.0;
  double h = 0.0;                // fill distance of Z
  double boundary_weight = 1.0;  // h^{-theta}

  MatrixXd phi_XZ, lap_XZ;  // interior collocation blocks
  MatrixXd bphi_YZ;         // boundary operator rows (unweighted)
  MatrixXd phi_PZ, lap_PZ;  // quadrature blocks
  std::vector<MatrixXd> grad_PZ;  // kept only when requested
  MatrixXd gram_phi, gram_grad;

  GsvdFactors gsvd;  // V truncated to its first n_P rows (d is supported there)

  int n_Z() const { return Z.size(); }
  int n_X() const { return X.size(); }
  int n_Y() const { return Y.size(); }
  int n_P() const { return P.size(); }

  /// V^T d and the out-of-range constant for d = lift_d(d_P):
  /// only the first quadrature block of d is nonzero.
  void set_d_from_dP(DiagSolveCache& cache, const VectorXd& d_P) const {
    VectorXd d_top = -(std::sqrt(2.0) / 2.0) * w.cwiseSqrt().cwiseProduct(d_P);
    cache.Vd.noalias() = gsvd.V.topRows(P.size()).transpose() * d_top;
    cache.d_out_sq = std::max(0.0, d_top.squaredNorm() - cache.Vd.squaredNorm());
  }
};

/// One-time assembly: kernel blocks, Gram matrices, A, B, and their GSVD.
inline CollocationSystem build_system(const KernelSpec& spec, PointSet Z, PointSet X,
                                      PointSet Y, PointSet P, BcKind bc,
                                      MatrixXd normals_Y, double tau, double theta,
                                      double h, bool keep_gradients = false) {
  spec.validate_laplacian();
  if (X.size() + Y.size() < Z.size())
    throw InvalidArgument("build_system: undersampled system (n_X + n_Y < n_Z)");
  CollocationSystem sys;
  sys.kspec = spec;
  sys.w = P.weights;
  sys.bc = bc;
  sys.tau = tau;
  sys.theta = theta;
  sys.h = h;
  sys.boundary_weight = std::pow(h, -theta);
  sys.normals_Y = std::move(normals_Y);

  kernel_blocks(spec, X, Z, &sys.phi_XZ, &sys.lap_XZ, nullptr);
  sys.bphi_YZ = (bc == BcKind::dirichlet)
                    ? kernel_matrix(spec, KernelOperator::identity(), Y, Z)
                    : kernel_matrix(spec, KernelOperator::normal(sys.normals_Y), Y, Z);

  std::vector<MatrixXd> grads;
  kernel_blocks(spec, P, Z, &sys.phi_PZ, &sys.lap_PZ, &grads);
  std::tie(sys.gram_phi, sys.gram_grad) = gram_from_blocks(sys.phi_PZ, grads, sys.w);

  const int nP = P.size(), nZ = Z.size(), d = P.dim();
  MatrixXd A(X.size() + Y.size(), nZ);
  A.topRows(X.size()) = sys.phi_XZ - (tau * tau / 4.0) * sys.lap_XZ;
  A.bottomRows(Y.size()) = sys.boundary_weight * sys.bphi_YZ;

  MatrixXd B((d + 1) * nP, nZ);
  const VectorXd sqw = sys.w.cwiseSqrt();
  B.topRows(nP) = (std::sqrt(2.0) / tau) * sqw.asDiagonal() * sys.phi_PZ;
  for (int a = 0; a < d; ++a) {
    B.middleRows((a + 1) * nP, nP) =
        (std::sqrt(2.0) / 2.0) * sqw.asDiagonal() * grads[a];
    if (!keep_gradients) grads[a].resize(0, 0);
  }
  if (keep_gradients) sys.grad_PZ = std::move(grads);

  sys.gsvd = gsvd(std::move(A), std::move(B));
  if (sys.gsvd.V.rows() > nP)
    sys.gsvd.V = sys.gsvd.V.topRows(nP).eval();

  sys.Z = std::move(Z);
  sys.X = std::move(X);
  sys.Y = std::move(Y);
  sys.P = std::move(P);
  return sys;
}

// ---------------------------------------------------------------------------
// Spec-surface wrappers evaluating the per-step vectors from a history of
// coefficient vectors (recomputes the needed matvecs; the time stepper keeps
// its own cache ring instead).
// ---------------------------------------------------------------------------

/// Full right-hand side b_k(eta) = [b_{X,k}; h^{-theta} g(Y)].
inline VectorXd assemble_b(const CollocationSystem& sys, const ProblemSpec& prob,
                           Scheme s, int k, const History& hist, const VectorXd* eta,
                           double t_k) {
  const auto& A1 = hist.back(1);
  VectorXd u1 = sys.phi_XZ * A1, l1 = sys.lap_XZ * A1;
  VectorXd u2, l2, u3, ueta;
  const VectorXd *pu2 = nullptr, *pl2 = nullptr, *pu3 = nullptr, *pueta = nullptr;
  if (history_depth(s, k) >= 2 && k >= 2) {
    u2 = sys.phi_XZ * hist.back(2);
    pu2 = &u2;
    if (!(s == Scheme::cnab && k == 2)) {
      l2 = sys.lap_XZ * hist.back(2);
      pl2 = &l2;
    }
  }
  if (s == Scheme::cnab && k >= 3) {
    u3 = sys.phi_XZ * hist.back(3);
    pu3 = &u3;
  }
  if (eta) {
    ueta = sys.phi_XZ * (*eta);
    pueta = &ueta;
  }
  VectorXd bX = formulas::b_interior(s, k, sys.tau, prob.fprime, u1, l1, pu2, pl2, pu3,
                                     &hist.v0_X, pueta);
  VectorXd b(sys.n_X() + sys.n_Y());
  b.head(sys.n_X()) = bX;
  for (int i = 0; i < sys.n_Y(); ++i)
    b(sys.n_X() + i) = sys.boundary_weight * prob.boundary(sys.Y.point(i), t_k);
  return b;
}

/// Energy offset d_P^{k-1} for step k.
inline VectorXd assemble_dP(const CollocationSystem& sys, const ProblemSpec& prob,
                            Scheme s, int k, const History& hist) {
  const auto& A1 = hist.back(1);
  VectorXd u1 = sys.phi_PZ * A1;
  VectorXd l1, u2, l2, u3;
  const VectorXd *pl1 = nullptr, *pu2 = nullptr, *pl2 = nullptr, *pu3 = nullptr;
  if (k >= 2) {
    u2 = sys.phi_PZ * hist.back(2);
    pu2 = &u2;
    if (!(s == Scheme::cnab && k == 2)) {
      l1 = sys.lap_PZ * A1;
      l2 = sys.lap_PZ * hist.back(2);
      pl1 = &l1;
      pl2 = &l2;
    }
  }
  if (s == Scheme::cnab && k >= 3) {
    u3 = sys.phi_PZ * hist.back(3);
    pu3 = &u3;
  }
  return formulas::d_P(s, k, sys.tau, prob.fprime, u1, pl1, pu2, pl2, pu3, &hist.v0_P);
}

/// Values of the semi-discrete velocity v^k at the quadrature points.
inline VectorXd evaluate_v(const CollocationSystem& sys, const ProblemSpec& prob,
                           Scheme s, int k, const History& hist, const VectorXd& alpha_k) {
  VectorXd uk = sys.phi_PZ * alpha_k;
  const auto& A1 = hist.back(1);
  VectorXd u1 = sys.phi_PZ * A1;
  VectorXd l1, u2, l2, u3;
  const VectorXd *pl1 = nullptr, *pu2 = nullptr, *pl2 = nullptr, *pu3 = nullptr;
  if (k >= 2) {
    u2 = sys.phi_PZ * hist.back(2);
    pu2 = &u2;
    if (!(s == Scheme::cnab && k == 2)) {
      l1 = sys.lap_PZ * A1;
      l2 = sys.lap_PZ * hist.back(2);
      pl1 = &l1;
      pl2 = &l2;
    }
  }
  if (s == Scheme::cnab && k >= 3) {
    u3 = sys.phi_PZ * hist.back(3);
    pu3 = &u3;
  }
  return formulas::v_values(s, k, sys.tau, prob.fprime, uk, u1, pl1, pu2, pl2, pu3,
                            &hist.v0_P);
}

}  // namespace hamwave
