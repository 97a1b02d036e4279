#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hamwave/linalg.hpp"

using namespace hamwave;
using Catch::Approx;

namespace {

std::mt19937& rng() {
  static std::mt19937 gen(20240811);
  return gen;
}

MatrixXd random_matrix(int m, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd A(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) A(i, j) = g(rng());
  return A;
}

VectorXd random_vector(int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng());
  return v;
}

double recon_error(const GsvdFactors& f, const MatrixXd& A, const MatrixXd& B) {
  double ea = (f.U * f.C.asDiagonal() * f.H.transpose() - A).norm() /
              std::max(1e-300, A.norm());
  double eb = (f.V * f.S.asDiagonal() * f.H.transpose() - B).norm() /
              std::max(1e-300, B.norm());
  return std::max(ea, B.norm() == 0.0 ? 0.0 : eb);
}

}  // namespace

TEST_CASE("qr_prefactor contracts") {
  // orthogonal input: R = I up to column signs
  MatrixXd Q0 = qr_prefactor(random_matrix(30, 8)).Q;
  auto f0 = qr_prefactor(Q0);
  for (int i = 0; i < 8; ++i) CHECK(std::abs(f0.R(i, i)) == Approx(1.0).epsilon(1e-12));
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j) CHECK(f0.R(i, j) == Approx(0.0).margin(1e-12));

  auto A = random_matrix(50, 20);
  auto f = qr_prefactor(A);
  CHECK((f.Q.transpose() * f.Q - MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((A - f.Q * f.R).norm() / A.norm() < 1e-10);

  // rank deficiency reports the numerical rank
  MatrixXd D = random_matrix(40, 6);
  D.col(5) = D.col(0) + D.col(1);
  try {
    qr_prefactor(D);
    FAIL("expected FactorizationError");
  } catch (const FactorizationError& e) {
    CHECK(e.rank == 5);
  }
}

TEST_CASE("gsvd of the 1x1 pair A = B = 1") {
  MatrixXd A(1, 1), B(1, 1);
  A << 1.0;
  B << 1.0;
  auto f = gsvd(A, B);
  CHECK(f.C(0) == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));
  CHECK(f.S(0) == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));
  CHECK(std::abs(f.H(0, 0)) == Approx(std::sqrt(2.0)).epsilon(1e-13));
  CHECK(recon_error(f, A, B) < 1e-13);
}

TEST_CASE("gsvd with B = 0 degenerates to an orthogonal factorization of A") {
  MatrixXd A = random_matrix(9, 4);
  MatrixXd B = MatrixXd::Zero(6, 4);
  auto f = gsvd(A, B);
  CHECK(f.S.cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 4; ++i) CHECK(f.C(i) == Approx(1.0).epsilon(1e-12));
  CHECK((f.U * f.H.transpose() - A).norm() / A.norm() < 1e-12);
  CHECK((f.V.transpose() * f.V - MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gsvd reconstruction and orthonormality on random pairs") {
  auto A = random_matrix(12, 6);
  auto B = random_matrix(14, 6);
  auto f = gsvd(A, B);
  CHECK(recon_error(f, A, B) < 1e-10);

  for (auto [m, p, n] : {std::array<int, 3>{8, 8, 4},
                         std::array<int, 3>{30, 20, 10},
                         std::array<int, 3>{200, 150, 60}}) {
    for (int rep = 0; rep < 3; ++rep) {
      auto Ar = random_matrix(m, n);
      auto Br = random_matrix(p, n);
      auto fr = gsvd(Ar, Br);
      CHECK(recon_error(fr, Ar, Br) < 1e-10);
      CHECK((fr.U.transpose() * fr.U - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((fr.V.transpose() * fr.V - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((fr.C.cwiseProduct(fr.C) + fr.S.cwiseProduct(fr.S) -
             VectorXd::Ones(n)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((fr.H_inv_T * fr.H.transpose() - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("diag_solve at lambda = 0 is the unconstrained least-squares solution") {
  auto A = random_matrix(15, 6);
  auto B = random_matrix(18, 6);
  auto b = random_vector(15);
  auto d = random_vector(18);
  auto f = gsvd(A, B);
  DiagSolveCache cache;
  cache.init(f);
  cache.set_b(f, b);
  cache.set_d(f, d);

  auto [zeta, eta] = diag_solve(f, cache, 0.0);
  VectorXd ls = (A.transpose() * A).ldlt().solve(A.transpose() * b);
  CHECK((eta - ls).norm() / ls.norm() < 1e-9);

  // b = d = 0 gives the zero solution
  cache.set_b(f, VectorXd::Zero(15));
  cache.set_d(f, VectorXd::Zero(18));
  auto [z0, e0] = diag_solve(f, cache, 0.0);
  CHECK(e0.norm() == 0.0);
}

TEST_CASE("diag_solve dominant balance as lambda -> infinity") {
  auto A = random_matrix(10, 5);
  auto B = random_matrix(12, 5);
  auto b = random_vector(10);
  auto d = random_vector(12);
  auto f = gsvd(A, B);
  DiagSolveCache cache;
  cache.init(f);
  cache.set_b(f, b);
  cache.set_d(f, d);
  auto [zeta, eta] = diag_solve(f, cache, 1e12);
  for (int i = 0; i < 5; ++i)
    if (f.S(i) > 1e-8)
      CHECK(f.S(i) * zeta(i) == Approx(cache.Vd(i)).epsilon(1e-8));
}

TEST_CASE("constraint_residual agrees with the dense evaluation") {
  auto A = random_matrix(15, 6);
  auto B = random_matrix(20, 6);
  auto f = gsvd(A, B);
  DiagSolveCache cache;
  cache.init(f);
  auto b = random_vector(15);
  auto d = random_vector(20);
  cache.set_b(f, b);
  cache.set_d(f, d);
  for (double lambda : {0.0, 0.3, 2.0, -0.05}) {
    auto [zeta, eta] = diag_solve(f, cache, lambda);
    double nf = 0.37;
    double got = constraint_residual(f, cache, zeta, nf);
    double dense = (B * eta - d).squaredNorm() + nf;
    CHECK(got == Approx(dense).epsilon(1e-10));
  }

  // zero case
  DiagSolveCache zc;
  zc.init(f);
  zc.set_b(f, VectorXd::Zero(15));
  zc.set_d(f, VectorXd::Zero(20));
  auto [z0, e0] = diag_solve(f, zc, 0.0);
  CHECK(constraint_residual(f, zc, z0, 0.0) == Approx(0.0).margin(1e-28));
}

TEST_CASE("constraint_residual with B = 0 is constant in lambda") {
  auto A = random_matrix(9, 4);
  MatrixXd B = MatrixXd::Zero(7, 4);
  auto f = gsvd(A, B);
  DiagSolveCache cache;
  cache.init(f);
  auto b = random_vector(9);
  auto d = random_vector(7);
  cache.set_b(f, b);
  cache.set_d(f, d);
  double nf = -1.25;
  double r0 = 0.0;
  for (double lambda : {0.0, 0.5, 3.0}) {
    auto [zeta, eta] = diag_solve(f, cache, lambda);
    double r = constraint_residual(f, cache, zeta, nf);
    CHECK(r == Approx(d.squaredNorm() + nf).epsilon(1e-12));
    CHECK(constraint_derivative(f, cache, lambda, zeta) == Approx(0.0).margin(1e-20));
    if (lambda == 0.0) r0 = r;
    CHECK(r == Approx(r0).epsilon(1e-12));
  }
}

TEST_CASE("constraint_derivative matches central finite differences") {
  auto A = random_matrix(14, 6);
  auto B = random_matrix(16, 6);
  auto f = gsvd(A, B);
  DiagSolveCache cache;
  cache.init(f);
  cache.set_b(f, random_vector(14));
  cache.set_d(f, random_vector(16));
  for (double lambda : {0.0, 0.7, 5.0}) {
    auto [zeta, eta] = diag_solve(f, cache, lambda);
    double der = constraint_derivative(f, cache, lambda, zeta);
    const double h = 1e-6 * std::max(1.0, std::abs(lambda));
    auto ce = [&](double lam) {
      auto [z, e] = diag_solve(f, cache, lam);
      return constraint_residual(f, cache, z, 0.0);
    };
    double fd = (ce(lambda + h) - ce(lambda - h)) / (2 * h);
    CHECK(der == Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("constraint derivative changes sign across a strict minimizer") {
  auto A = random_matrix(12, 5);
  auto B = random_matrix(15, 5);
  auto f = gsvd(A, B);
  DiagSolveCache cache;
  cache.init(f);
  cache.set_b(f, random_vector(12));
  cache.set_d(f, random_vector(15));
  auto ce = [&](double lam) {
    auto [z, e] = diag_solve(f, cache, lam);
    return constraint_residual(f, cache, z, 0.0);
  };
  // scan a lambda grid for an interior minimum, then check the sign flip
  double best = 0.0, best_val = ce(0.0);
  for (double lam = 0.05; lam <= 20.0; lam += 0.05) {
    double v = ce(lam);
    if (v < best_val) {
      best_val = v;
      best = lam;
    }
  }
  if (best > 0.05 && best < 19.9) {
    auto [zl, el] = diag_solve(f, cache, best - 0.05);
    auto [zr, er] = diag_solve(f, cache, best + 0.05);
    CHECK(constraint_derivative(f, cache, best - 0.05, zl) < 0.0);
    CHECK(constraint_derivative(f, cache, best + 0.05, zr) > 0.0);
  }
}

TEST_CASE("singular shifted denominators are reported with their index") {
  MatrixXd A(2, 2), B(2, 2);
  A << 1, 0, 0, 1;
  B << 2, 0, 0, 0.5;
  auto f = gsvd(A, B);
  DiagSolveCache cache;
  cache.init(f);
  cache.set_b(f, random_vector(2));
  cache.set_d(f, random_vector(2));
  // lambda = -c_i^2 / s_i^2 exactly cancels one denominator
  const double lambda_bad = -cache.c2(0) / cache.s2(0);
  CHECK_THROWS_AS(diag_solve(f, cache, lambda_bad), SingularShift);
}
