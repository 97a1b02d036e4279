#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include "hamwave/errors.hpp"
#include "hamwave/geometry.hpp"

namespace hamwave {

/// Whittle-Matern-Sobolev kernel Phi(x,z) = (eps*r)^nu K_nu(eps*r),
/// r = ||x-z||, nu = m - d/2. Positive definite on R^d for m > d/2.
struct KernelSpec {
  int m = 4;            // smoothness order
  double epsilon = 1.0; // shape parameter
  int d = 2;            // spatial dimension

  double nu() const { return m - 0.5 * d; }

  void validate() const {
    if (d != 1 && d != 2) throw InvalidArgument("kernel dimension must be 1 or 2");
    if (!(epsilon > 0)) throw InvalidArgument("kernel shape parameter must be positive");
    if (!(nu() > 0)) throw InvalidArgument("kernel requires m > d/2");
  }
  void validate_laplacian() const {
    validate();
    if (nu() < 2)
      throw Unsupported("kernel Laplacian requires m >= d/2 + 2");
  }
  void validate_gradient() const {
    validate();
    if (!(nu() > 1))
      throw Unsupported("kernel gradient requires m > d/2 + 1");
  }
};

namespace detail {

inline void gsl_quiet() {
  [[maybe_unused]] static gsl_error_handler_t* prev = gsl_set_error_handler_off();
}

constexpr double kEulerGamma = 0.57721566490153286060651209008240;
constexpr double kSmallZ = 1e-4;

/// P_mu(z) = z^mu K_mu(z) for integer mu = 0..mu_max, stable through z -> 0.
/// Uses scaled K0/K1 plus the upward recurrence K_{j+1} = K_{j-1} + (2j/z) K_j.
inline void bessel_products_int(int mu_max, double z, double* P) {
  gsl_quiet();
  if (z < kSmallZ) {
    // small-argument limits with leading corrections
    for (int mu = 0; mu <= mu_max; ++mu) {
      if (mu == 0)
        P[0] = (z > 0) ? -(std::log(0.5 * z) + kEulerGamma) : 0.0;
      else if (mu == 1)
        P[1] = 1.0 + 0.5 * z * z * (std::log(0.5 * z) + kEulerGamma - 0.5);
      else
        P[mu] = std::pow(2.0, mu - 1) * std::tgamma(static_cast<double>(mu)) *
                (1.0 - z * z / (4.0 * (mu - 1)));
    }
    if (z == 0.0 && mu_max >= 1) P[0] = 0.0;  // only ever used as z^2 * P[0]
    return;
  }
  const double e = std::exp(-z);
  double km1 = gsl_sf_bessel_K0_scaled(z);  // scaled: e^z K_j(z)
  double k0 = gsl_sf_bessel_K1_scaled(z);
  P[0] = km1 * e;
  if (mu_max >= 1) P[1] = z * k0 * e;
  double zp = z;  // z^j for the current order j
  for (int j = 1; j < mu_max; ++j) {
    const double kp1 = km1 + (2.0 * j / z) * k0;
    km1 = k0;
    k0 = kp1;
    zp *= z;
    P[j + 1] = zp * k0 * e;
  }
}

/// P_{n+1/2}(z) = z^{n+1/2} K_{n+1/2}(z) via the closed-form finite sum
/// K_{n+1/2}(z) = sqrt(pi/(2z)) e^{-z} sum_k (n+k)!/(2^k k! (n-k)!) z^{-k}.
inline double bessel_product_half(int n, double z) {
  double coeff = 1.0;  // (n+k)!/(2^k k!(n-k)!) at k = 0
  double sum = 0.0;
  // sum_k c_{n,k} z^{n-k}; evaluate from k=0 upward
  for (int k = 0; k <= n; ++k) {
    if (k > 0) coeff *= static_cast<double>((n + k) * (n - k + 1)) / (2.0 * k);
    sum += coeff * std::pow(z, n - k);
  }
  return std::sqrt(M_PI / 2.0) * std::exp(-z) * sum;
}

inline bool is_half_integer(double nu) {
  return std::abs(nu - std::floor(nu) - 0.5) < 1e-12;
}

}  // namespace detail

/// Radial profile values needed by all kernel operators at radius r:
///   phi       = (eps r)^nu K_nu(eps r)
///   grad_fac  = eps^2 (eps r)^{nu-1} K_{nu-1}(eps r);  grad Phi = -grad_fac (x - z)
///   laplacian = eps^2 [ (eps r)^nu K_{nu-2}(eps r) - d (eps r)^{nu-1} K_{nu-1}(eps r) ]
struct KernelValues {
  double phi = 0.0;
  double grad_fac = 0.0;
  double laplacian = 0.0;
};

/// Fused evaluation of the radial products; orders up to `order` are filled
/// (0: phi, 1: + gradient factor, 2: + Laplacian).
inline KernelValues kernel_values(const KernelSpec& spec, double r, int order = 2) {
  const double nu = spec.nu();
  const double eps = spec.epsilon;
  const double e2 = eps * eps;
  KernelValues kv;
  if (r == 0.0) {
    kv.phi = std::pow(2.0, nu - 1.0) * std::tgamma(nu);
    if (order >= 1) kv.grad_fac = e2 * std::pow(2.0, nu - 2.0) * std::tgamma(nu - 1.0);
    if (order >= 2)
      kv.laplacian = -spec.d * e2 * std::pow(2.0, nu - 2.0) * std::tgamma(nu - 1.0);
    return kv;
  }
  const double z = eps * r;
  if (detail::is_half_integer(nu)) {
    // nu = n + 1/2; z^{nu-1} K_{nu-1} = P_{(n-1)+1/2}, z^nu K_{nu-2} = z^2 P_{(n-2)+1/2}
    const int n = static_cast<int>(std::llround(nu - 0.5));
    kv.phi = detail::bessel_product_half(n, z);
    if (order >= 1) kv.grad_fac = e2 * detail::bessel_product_half(n - 1, z);
    if (order >= 2)
      kv.laplacian = e2 * (z * z * detail::bessel_product_half(n - 2, z) -
                           spec.d * detail::bessel_product_half(n - 1, z));
    return kv;
  }
  const int mu = static_cast<int>(std::llround(nu));
  if (mu > 15) throw Unsupported("kernel smoothness order out of supported range");
  double P[16];
  detail::bessel_products_int(mu, z, P);
  kv.phi = P[mu];
  if (order >= 1) kv.grad_fac = e2 * P[mu - 1];
  if (order >= 2) kv.laplacian = e2 * (z * z * P[mu - 2] - spec.d * P[mu - 1]);
  return kv;
}

/// Kernel value at radius r >= 0.
inline double phi(const KernelSpec& spec, double r) {
  spec.validate();
  if (r < 0) throw InvalidArgument("phi requires r >= 0");
  return kernel_values(spec, r, 0).phi;
}

/// Gradient with respect to the first argument, continuous through x = z.
inline Eigen::Vector2d phi_grad(const KernelSpec& spec, const Eigen::Vector2d& x,
                                const Eigen::Vector2d& z) {
  spec.validate_gradient();
  const Eigen::Vector2d diff = x - z;
  const double r = diff.norm();
  if (r == 0.0) return Eigen::Vector2d::Zero();
  return -kernel_values(spec, r, 1).grad_fac * diff;
}

/// Laplacian with respect to the first argument (finite limit at x = z).
inline double phi_laplacian(const KernelSpec& spec, const Eigen::Vector2d& x,
                            const Eigen::Vector2d& z) {
  spec.validate_laplacian();
  return kernel_values(spec, (x - z).norm(), 2).laplacian;
}

/// Outward-normal derivative dot(n, grad_x Phi(x, z)) at a boundary point.
inline double phi_normal(const KernelSpec& spec, const Eigen::Vector2d& x,
                         const Eigen::Vector2d& z, const Eigen::Vector2d& normal) {
  if (std::abs(normal.norm() - 1.0) > 1e-9)
    throw InvalidArgument("phi_normal requires a unit normal");
  return normal.dot(phi_grad(spec, x, z));
}

/// Operator selector for kernel evaluation matrices.
struct KernelOperator {
  enum class Type { identity, gradient, laplacian, normal };
  Type type = Type::identity;
  int axis = 0;             // gradient component
  Eigen::MatrixXd normals;  // one row per left point, for Type::normal

  static KernelOperator identity() { return {}; }
  static KernelOperator gradient(int axis) {
    KernelOperator op;
    op.type = Type::gradient;
    op.axis = axis;
    return op;
  }
  static KernelOperator laplacian() {
    KernelOperator op;
    op.type = Type::laplacian;
    return op;
  }
  static KernelOperator normal(Eigen::MatrixXd normals) {
    KernelOperator op;
    op.type = Type::normal;
    op.normals = std::move(normals);
    return op;
  }
};

/// Dense evaluation matrix: entry (i,j) = operator applied to Phi(., z_j) at
/// left point i.
inline Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const KernelOperator& op,
                                     const PointSet& left, const PointSet& right) {
  using Type = KernelOperator::Type;
  switch (op.type) {
    case Type::identity: spec.validate(); break;
    case Type::gradient:
    case Type::normal: spec.validate_gradient(); break;
    case Type::laplacian: spec.validate_laplacian(); break;
  }
  if (op.type == Type::normal &&
      (op.normals.rows() != left.size() || op.normals.cols() != left.dim()))
    throw InvalidArgument("kernel_matrix: normals must match the left point set");
  Eigen::MatrixXd out(left.size(), right.size());
  const int order = (op.type == Type::identity) ? 0 : (op.type == Type::laplacian ? 2 : 1);
  for (int j = 0; j < right.size(); ++j) {
    const Eigen::Vector2d zj = right.point(j);
    for (int i = 0; i < left.size(); ++i) {
      const Eigen::Vector2d xi = left.point(i);
      const Eigen::Vector2d diff = xi - zj;
      const double r = diff.norm();
      const KernelValues kv = kernel_values(spec, r, order);
      switch (op.type) {
        case Type::identity: out(i, j) = kv.phi; break;
        case Type::gradient:
          out(i, j) = (r == 0.0) ? 0.0 : -kv.grad_fac * diff(op.axis);
          break;
        case Type::laplacian: out(i, j) = kv.laplacian; break;
        case Type::normal: {
          double acc = 0.0;
          if (r != 0.0)
            for (int a = 0; a < left.dim(); ++a)
              acc -= kv.grad_fac * diff(a) * op.normals(i, a);
          out(i, j) = acc;
          break;
        }
      }
    }
  }
  return out;
}

/// One fused pass over all point pairs filling the value/Laplacian/gradient
/// blocks used by the collocation assembly (any output may be null).
inline void kernel_blocks(const KernelSpec& spec, const PointSet& left,
                          const PointSet& right, Eigen::MatrixXd* phi_out,
                          Eigen::MatrixXd* lap_out,
                          std::vector<Eigen::MatrixXd>* grad_out) {
  if (lap_out) spec.validate_laplacian();
  else if (grad_out) spec.validate_gradient();
  else spec.validate();
  const int nl = left.size(), nr = right.size(), d = right.dim();
  if (phi_out) phi_out->resize(nl, nr);
  if (lap_out) lap_out->resize(nl, nr);
  if (grad_out) {
    grad_out->resize(d);
    for (auto& g : *grad_out) g.resize(nl, nr);
  }
  const int order = lap_out ? 2 : (grad_out ? 1 : 0);
  for (int j = 0; j < nr; ++j) {
    const Eigen::Vector2d zj = right.point(j);
    for (int i = 0; i < nl; ++i) {
      const Eigen::Vector2d diff = left.point(i) - zj;
      const double r = diff.norm();
      const KernelValues kv = kernel_values(spec, r, order);
      if (phi_out) (*phi_out)(i, j) = kv.phi;
      if (lap_out) (*lap_out)(i, j) = kv.laplacian;
      if (grad_out)
        for (int a = 0; a < d; ++a)
          (*grad_out)[a](i, j) = (r == 0.0) ? 0.0 : -kv.grad_fac * diff(a);
    }
  }
}

}  // namespace hamwave
