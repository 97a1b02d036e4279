#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "hamwave/errors.hpp"
#include "hamwave/geometry.hpp"

namespace hamwave {

enum class BcKind { dirichlet, neumann };

/// One second-order Hamiltonian wave benchmark:
///   u_tt - Lap(u) + F'(u) = 0 on Omega, Bu = g on the boundary,
///   u(.,0) = psi0, u_t(.,0) = psi1,
/// with the antiderivative F fixed by F(0) = 0.
struct ProblemSpec {
  std::string id;
  std::string description;
  Domain domain;
  BcKind bc = BcKind::dirichlet;
  bool linear = false;  // F' identically zero
  std::function<double(double)> fprime;
  std::function<double(double)> f;
  std::function<double(const Eigen::Vector2d&)> psi0;
  std::function<double(const Eigen::Vector2d&)> psi1;
  std::function<double(const Eigen::Vector2d&, double)> boundary;  // g(y, t)
  std::function<double(const Eigen::Vector2d&, double)> exact;     // may be empty
  std::optional<double> exact_E0;
  double default_T = 1.0;
  double default_tau = 0.01;

  bool has_exact() const { return static_cast<bool>(exact); }
};

namespace detail {

inline double sech(double x) { return 1.0 / std::cosh(x); }

constexpr double kSgZeta = 0.9;

/// Kink-antikink breather-type solution of the 1D sine-Gordon equation:
///   u(x,t) = 4 atan( sinh(zeta t / s) / (zeta cosh(x / s)) ),  s = sqrt(1-zeta^2).
inline double sine_gordon_exact(double x, double t) {
  const double s = std::sqrt(1.0 - kSgZeta * kSgZeta);
  return 4.0 * std::atan(std::sinh(kSgZeta * t / s) /
                         (kSgZeta * std::cosh(x / s)));
}

/// Time derivative of the sine-Gordon solution at t = 0 (the initial velocity).
inline double sine_gordon_psi1(double x) {
  const double s = std::sqrt(1.0 - kSgZeta * kSgZeta);
  return 4.0 / (s * std::cosh(x / s));
}

}  // namespace detail

/// The four built-in benchmark problems.
inline ProblemSpec builtin(const std::string& id) {
  ProblemSpec p;
  p.id = id;
  if (id == "pde1") {
    p.description = "2D linear wave equation on the unit square";
    p.domain = Domain::rectangle(0.0, 1.0, 0.0, 1.0);
    p.bc = BcKind::dirichlet;
    p.linear = true;
    p.fprime = [](double) { return 0.0; };
    p.f = [](double) { return 0.0; };
    p.psi0 = [](const Eigen::Vector2d&) { return 1.0; };
    p.psi1 = [](const Eigen::Vector2d& x) {
      return std::sqrt(2.0) * M_PI * std::sin(M_PI * x(0)) * std::sin(M_PI * x(1));
    };
    p.boundary = [](const Eigen::Vector2d&, double) { return 1.0; };
    p.exact = [](const Eigen::Vector2d& x, double t) {
      return std::sin(std::sqrt(2.0) * M_PI * t) * std::sin(M_PI * x(0)) *
                 std::sin(M_PI * x(1)) + 1.0;
    };
    p.exact_E0 = M_PI * M_PI / 4.0;
    p.default_T = 100.0;
    p.default_tau = 0.01;
  } else if (id == "pde2") {
    p.description = "1D sine-Gordon equation on (-20, 20)";
    p.domain = Domain::interval(-20.0, 20.0);
    p.bc = BcKind::neumann;
    p.fprime = [](double u) { return std::sin(u); };
    p.f = [](double u) { return 1.0 - std::cos(u); };
    p.psi0 = [](const Eigen::Vector2d& x) { return detail::sine_gordon_exact(x(0), 0.0); };
    p.psi1 = [](const Eigen::Vector2d& x) { return detail::sine_gordon_psi1(x(0)); };
    p.boundary = [](const Eigen::Vector2d&, double) { return 0.0; };
    p.exact = [](const Eigen::Vector2d& x, double t) {
      return detail::sine_gordon_exact(x(0), t);
    };
    p.exact_E0 = 16.0 / std::sqrt(1.0 - detail::kSgZeta * detail::kSgZeta);
    p.default_T = 15.0;
    p.default_tau = 0.01;
  } else if (id == "pde3") {
    p.description = "2D Klein-Gordon equation with cubic nonlinearity on a disk";
    p.domain = Domain::disk(0.0, 0.0, 10.0);
    p.bc = BcKind::dirichlet;
    p.fprime = [](double u) { return u * u * u; };
    p.f = [](double u) { return 0.25 * u * u * u * u; };
    p.psi0 = [](const Eigen::Vector2d& x) {
      return 2.0 * detail::sech(std::cosh(x.squaredNorm()));
    };
    p.psi1 = [](const Eigen::Vector2d&) { return 0.0; };
    p.boundary = [](const Eigen::Vector2d&, double) { return 0.0; };
    p.default_T = 7.0;
    p.default_tau = 0.01;
  } else if (id == "pde4") {
    p.description = "2D Klein-Gordon equation with quintic nonlinearity on a square";
    p.domain = Domain::rectangle(-10.0, 10.0, -10.0, 10.0);
    p.bc = BcKind::neumann;
    p.fprime = [](double u) { return u * u * u * u * u; };
    p.f = [](double u) { return std::pow(u, 6) / 6.0; };
    p.psi0 = [](const Eigen::Vector2d& x) {
      return 0.5 * detail::sech(std::cosh(x(0))) + 0.5 * detail::sech(std::cosh(x(1)));
    };
    p.psi1 = [](const Eigen::Vector2d&) { return 0.0; };
    p.boundary = [](const Eigen::Vector2d&, double) { return 0.0; };
    p.default_T = 20.0;
    p.default_tau = 0.05;
  } else {
    throw InvalidArgument("unknown problem id: " + id);
  }
  return p;
}

inline const std::vector<std::string>& builtin_ids() {
  static const std::vector<std::string> ids = {"pde1", "pde2", "pde3", "pde4"};
  return ids;
}

/// Exact solution evaluation; throws when the problem has none.
inline double eval_exact(const ProblemSpec& p, const Eigen::Vector2d& x, double t) {
  if (!p.has_exact()) throw Unsupported("problem has no exact solution: " + p.id);
  return p.exact(x, t);
}

inline std::pair<double, double> eval_ic(const ProblemSpec& p, const Eigen::Vector2d& x) {
  return {p.psi0(x), p.psi1(x)};
}

inline double eval_bc(const ProblemSpec& p, const Eigen::Vector2d& y, double t) {
  return p.boundary(y, t);
}

}  // namespace hamwave
