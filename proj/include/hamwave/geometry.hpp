#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "hamwave/errors.hpp"

namespace hamwave {

/// Computational domain: an interval, an axis-aligned rectangle, or a disk.
struct Domain {
  enum class Kind { interval, rectangle, disk };

  Kind kind = Kind::interval;
  int dim = 1;
  // interval/rectangle bounds per axis; first `dim` entries are meaningful
  Eigen::Vector2d lo = Eigen::Vector2d::Zero();
  Eigen::Vector2d hi = Eigen::Vector2d::Ones();
  // disk
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 1.0;

  static Domain interval(double a, double b) {
    if (!(a < b)) throw InvalidArgument("interval requires lower < upper");
    Domain d;
    d.kind = Kind::interval;
    d.dim = 1;
    d.lo << a, 0.0;
    d.hi << b, 0.0;
    return d;
  }

  static Domain rectangle(double ax, double bx, double ay, double by) {
    if (!(ax < bx) || !(ay < by))
      throw InvalidArgument("rectangle requires lower < upper on every axis");
    Domain d;
    d.kind = Kind::rectangle;
    d.dim = 2;
    d.lo << ax, ay;
    d.hi << bx, by;
    return d;
  }

  static Domain disk(double cx, double cy, double r) {
    if (!(r > 0)) throw InvalidArgument("disk requires radius > 0");
    Domain d;
    d.kind = Kind::disk;
    d.dim = 2;
    d.center << cx, cy;
    d.radius = r;
    d.lo = d.center.array() - r;
    d.hi = d.center.array() + r;
    return d;
  }

  /// Length (1D) or area (2D) of the domain.
  double measure() const {
    switch (kind) {
      case Kind::interval: return hi(0) - lo(0);
      case Kind::rectangle: return (hi(0) - lo(0)) * (hi(1) - lo(1));
      case Kind::disk: return M_PI * radius * radius;
    }
    return 0.0;
  }

  bool contains(const Eigen::Vector2d& p, double tol = 1e-12) const {
    if (kind == Kind::disk) return (p - center).norm() <= radius + tol;
    for (int a = 0; a < dim; ++a)
      if (p(a) < lo(a) - tol || p(a) > hi(a) + tol) return false;
    return true;
  }

  bool on_boundary(const Eigen::Vector2d& p, double tol = 1e-12) const {
    if (kind == Kind::disk) return std::abs((p - center).norm() - radius) <= tol;
    if (!contains(p, tol)) return false;
    for (int a = 0; a < dim; ++a)
      if (std::abs(p(a) - lo(a)) <= tol || std::abs(p(a) - hi(a)) <= tol)
        return true;
    return false;
  }
};

enum class PointTag { interior, boundary, quadrature, evaluation };

/// A set of points in the domain, one row per point; quadrature and
/// evaluation sets carry nonnegative weights of matching length.
struct PointSet {
  Eigen::MatrixXd pts;  // n x dim
  PointTag tag = PointTag::interior;
  Eigen::VectorXd weights;  // empty unless tag is quadrature/evaluation

  int size() const { return static_cast<int>(pts.rows()); }
  int dim() const { return static_cast<int>(pts.cols()); }
  Eigen::Vector2d point(int i) const {
    Eigen::Vector2d p = Eigen::Vector2d::Zero();
    for (int a = 0; a < dim(); ++a) p(a) = pts(i, a);
    return p;
  }
};

namespace detail {

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> x(n);
  const double h = (b - a) / (n - 1);
  for (int i = 0; i < n; ++i) x[i] = a + i * h;
  x.front() = a;
  x.back() = b;  // endpoints exact
  return x;
}

/// Radical-inverse of index i in the given base (van der Corput).
inline double radical_inverse(long long i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * (i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

/// Unique sorted axis coordinates of a (possibly filtered) tensor grid.
inline std::vector<double> unique_coords(const Eigen::MatrixXd& pts, int axis,
                                         double tol) {
  std::vector<double> v(pts.rows());
  for (int i = 0; i < pts.rows(); ++i) v[i] = pts(i, axis);
  std::sort(v.begin(), v.end());
  std::vector<double> u;
  for (double x : v)
    if (u.empty() || x - u.back() > tol) u.push_back(x);
  return u;
}

/// Composite trapezoid weights on sorted 1D coordinates.
inline std::vector<double> trapezoid_1d(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  if (n < 2) throw Unsupported("trapezoid weights need at least two points");
  std::vector<double> w(n);
  w[0] = 0.5 * (x[1] - x[0]);
  w[n - 1] = 0.5 * (x[n - 1] - x[n - 2]);
  for (int i = 1; i < n - 1; ++i) w[i] = 0.5 * (x[i + 1] - x[i - 1]);
  return w;
}

inline int index_of(const std::vector<double>& u, double x, double tol) {
  auto it = std::lower_bound(u.begin(), u.end(), x - tol);
  if (it == u.end() || std::abs(*it - x) > tol) return -1;
  return static_cast<int>(it - u.begin());
}

}  // namespace detail

/// Tensor grid over the domain including endpoints; for a disk, the grid on
/// the bounding square filtered to the closed disk.
inline PointSet uniform_grid(const Domain& dom, int n_per_dim) {
  if (n_per_dim < 2) throw InvalidArgument("uniform_grid requires n_per_dim >= 2");
  PointSet ps;
  if (dom.dim == 1) {
    auto xs = detail::linspace(dom.lo(0), dom.hi(0), n_per_dim);
    ps.pts.resize(n_per_dim, 1);
    for (int i = 0; i < n_per_dim; ++i) ps.pts(i, 0) = xs[i];
    return ps;
  }
  auto xs = detail::linspace(dom.lo(0), dom.hi(0), n_per_dim);
  auto ys = detail::linspace(dom.lo(1), dom.hi(1), n_per_dim);
  std::vector<Eigen::Vector2d> keep;
  keep.reserve(static_cast<size_t>(n_per_dim) * n_per_dim);
  for (double y : ys)
    for (double x : xs) {
      Eigen::Vector2d p(x, y);
      if (dom.kind != Domain::Kind::disk || dom.contains(p, 0.0))
        keep.push_back(p);
    }
  ps.pts.resize(static_cast<int>(keep.size()), 2);
  for (int i = 0; i < ps.size(); ++i) ps.pts.row(i) = keep[i].transpose();
  return ps;
}

/// First n Halton points (bases = first d primes, indices skip+1 .. skip+n)
/// affinely mapped into an interval or rectangle.
inline PointSet halton_points(const Domain& dom, int n, long long skip = 0) {
  if (n < 1) throw InvalidArgument("halton_points requires n >= 1");
  if (dom.kind == Domain::Kind::disk)
    throw Unsupported("halton_points does not support disk domains");
  static const int primes[2] = {2, 3};
  PointSet ps;
  ps.pts.resize(n, dom.dim);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < dom.dim; ++a) {
      const double u = detail::radical_inverse(skip + i + 1, primes[a]);
      ps.pts(i, a) = dom.lo(a) + u * (dom.hi(a) - dom.lo(a));
    }
  return ps;
}

/// Partition a point set into interior and boundary points of the domain.
inline std::pair<PointSet, PointSet> split_boundary(const PointSet& points,
                                                    const Domain& dom,
                                                    double tol = 1e-12) {
  std::vector<int> in, bd;
  for (int i = 0; i < points.size(); ++i) {
    if (dom.on_boundary(points.point(i), tol))
      bd.push_back(i);
    else
      in.push_back(i);
  }
  PointSet interior, boundary;
  interior.tag = PointTag::interior;
  boundary.tag = PointTag::boundary;
  interior.pts.resize(static_cast<int>(in.size()), points.dim());
  boundary.pts.resize(static_cast<int>(bd.size()), points.dim());
  for (size_t i = 0; i < in.size(); ++i) interior.pts.row(static_cast<int>(i)) = points.pts.row(in[i]);
  for (size_t i = 0; i < bd.size(); ++i) boundary.pts.row(static_cast<int>(i)) = points.pts.row(bd[i]);
  return {interior, boundary};
}

/// Fill distance sup_probe min_centers ||p - z||. The probe set must be dense
/// relative to the centers; that is the caller's responsibility.
inline double fill_distance(const PointSet& centers, const PointSet& probe) {
  if (centers.size() == 0 || probe.size() == 0)
    throw InvalidArgument("fill_distance requires nonempty point sets");
  double h = 0.0;
  for (int i = 0; i < probe.size(); ++i) {
    const auto p = probe.pts.row(i);
    double dmin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < centers.size(); ++j)
      dmin = std::min(dmin, (centers.pts.row(j) - p).norm());
    h = std::max(h, dmin);
  }
  return h;
}

/// Trapezoidal quadrature weights for a tensor grid (interval/rectangle) or a
/// disk-filtered tensor grid: bounding-box weights assigned to the surviving
/// points.
inline PointSet trapezoid_weights(const PointSet& grid, const Domain& dom) {
  PointSet out = grid;
  out.tag = PointTag::quadrature;
  const double scale = (dom.hi - dom.lo).norm();
  const double tol = 1e-9 * std::max(1.0, scale);
  if (dom.dim == 1) {
    auto xs = detail::unique_coords(grid.pts, 0, tol);
    if (static_cast<int>(xs.size()) != grid.size())
      throw Unsupported("trapezoid_weights: duplicate points in 1D grid");
    auto wx = detail::trapezoid_1d(xs);
    out.weights.resize(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
      int ix = detail::index_of(xs, grid.pts(i, 0), tol);
      out.weights(i) = wx[ix];
    }
    return out;
  }
  auto xs = detail::unique_coords(grid.pts, 0, tol);
  auto ys = detail::unique_coords(grid.pts, 1, tol);
  auto wx = detail::trapezoid_1d(xs);
  auto wy = detail::trapezoid_1d(ys);
  const bool full_tensor =
      static_cast<long long>(xs.size()) * static_cast<long long>(ys.size()) ==
      grid.size();
  if (dom.kind != Domain::Kind::disk && !full_tensor)
    throw Unsupported("trapezoid_weights: input is not a tensor grid");
  out.weights.resize(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    int ix = detail::index_of(xs, grid.pts(i, 0), tol);
    int iy = detail::index_of(ys, grid.pts(i, 1), tol);
    if (ix < 0 || iy < 0)
      throw Unsupported("trapezoid_weights: point off the inferred grid");
    out.weights(i) = wx[ix] * wy[iy];
  }
  return out;
}

/// Unit outward normal at a boundary point. Rectangle corners resolve to the
/// face of the first axis in index order.
inline Eigen::Vector2d outward_normal(const Eigen::Vector2d& p, const Domain& dom,
                                      double tol = 1e-9) {
  if (!dom.on_boundary(p, tol))
    throw InvalidArgument("outward_normal: point is not on the boundary");
  Eigen::Vector2d n = Eigen::Vector2d::Zero();
  switch (dom.kind) {
    case Domain::Kind::interval:
      n(0) = std::abs(p(0) - dom.lo(0)) <= tol ? -1.0 : 1.0;
      return n;
    case Domain::Kind::rectangle:
      if (std::abs(p(0) - dom.lo(0)) <= tol) { n(0) = -1.0; return n; }
      if (std::abs(p(0) - dom.hi(0)) <= tol) { n(0) = 1.0; return n; }
      if (std::abs(p(1) - dom.lo(1)) <= tol) { n(1) = -1.0; return n; }
      n(1) = 1.0;
      return n;
    case Domain::Kind::disk:
      n = (p - dom.center) / (p - dom.center).norm();
      return n;
  }
  return n;
}

}  // namespace hamwave
