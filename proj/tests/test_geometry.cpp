#include <catch2/catch_amalgamated.hpp>

#include "hamwave/geometry.hpp"

using namespace hamwave;
using Catch::Approx;

TEST_CASE("uniform_grid on an interval includes both endpoints") {
  auto dom = Domain::interval(0.0, 1.0);
  auto ps = uniform_grid(dom, 3);
  REQUIRE(ps.size() == 3);
  CHECK(ps.pts(0, 0) == 0.0);
  CHECK(ps.pts(1, 0) == 0.5);
  CHECK(ps.pts(2, 0) == 1.0);
  CHECK_THROWS_AS(uniform_grid(dom, 1), InvalidArgument);
}

TEST_CASE("uniform_grid tensor product on the unit square") {
  auto dom = Domain::rectangle(0.0, 1.0, 0.0, 1.0);
  auto ps = uniform_grid(dom, 3);
  REQUIRE(ps.size() == 9);
  int corners = 0;
  for (int i = 0; i < ps.size(); ++i) {
    auto p = ps.point(i);
    if ((p(0) == 0.0 || p(0) == 1.0) && (p(1) == 0.0 || p(1) == 1.0)) ++corners;
  }
  CHECK(corners == 4);
}

TEST_CASE("uniform_grid filters the bounding grid to the closed disk") {
  auto dom = Domain::disk(0.0, 0.0, 10.0);
  auto ps = uniform_grid(dom, 5);
  // oracle: enumerate the 5x5 bounding grid and count x^2+y^2 <= 100
  int expected = 0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      double x = -10.0 + 5.0 * i, y = -10.0 + 5.0 * j;
      if (x * x + y * y <= 100.0) ++expected;
    }
  CHECK(expected == 13);
  CHECK(ps.size() == expected);
}

TEST_CASE("halton radical inverse in base 2 and the unit square") {
  auto unit = Domain::interval(0.0, 1.0);
  auto ps = halton_points(unit, 3, 0);
  REQUIRE(ps.size() == 3);
  CHECK(ps.pts(0, 0) == Approx(0.5));
  CHECK(ps.pts(1, 0) == Approx(0.25));
  CHECK(ps.pts(2, 0) == Approx(0.75));

  CHECK(halton_points(unit, 1).size() == 1);

  auto square = Domain::rectangle(0.0, 1.0, 0.0, 1.0);
  auto q = halton_points(square, 2, 0);
  CHECK(q.pts(0, 0) == Approx(1.0 / 2));
  CHECK(q.pts(0, 1) == Approx(1.0 / 3));
  CHECK(q.pts(1, 0) == Approx(1.0 / 4));
  CHECK(q.pts(1, 1) == Approx(2.0 / 3));

  CHECK_THROWS_AS(halton_points(Domain::disk(0, 0, 1), 3), Unsupported);
}

TEST_CASE("halton points are distinct and inside the half-open unit box") {
  auto unit = Domain::rectangle(0.0, 1.0, 0.0, 1.0);
  auto ps = halton_points(unit, 200, 0);
  for (int i = 0; i < ps.size(); ++i) {
    CHECK(ps.pts(i, 0) >= 0.0);
    CHECK(ps.pts(i, 0) < 1.0);
    CHECK(ps.pts(i, 1) >= 0.0);
    CHECK(ps.pts(i, 1) < 1.0);
    for (int j = 0; j < i; ++j)
      CHECK((ps.pts.row(i) - ps.pts.row(j)).norm() > 0.0);
  }
}

TEST_CASE("split_boundary partitions a point set") {
  auto dom = Domain::interval(0.0, 1.0);
  auto grid = uniform_grid(dom, 3);
  auto [in, bd] = split_boundary(grid, dom);
  REQUIRE(in.size() == 1);
  REQUIRE(bd.size() == 2);
  CHECK(in.pts(0, 0) == 0.5);

  // all-interior input
  PointSet mid;
  mid.pts.resize(2, 1);
  mid.pts << 0.3, 0.7;
  auto [in2, bd2] = split_boundary(mid, dom);
  CHECK(in2.size() == 2);
  CHECK(bd2.size() == 0);

  // 5x5 grid on the unit square: 16 boundary, 9 interior
  auto sq = Domain::rectangle(0.0, 1.0, 0.0, 1.0);
  auto g5 = uniform_grid(sq, 5);
  auto [in3, bd3] = split_boundary(g5, sq);
  CHECK(in3.size() == 9);
  CHECK(bd3.size() == 16);
  CHECK(in3.size() + bd3.size() == g5.size());
}

TEST_CASE("fill_distance basics") {
  auto dom = Domain::interval(0.0, 1.0);
  PointSet centers;
  centers.pts.resize(3, 1);
  centers.pts << 0.0, 0.5, 1.0;
  auto probe = uniform_grid(dom, 1001);
  CHECK(fill_distance(centers, probe) == Approx(0.25).margin(1e-12));
  CHECK(fill_distance(centers, centers) == 0.0);

  PointSet two;
  two.pts.resize(2, 1);
  two.pts << 0.0, 1.0;
  CHECK(fill_distance(two, probe) == Approx(0.5).margin(1e-12));

  PointSet empty;
  empty.pts.resize(0, 1);
  CHECK_THROWS_AS(fill_distance(empty, probe), InvalidArgument);
}

TEST_CASE("fill_distance is monotone under center insertion") {
  auto dom = Domain::interval(0.0, 1.0);
  auto probe = uniform_grid(dom, 2001);
  PointSet centers;
  centers.pts.resize(4, 1);
  centers.pts << 0.0, 0.21, 0.73, 1.0;
  double h0 = fill_distance(centers, probe);
  PointSet more;
  more.pts.resize(5, 1);
  more.pts << 0.0, 0.21, 0.5, 0.73, 1.0;
  CHECK(fill_distance(more, probe) <= h0 + 1e-15);
}

TEST_CASE("trapezoid weights on interval, rectangle and disk") {
  auto dom = Domain::interval(0.0, 1.0);
  auto q = trapezoid_weights(uniform_grid(dom, 3), dom);
  REQUIRE(q.weights.size() == 3);
  CHECK(q.weights(0) == Approx(0.25));
  CHECK(q.weights(1) == Approx(0.5));
  CHECK(q.weights(2) == Approx(0.25));

  auto rect = Domain::rectangle(-1.0, 3.0, 0.0, 2.0);
  auto qr = trapezoid_weights(uniform_grid(rect, 17), rect);
  CHECK(qr.weights.sum() == Approx(rect.measure()).epsilon(1e-12));

  // disk weights converge to pi r^2 under refinement at rate O(h)
  auto disk = Domain::disk(0.0, 0.0, 10.0);
  double coarse_err = 0.0, fine_err = 0.0;
  for (int n : {41, 81, 161, 321}) {
    auto qd = trapezoid_weights(uniform_grid(disk, n), disk);
    double h = 20.0 / (n - 1);
    double err = std::abs(qd.weights.sum() - disk.measure());
    CHECK(err < 0.1 * h * 2 * M_PI * disk.radius);
    if (n == 41) coarse_err = err;
    if (n == 321) fine_err = err;
  }
  CHECK(fine_err < coarse_err);
}

TEST_CASE("outward normals") {
  auto iv = Domain::interval(-20.0, 20.0);
  CHECK(outward_normal(Eigen::Vector2d(20.0, 0.0), iv)(0) == 1.0);
  CHECK(outward_normal(Eigen::Vector2d(-20.0, 0.0), iv)(0) == -1.0);

  auto disk = Domain::disk(0.0, 0.0, 10.0);
  auto n = outward_normal(Eigen::Vector2d(10.0, 0.0), disk);
  CHECK(n(0) == Approx(1.0));
  CHECK(n(1) == Approx(0.0).margin(1e-15));

  auto sq = Domain::rectangle(0.0, 1.0, 0.0, 1.0);
  auto nf = outward_normal(Eigen::Vector2d(1.0, 0.5), sq);
  CHECK(nf(0) == 1.0);
  CHECK(nf(1) == 0.0);
  // corner resolves to the first-axis face
  auto nc = outward_normal(Eigen::Vector2d(0.0, 0.0), sq);
  CHECK(nc(0) == -1.0);

  CHECK_THROWS_AS(outward_normal(Eigen::Vector2d(0.5, 0.5), sq), InvalidArgument);
}
