#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "polyproj/corpus.hpp"
#include "polyproj/errors.hpp"
#include "polyproj/nnls.hpp"
#include "polyproj/projectors.hpp"
#include "polyproj/rng.hpp"

using namespace polyproj;

namespace {

Vector v2(double a, double b) { return Vector{{a, b}}; }

AffineSubspace x_axis() { return AffineSubspace(v2(0, 0), std::vector<Vector>{v2(1, 0)}); }

// Root of t + exp(2t) = 0 by plain bisection: the epi-exp nearest point for (0, 0).
double bisect_origin_root() {
  double lo = -1.0, hi = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid + std::exp(2.0 * mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Nearest grid point of C to x over the box [lo, hi]^d at spacing h.
Vector grid_nearest(const Polyhedron& c, const Vector& x, const Vector& lo, const Vector& hi, double h) {
  const int d = static_cast<int>(x.size());
  std::vector<long> count(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) count[static_cast<std::size_t>(j)] = static_cast<long>(std::floor((hi(j) - lo(j)) / h)) + 1;
  std::vector<long> idx(static_cast<std::size_t>(d), 0);
  Vector best;
  double best_dist = std::numeric_limits<double>::infinity();
  Vector p(d);
  while (true) {
    for (int j = 0; j < d; ++j) p(j) = lo(j) + h * static_cast<double>(idx[static_cast<std::size_t>(j)]);
    if (c.contains(p, 0.0)) {
      const double dist = (p - x).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = p;
      }
    }
    int j = 0;
    while (j < d && ++idx[static_cast<std::size_t>(j)] == count[static_cast<std::size_t>(j)]) idx[static_cast<std::size_t>(j++)] = 0;
    if (j == d) break;
  }
  return best;
}

// Random polyhedra plus points inside them, shared by the property tests.
struct Instance {
  Polyhedron c;
  std::vector<Vector> inside;
};

std::vector<Instance> property_instances(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Instance> out;
  for (const auto& c : corpus::standard_corpus(seed, 25, 5, 8)) {
    Instance inst{c, {}};
    for (int k = 0; k < 6; ++k) inst.inside.push_back(project_polyhedron(c, corpus::random_point(rng, c.ambient_dim(), 4.0)).point);
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace

TEST_CASE("project_affine examples") {
  CHECK((project_affine(x_axis(), v2(3, 5)) - v2(3, 0)).norm() < 1e-15);
  CHECK((project_affine(x_axis(), v2(-7, 0)) - v2(-7, 0)).norm() < 1e-15);

  // min_t (t - 2)^2 + t^2: derivative 4t - 4 = 0.
  const double t = 4.0 / 4.0;
  AffineSubspace diag(v2(0, 0), std::vector<Vector>{v2(1, 1)});
  CHECK((project_affine(diag, v2(2, 0)) - v2(t, t)).norm() < 1e-14);

  CHECK_THROWS_AS(project_affine(x_axis(), Vector::Zero(3)), DimensionMismatch);
}

TEST_CASE("project_affine residual is orthogonal to the directions") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = uniform_int(rng, 1, 7);
    const int k = uniform_int(rng, 0, d);
    std::vector<Vector> dirs;
    for (int i = 0; i < k; ++i) dirs.push_back(corpus::random_point(rng, d, 1.0));
    AffineSubspace a(corpus::random_point(rng, d, 3.0), dirs);
    const Vector x = corpus::random_point(rng, d, 5.0);
    const Vector p = project_affine(a, x);
    for (const auto& b : a.basis_vectors()) CHECK(std::abs((x - p).dot(b)) <= 1e-9 * (1.0 + x.norm()));
    CHECK((project_affine(a, p) - p).norm() <= 1e-9 * (1.0 + x.norm()));
  }
}

TEST_CASE("project_polyhedron examples") {
  SUBCASE("quadrant clamps one coordinate") {
    auto r = project_polyhedron(corpus::orthant(2), v2(-1, 2));
    CHECK((r.point - v2(0, 2)).norm() < 1e-14);
    CHECK(r.active == std::vector<int>{0});
  }
  SUBCASE("interior point is fixed") {
    auto r = project_polyhedron(corpus::unit_square(), v2(0.25, 1.0));
    CHECK((r.point - v2(0.25, 1.0)).norm() == 0.0);
    CHECK(r.active == std::vector<int>{3});
  }
  SUBCASE("simplex against a dense grid") {
    const Polyhedron c = corpus::unit_simplex();
    const Vector x = v2(2, 2);
    const auto r = project_polyhedron(c, x);
    // Grid on the simplex at step 1e-4, restricted to the hypotenuse band
    // where the nearest point of a grid this fine must sit.
    const double h = 1e-4;
    double best = std::numeric_limits<double>::infinity();
    Vector best_p;
    for (long i = 0; i <= 10000; ++i) {
      for (long j = std::max(0L, 9990 - i); j <= 10000 - i; ++j) {
        const Vector p = v2(h * static_cast<double>(i), h * static_cast<double>(j));
        const double dist = (p - x).squaredNorm();
        if (dist < best) {
          best = dist;
          best_p = p;
        }
      }
    }
    CHECK((r.point - best_p).norm() <= 1e-3);
    CHECK((r.point - v2(0.5, 0.5)).norm() <= 1e-12);
    CHECK(r.active == std::vector<int>{2});
  }
  SUBCASE("empty polyhedron") {
    Polyhedron c(1, {Halfspace(Vector{{1.0}}, 0.0), Halfspace(Vector{{-1.0}}, -1.0)});
    CHECK_THROWS_AS(project_polyhedron(c, Vector{{0.5}}), EmptyPolyhedron);
    CHECK_FALSE(find_feasible_point(c));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(project_polyhedron(corpus::unit_square(), Vector::Zero(3)), DimensionMismatch);
  }
  SUBCASE("whole space") {
    Polyhedron c(3);
    const Vector x = Vector::Constant(3, 2.5);
    CHECK((project_polyhedron(c, x).point - x).norm() == 0.0);
  }
  SUBCASE("degenerate vertex with redundant constraints") {
    // Four constraints through the origin of the quadrant, two redundant.
    Polyhedron c(2, {Halfspace(v2(-1, 0), 0.0), Halfspace(v2(0, -1), 0.0), Halfspace(v2(-1, -1), 0.0),
                     Halfspace(v2(-2, -1), 0.0)});
    const auto r = project_polyhedron(c, v2(-3, -4));
    CHECK(r.point.norm() < 1e-14);
    CHECK(r.active.size() == 4);
  }
}

TEST_CASE("project_polyhedron agrees with grid search on 2-D and 3-D instances") {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 24; ++trial) {
    const int d = trial % 3 == 2 ? 3 : 2;
    // Boxes cut by extra random halfspaces through an interior center: every
    // instance has an interior, so the grid can approach its nearest point.
    const Vector center = corpus::random_point(rng, d, 0.5);
    std::vector<Halfspace> hs;
    for (int j = 0; j < d; ++j) {
      hs.emplace_back(Vector::Unit(d, j), 2.0);
      hs.emplace_back(-Vector::Unit(d, j), 2.0);
    }
    for (int k = 0; k < 3; ++k) {
      Vector a(d);
      for (int j = 0; j < d; ++j) a(j) = gaussian(rng);
      hs.emplace_back(a, a.dot(center) + uniform(rng, 0.2, 1.0) * a.norm());
    }
    const Polyhedron c(d, hs);
    const Vector x = corpus::random_point(rng, d, 4.0);
    const double h = d == 2 ? 4e-3 : 4e-2;
    const Vector oracle = grid_nearest(c, x, Vector::Constant(d, -2.0), Vector::Constant(d, 2.0), h);
    REQUIRE(oracle.size() == d);
    const Vector p = project_polyhedron(c, x).point;
    CHECK((p - oracle).norm() <= 10.0 * h);
    // The grid point is feasible, so it can never beat the exact projection.
    CHECK((x - p).norm() <= (x - oracle).norm() + 1e-12);
    ++checked;
  }
  CHECK(checked == 24);
}

TEST_CASE("projector properties on the random corpus") {
  const Tolerances tol;
  const auto instances = property_instances(99);
  std::mt19937_64 rng(5);
  for (const auto& inst : instances) {
    const int d = inst.c.ambient_dim();
    for (int k = 0; k < 6; ++k) {
      const Vector x = corpus::random_point(rng, d, 5.0);
      const Vector y = corpus::random_point(rng, d, 5.0);
      const Vector px = project_polyhedron(inst.c, x).point;
      const Vector py = project_polyhedron(inst.c, y).point;
      CHECK(inst.c.contains(px, tol.feas * (1.0 + x.norm())));
      // Idempotence.
      CHECK((project_polyhedron(inst.c, px).point - px).norm() <= tol.feas);
      // Firm nonexpansiveness.
      CHECK((px - py).squaredNorm() <= (px - py).dot(x - y) + tol.feas);
      // Variational inequality.
      for (const auto& c : inst.inside) CHECK((x - px).dot(c - px) <= tol.feas * (1.0 + x.norm() + c.norm()));
      // Relaxed projectors are nonexpansive.
      for (double lambda : {0.0, 0.5, 1.0, 1.7, 2.0}) {
        RelaxedProjector r(inst.c, lambda);
        CHECK((r.apply(x) - r.apply(y)).norm() <= (x - y).norm() + tol.feas);
      }
    }
  }
}

TEST_CASE("warm-start hint does not change the answer") {
  std::mt19937_64 rng(17);
  for (const auto& c : corpus::standard_corpus(17, 20)) {
    const Vector x = corpus::random_point(rng, c.ambient_dim(), 4.0);
    const auto cold = project_polyhedron(c, x);
    const Vector x2 = x + 0.01 * corpus::random_point(rng, c.ambient_dim(), 1.0);
    const auto warm = project_polyhedron(c, x2, {}, cold.support);
    const auto ref = project_polyhedron(c, x2);
    CHECK((warm.point - ref.point).norm() <= 1e-12 * (1.0 + x2.norm()));
    // A stale or nonsense hint is harmless too.
    std::vector<int> junk{0};
    CHECK((project_polyhedron(c, x2, {}, junk).point - ref.point).norm() <= 1e-12 * (1.0 + x2.norm()));
  }
}

TEST_CASE("face projections and feasible points") {
  const Polyhedron sq = corpus::unit_square();
  // Right edge: x <= 1 tight (index 1).
  std::vector<int> right{1};
  auto r = project_polyhedron_face(sq, right, v2(0.2, 3.0));
  CHECK((r.point - v2(1.0, 1.0)).norm() < 1e-14);
  auto f = find_feasible_point(sq, right);
  REQUIRE(f);
  CHECK(std::abs((*f)(0) - 1.0) < 1e-12);
  CHECK(sq.contains(*f, 1e-12));
  // Left and right edges together are empty.
  std::vector<int> both{0, 1};
  CHECK_FALSE(find_feasible_point(sq, both));
  CHECK_THROWS_AS(project_polyhedron_face(sq, both, v2(0, 0)), EmptyPolyhedron);
  std::vector<int> bad{9};
  CHECK_THROWS_AS(find_feasible_point(sq, bad), InvalidArgument);
}

TEST_CASE("project_epiexp examples") {
  const Eigen::Vector2d inside = project_epiexp(0.0, 3.0);
  CHECK(inside(0) == 0.0);
  CHECK(inside(1) == 3.0);

  const double t = bisect_origin_root();
  const Eigen::Vector2d p = project_epiexp(0.0, 0.0);
  CHECK(std::abs(p(0) - t) <= 1e-10);
  CHECK(std::abs(p(1) - std::exp(t)) <= 1e-10);
  CHECK(p(0) == doctest::Approx(-0.4263).epsilon(1e-4));
  CHECK(p(1) == doctest::Approx(0.6529).epsilon(1e-4));

  // Optimality over the boundary by grid search.
  double best = std::numeric_limits<double>::infinity(), best_s = 0.0;
  for (int i = 0; i <= 300000; ++i) {
    const double s = -2.0 + 1e-5 * i;
    const double dist = s * s + std::exp(2.0 * s);
    if (dist < best) {
      best = dist;
      best_s = s;
    }
  }
  CHECK(std::abs(best_s - p(0)) <= 2e-5);

  for (double x0 : {-30.0, -2.0, 0.0, 1.5, 20.0}) {
    const Eigen::Vector2d q = project_epiexp(x0, std::exp(x0));
    CHECK(q(0) == x0);
    CHECK(q(1) == std::exp(x0));
  }
  CHECK_THROWS_AS(project_epiexp(NAN, 0.0), InvalidArgument);
}

TEST_CASE("project_epiexp satisfies the stationarity equation below the graph") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 2000; ++trial) {
    const double x0 = uniform(rng, -40.0, 10.0);
    const double y0 = uniform(rng, -50.0, 1.0) * (unit_uniform(rng) < 0.5 ? 1.0 : 1e3);
    if (y0 >= std::exp(x0)) continue;
    const Eigen::Vector2d p = project_epiexp(x0, y0);
    const double e = std::exp(p(0));
    CHECK(p(1) == e);
    CHECK(p(0) < x0);
    const double g = (p(0) - x0) + e * (e - y0);
    CHECK(std::abs(g) <= 1e-12 * std::max({1.0, std::abs(x0), std::abs(y0)}));
  }
}

TEST_CASE("epi-exp projector properties") {
  std::mt19937_64 rng(12);
  const Target epi = EpiExp{};
  for (int trial = 0; trial < 500; ++trial) {
    const Vector x = v2(uniform(rng, -6, 3), uniform(rng, -6, 6));
    const Vector y = v2(uniform(rng, -6, 3), uniform(rng, -6, 6));
    const Vector px = project(epi, x);
    const Vector py = project(epi, y);
    CHECK(std::exp(px(0)) <= px(1) * (1.0 + 1e-15));
    CHECK((project(epi, px) - px).norm() <= 1e-9);
    CHECK((px - py).squaredNorm() <= (px - py).dot(x - y) + 1e-9);
    // Variational inequality against points of the set.
    for (double s : {-3.0, -0.5, 0.0, 1.0}) {
      const Vector c = v2(s, std::exp(s) + 0.5);
      CHECK((x - px).dot(c - px) <= 1e-9);
    }
    for (double lambda : {0.3, 1.0, 2.0}) {
      RelaxedProjector r(epi, lambda);
      CHECK((r.apply(x) - r.apply(y)).norm() <= (x - y).norm() + 1e-9);
    }
  }
  CHECK_THROWS_AS(project(epi, Vector::Zero(3)), DimensionMismatch);
  CHECK(ambient_dim(epi) == 2);
}

TEST_CASE("affine projector properties") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = uniform_int(rng, 1, 6);
    std::vector<Vector> dirs;
    for (int i = 0, k = uniform_int(rng, 0, d); i < k; ++i) dirs.push_back(corpus::random_point(rng, d, 1.0));
    const Target a = AffineSubspace(corpus::random_point(rng, d, 2.0), dirs);
    const Vector x = corpus::random_point(rng, d, 5.0), y = corpus::random_point(rng, d, 5.0);
    const Vector px = project(a, x), py = project(a, y);
    CHECK((project(a, px) - px).norm() <= 1e-9);
    CHECK((px - py).squaredNorm() <= (px - py).dot(x - y) + 1e-9);
    for (double lambda : {0.0, 1.2, 2.0}) {
      RelaxedProjector r(a, lambda);
      CHECK((r.apply(x) - r.apply(y)).norm() <= (x - y).norm() + 1e-9);
    }
  }
}

TEST_CASE("relaxed projector examples") {
  const Vector x = v2(3, 5);
  CHECK(RelaxedProjector(x_axis(), 0.0).apply(x) == x);
  CHECK((RelaxedProjector(x_axis(), 1.0).apply(x) - v2(3, 0)).norm() < 1e-15);
  CHECK((RelaxedProjector(x_axis(), 2.0).apply(x) - v2(3, -5)).norm() < 1e-14);
  CHECK_THROWS_AS(RelaxedProjector(x_axis(), 2.5), InvalidArgument);
  CHECK_THROWS_AS(RelaxedProjector(x_axis(), -0.1), InvalidArgument);
  CHECK_THROWS_AS(RelaxedProjector(x_axis(), NAN), InvalidArgument);
  CHECK_THROWS_AS(RelaxedProjector(x_axis(), 1.0).apply(Vector::Zero(3)), DimensionMismatch);
}

TEST_CASE("nnls matches brute-force enumeration of passive sets") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const int rows = uniform_int(rng, 1, 5);
    const int cols = uniform_int(rng, 1, 4);
    Matrix a(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) a(i, j) = gaussian(rng);
    Vector b(rows);
    for (int i = 0; i < rows; ++i) b(i) = gaussian(rng);
    // Every subset S: least squares on S; keep nonnegative solutions.
    double best = b.norm();
    for (int mask = 1; mask < (1 << cols); ++mask) {
      std::vector<int> s;
      for (int j = 0; j < cols; ++j)
        if (mask & (1 << j)) s.push_back(j);
      Matrix as(rows, static_cast<Eigen::Index>(s.size()));
      for (std::size_t k = 0; k < s.size(); ++k) as.col(static_cast<Eigen::Index>(k)) = a.col(s[k]);
      const Vector z = as.completeOrthogonalDecomposition().solve(b);
      if (z.minCoeff() < 0.0) continue;
      best = std::min(best, (as * z - b).norm());
    }
    const auto r = nnls(a, b);
    CHECK(r.converged);
    CHECK(r.solution.minCoeff() >= 0.0);
    CHECK(std::abs((a * r.solution - b).norm() - r.residual) <= 1e-12);
    CHECK(r.residual <= best + 1e-9);
    CHECK(r.residual >= best - 1e-9);
  }
}

TEST_CASE("in_cone examples") {
  Matrix gens(2, 2);
  gens << 1, 0, 0, 1;
  CHECK(in_cone(gens, v2(1, 2), 1e-8));
  CHECK_FALSE(in_cone(gens, v2(-1, 2), 1e-8));
  CHECK(in_cone(Matrix(2, 0), v2(0, 0), 1e-8));
  CHECK_FALSE(in_cone(Matrix(2, 0), v2(0, 1), 1e-8));
}
