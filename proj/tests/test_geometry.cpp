#include <cmath>
#include <random>

#include "doctest.h"
#include "polyproj/errors.hpp"
#include "polyproj/geometry.hpp"
#include "polyproj/rng.hpp"

using namespace polyproj;

namespace {

Vector v2(double a, double b) { return Vector{{a, b}}; }

}  // namespace

TEST_CASE("inner product examples") {
  CHECK(inner(v2(1, 0), v2(0, 1)) == 0.0);
  CHECK(inner(v2(1, 2), v2(3, 4)) == 11.0);
  CHECK(inner(v2(0.6, 0.8), v2(0.6, 0.8)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(inner(v2(1, 0), Vector::Zero(3)), DimensionMismatch);
}

TEST_CASE("orthonormalize examples") {
  SUBCASE("scaling") {
    std::vector<Vector> in{v2(2, 0)};
    auto out = orthonormalize(in);
    REQUIRE(out.size() == 1);
    CHECK((out[0] - v2(1, 0)).norm() < 1e-15);
  }
  SUBCASE("duplicate dropped") {
    std::vector<Vector> in{v2(1, 0), v2(1, 0)};
    auto out = orthonormalize(in);
    REQUIRE(out.size() == 1);
    CHECK((out[0] - v2(1, 0)).norm() < 1e-15);
  }
  SUBCASE("diagonals") {
    std::vector<Vector> in{v2(1, 1), v2(1, -1)};
    auto out = orthonormalize(in);
    REQUIRE(out.size() == 2);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK((out[0] - v2(r, r)).norm() < 1e-15);
    CHECK((out[1] - v2(r, -r)).norm() < 1e-15);
    CHECK(std::abs(out[0].dot(out[1])) < 1e-15);
    CHECK(std::abs(out[0].norm() - 1.0) < 1e-15);
    CHECK(std::abs(out[1].norm() - 1.0) < 1e-15);
  }
  SUBCASE("empty and zero input") {
    CHECK(orthonormalize(std::vector<Vector>{}).empty());
    CHECK(orthonormalize(std::vector<Vector>{Vector::Zero(3)}).empty());
  }
}

TEST_CASE("orthonormalize spans the input on random families") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = uniform_int(rng, 1, 8);
    const int count = uniform_int(rng, 1, 10);
    const int rank = uniform_int(rng, 1, std::min(dim, count));
    // Random vectors inside a random rank-`rank` subspace.
    Matrix gen(dim, rank);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < rank; ++j) gen(i, j) = gaussian(rng);
    std::vector<Vector> in;
    for (int k = 0; k < count; ++k) {
      Vector c(rank);
      for (int j = 0; j < rank; ++j) c(j) = gaussian(rng);
      in.push_back(gen * c);
    }
    const auto out = orthonormalize(in);
    CHECK(static_cast<int>(out.size()) == rank);
    Matrix q(dim, static_cast<Eigen::Index>(out.size()));
    for (std::size_t j = 0; j < out.size(); ++j) q.col(static_cast<Eigen::Index>(j)) = out[j];
    const Matrix gram = q.transpose() * q;
    CHECK((gram - Matrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff() <= 1e-9);
    for (const auto& v : in) CHECK((q * (q.transpose() * v) - v).norm() <= 1e-9 * std::max(1.0, v.norm()));
  }
}

TEST_CASE("affine_from_equalities examples") {
  SUBCASE("x-axis") {
    std::vector<EqualityRow> rows{{v2(0, 1), 0.0}};
    auto a = affine_from_equalities(rows, 2);
    REQUIRE(a);
    CHECK(a->base().norm() < 1e-15);
    REQUIRE(a->dim() == 1);
    CHECK(std::abs(std::abs(a->basis()(0, 0)) - 1.0) < 1e-15);
    CHECK(std::abs(a->basis()(1, 0)) < 1e-15);
  }
  SUBCASE("contradictory") {
    std::vector<EqualityRow> rows{{v2(1, 0), 1.0}, {v2(1, 0), 2.0}};
    CHECK_FALSE(affine_from_equalities(rows, 2));
  }
  SUBCASE("2x2 system against Cramer's rule") {
    // x + y = 2, x - y = 0.
    const double det = 1.0 * -1.0 - 1.0 * 1.0;
    const double x = (2.0 * -1.0 - 1.0 * 0.0) / det;
    const double y = (1.0 * 0.0 - 2.0 * 1.0) / det;
    std::vector<EqualityRow> rows{{v2(1, 1), 2.0}, {v2(1, -1), 0.0}};
    auto a = affine_from_equalities(rows, 2);
    REQUIRE(a);
    CHECK(a->dim() == 0);
    CHECK((a->base() - v2(x, y)).norm() < 1e-14);
    CHECK((a->base() - v2(1, 1)).norm() < 1e-14);
  }
  SUBCASE("no rows is the whole space") {
    auto a = affine_from_equalities({}, 3);
    REQUIRE(a);
    CHECK(a->dim() == 3);
  }
  SUBCASE("dimension mismatch") {
    std::vector<EqualityRow> rows{{Vector::Ones(3), 1.0}};
    CHECK_THROWS_AS(affine_from_equalities(rows, 2), DimensionMismatch);
  }
}

TEST_CASE("affine_from_equalities satisfies its rows on random consistent systems") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = uniform_int(rng, 1, 8);
    const int m = uniform_int(rng, 1, 8);
    Vector point(dim);
    for (int j = 0; j < dim; ++j) point(j) = gaussian(rng);
    std::vector<EqualityRow> rows;
    for (int i = 0; i < m; ++i) {
      Vector a(dim);
      for (int j = 0; j < dim; ++j) a(j) = gaussian(rng);
      // Occasionally repeat a scaled earlier row to force dependence.
      if (i > 0 && unit_uniform(rng) < 0.3) a = 2.5 * rows[static_cast<std::size_t>(i - 1)].normal;
      rows.push_back({a, a.dot(point)});
    }
    auto aff = affine_from_equalities(rows, dim);
    REQUIRE(aff);
    CHECK(aff->orthonormality_defect() <= 1e-9);
    for (const auto& row : rows) {
      const double scale = row.normal.norm();
      CHECK(std::abs(row.normal.dot(aff->base()) - row.value) <= 1e-9 * scale * (1.0 + point.norm()));
      for (const auto& b : aff->basis_vectors()) CHECK(std::abs(row.normal.dot(b)) <= 1e-9 * scale);
    }
    // Round trip through the equality form describes the same set.
    auto again = affine_from_equalities(aff->to_equalities(), dim);
    REQUIRE(again);
    CHECK(again->dim() == aff->dim());
    CHECK((again->base() - aff->base()).norm() <= 1e-9 * (1.0 + aff->base().norm()));
  }
}

TEST_CASE("affine subspace and polyhedron construction") {
  std::vector<Vector> dirs{v2(3, 0), v2(6, 0)};
  AffineSubspace a(v2(0, 2), dirs);
  CHECK(a.dim() == 1);
  CHECK(a.orthonormality_defect() <= 1e-15);
  CHECK(AffineSubspace::point(v2(1, 2)).dim() == 0);
  CHECK_THROWS_AS(AffineSubspace(v2(NAN, 0), std::vector<Vector>{}), InvalidArgument);
  CHECK_THROWS_AS(Halfspace(v2(0, 0), 1.0), InvalidArgument);
  CHECK_THROWS_AS(Polyhedron(2, {Halfspace(Vector::Ones(3), 1.0)}), DimensionMismatch);

  Polyhedron half(2, {Halfspace(v2(0, 2), 4.0)});  // y <= 2
  CHECK(half.slack(0, v2(5, 0)) == doctest::Approx(2.0));
  CHECK(half.contains(v2(0, 2), 0.0));
  CHECK_FALSE(half.contains(v2(0, 2.1), 1e-9));
  CHECK(half.active_set(v2(7, 2), 1e-12) == std::vector<int>{0});
  CHECK(Polyhedron(3).contains(Vector::Constant(3, 1e9), 0.0));
}
