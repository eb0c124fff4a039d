#include "polyproj/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "polyproj/errors.hpp"

namespace polyproj {

namespace {

constexpr const char* kModule = "geometry";

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw InvalidArgument(kModule, std::string(what) + " has non-finite entries");
}

Matrix as_columns(const std::vector<Vector>& vs, int dim) {
  Matrix m(dim, static_cast<Eigen::Index>(vs.size()));
  for (std::size_t j = 0; j < vs.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = vs[j];
  return m;
}

}  // namespace

void require_same_dim(const Vector& u, const Vector& v, const char* module) {
  if (u.size() != v.size()) {
    throw DimensionMismatch(module, "dimension " + std::to_string(u.size()) + " vs " +
                                        std::to_string(v.size()));
  }
}

double inner(const Vector& u, const Vector& v) {
  require_same_dim(u, v, kModule);
  return u.dot(v);
}

std::vector<Vector> orthonormalize(std::span<const Vector> vectors, const Tolerances& tol) {
  std::vector<Vector> out;
  if (vectors.empty()) return out;
  const auto dim = vectors.front().size();
  double scale = 0.0;
  for (const auto& v : vectors) {
    if (v.size() != dim) throw DimensionMismatch(kModule, "orthonormalize: vectors of unequal dimension");
    scale = std::max(scale, v.norm());
  }
  if (scale == 0.0) return out;

  for (const auto& v : vectors) {
    Vector w = v;
    // Two MGS sweeps keep the orthogonality loss at roundoff level.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : out) w -= q.dot(w) * q;
    }
    const double n = w.norm();
    if (n > tol.rank * scale) out.push_back(w / n);
    if (static_cast<Eigen::Index>(out.size()) == dim) break;
  }
  return out;
}

Matrix orthogonal_complement(const Matrix& basis, int dim) {
  const int rank = static_cast<int>(basis.cols());
  const int want = dim - rank;
  Matrix out(dim, std::max(want, 0));
  if (want <= 0) return out;

  // Pivoted Gram-Schmidt on the columns of the complementary projector.
  Matrix residual = Matrix::Identity(dim, dim);
  if (rank > 0) residual -= basis * basis.transpose();
  for (int k = 0; k < want; ++k) {
    Eigen::Index pivot = 0;
    residual.colwise().norm().maxCoeff(&pivot);
    Vector q = residual.col(pivot);
    for (int pass = 0; pass < 2; ++pass) {
      if (rank > 0) q -= basis * (basis.transpose() * q);
      if (k > 0) q -= out.leftCols(k) * (out.leftCols(k).transpose() * q);
    }
    q.normalize();
    out.col(k) = q;
    residual -= q * (q.transpose() * residual);
  }
  return out;
}

AffineSubspace::AffineSubspace(Vector base, std::span<const Vector> directions, const Tolerances& tol)
    : base_(std::move(base)) {
  require_finite(base_, "affine base");
  for (const auto& d : directions) {
    require_same_dim(base_, d, kModule);
    require_finite(d, "affine direction");
  }
  basis_ = as_columns(orthonormalize(directions, tol), ambient_dim());
}

AffineSubspace AffineSubspace::point(Vector p) {
  require_finite(p, "point");
  const auto dim = p.size();
  return AffineSubspace(std::move(p), Matrix(dim, 0));
}

AffineSubspace AffineSubspace::whole_space(int dim) {
  return AffineSubspace(Vector::Zero(dim), Matrix::Identity(dim, dim));
}

AffineSubspace AffineSubspace::linear_span(std::span<const Vector> directions, int dim,
                                           const Tolerances& tol) {
  return AffineSubspace(Vector::Zero(dim), directions, tol);
}

std::vector<Vector> AffineSubspace::basis_vectors() const {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(dim()));
  for (int j = 0; j < dim(); ++j) out.emplace_back(basis_.col(j));
  return out;
}

double AffineSubspace::orthonormality_defect() const {
  if (dim() == 0) return 0.0;
  const Matrix gram = basis_.transpose() * basis_;
  return (gram - Matrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
}

std::vector<EqualityRow> AffineSubspace::to_equalities() const {
  const Matrix normals = orthogonal_complement(basis_, ambient_dim());
  std::vector<EqualityRow> rows;
  for (int j = 0; j < normals.cols(); ++j) {
    Vector n = normals.col(j);
    const double value = n.dot(base_);
    rows.push_back({std::move(n), value});
  }
  return rows;
}

std::optional<AffineSubspace> affine_from_equalities(std::span<const EqualityRow> rows, int ambient_dim,
                                                     const Tolerances& tol) {
  std::vector<Vector> normals;
  std::vector<double> values;
  for (const auto& row : rows) {
    if (row.normal.size() != ambient_dim) {
      throw DimensionMismatch(kModule, "equality row of dimension " + std::to_string(row.normal.size()) +
                                           " in ambient dimension " + std::to_string(ambient_dim));
    }
    const double n = row.normal.norm();
    if (n == 0.0) {
      if (std::abs(row.value) > tol.feas) return std::nullopt;
      continue;
    }
    normals.push_back(row.normal / n);
    values.push_back(row.value / n);
  }

  if (normals.empty()) return AffineSubspace::whole_space(ambient_dim);

  const auto m = static_cast<Eigen::Index>(normals.size());
  Matrix a(m, ambient_dim);
  Vector b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a.row(i) = normals[static_cast<std::size_t>(i)].transpose();
    b(i) = values[static_cast<std::size_t>(i)];
  }

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(tol.rank);
  cod.compute(a);
  Vector base = cod.solve(b);
  const double residual = (a * base - b).cwiseAbs().maxCoeff();
  if (residual > tol.feas * std::max(1.0, b.cwiseAbs().maxCoeff())) return std::nullopt;

  const Matrix row_space = as_columns(orthonormalize(normals, tol), ambient_dim);
  // Keep the base in the row space so it is the minimum-norm solution.
  base = row_space * (row_space.transpose() * base);
  return AffineSubspace(std::move(base), orthogonal_complement(row_space, ambient_dim));
}

Halfspace::Halfspace(Vector normal, double offset) : normal_(std::move(normal)), offset_(offset) {
  require_finite(normal_, "halfspace normal");
  if (!std::isfinite(offset_)) throw InvalidArgument(kModule, "halfspace offset is not finite");
  if (normal_.norm() == 0.0) throw InvalidArgument(kModule, "halfspace normal is zero");
}

Polyhedron::Polyhedron(int ambient_dim, std::vector<Halfspace> halfspaces)
    : dim_(ambient_dim), halfspaces_(std::move(halfspaces)) {
  if (dim_ < 0) throw InvalidArgument(kModule, "negative ambient dimension");
  const auto m = static_cast<Eigen::Index>(halfspaces_.size());
  unit_normals_.resize(m, dim_);
  unit_offsets_.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& h = halfspaces_[static_cast<std::size_t>(i)];
    if (h.dim() != dim_) {
      throw DimensionMismatch(kModule, "halfspace of dimension " + std::to_string(h.dim()) +
                                           " in polyhedron of dimension " + std::to_string(dim_));
    }
    const double n = h.normal().norm();
    unit_normals_.row(i) = h.normal().transpose() / n;
    unit_offsets_(i) = h.offset() / n;
  }
}

double Polyhedron::slack(int i, const Vector& x) const {
  return unit_offsets_(i) - unit_normals_.row(i).dot(x);
}

Vector Polyhedron::slacks(const Vector& x) const {
  if (x.size() != dim_) {
    throw DimensionMismatch(kModule, "point of dimension " + std::to_string(x.size()) +
                                         " for polyhedron of dimension " + std::to_string(dim_));
  }
  return unit_offsets_ - unit_normals_ * x;
}

bool Polyhedron::contains(const Vector& x, double tol) const {
  return size() == 0 || slacks(x).minCoeff() >= -tol;
}

std::vector<int> Polyhedron::active_set(const Vector& x, double tol) const {
  std::vector<int> out;
  const Vector s = slacks(x);
  for (int i = 0; i < size(); ++i) {
    if (std::abs(s(i)) <= tol) out.push_back(i);
  }
  return out;
}

std::vector<EqualityRow> Polyhedron::equality_rows(std::span<const int> indices) const {
  std::vector<EqualityRow> rows;
  rows.reserve(indices.size());
  for (int i : indices) rows.push_back({unit_normals_.row(i).transpose(), unit_offsets_(i)});
  return rows;
}

}  // namespace polyproj
