#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

#include "polyproj/tolerances.hpp"

namespace polyproj {

/// Dense coordinate vector. Dimension is the vector's size.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Throws DimensionMismatch unless both vectors have the same size.
void require_same_dim(const Vector& u, const Vector& v, const char* module);

double inner(const Vector& u, const Vector& v);

/// Orthonormal basis of span(vectors), built by modified Gram-Schmidt with a
/// second re-orthogonalization pass. A direction is dropped when its residual
/// falls below `tol.rank` times the largest input norm.
std::vector<Vector> orthonormalize(std::span<const Vector> vectors, const Tolerances& tol = {});

/// Orthonormal basis (as columns) of the orthogonal complement of the span of
/// the orthonormal columns of `basis`, in dimension `dim`.
Matrix orthogonal_complement(const Matrix& basis, int dim);

/// One linear equality <normal, x> = value.
struct EqualityRow {
  Vector normal;
  double value = 0.0;
};

/// Closed affine subspace stored as base point plus orthonormal direction basis.
class AffineSubspace {
 public:
  /// Orthonormalizes `directions`; dependent directions are dropped.
  AffineSubspace(Vector base, std::span<const Vector> directions, const Tolerances& tol = {});

  static AffineSubspace point(Vector p);
  static AffineSubspace whole_space(int dim);
  static AffineSubspace linear_span(std::span<const Vector> directions, int dim,
                                    const Tolerances& tol = {});

  int ambient_dim() const { return static_cast<int>(base_.size()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Vector& base() const { return base_; }
  /// Direction basis, one orthonormal vector per column.
  const Matrix& basis() const { return basis_; }
  std::vector<Vector> basis_vectors() const;

  /// max |<b_i,b_j> - delta_ij| over basis pairs.
  double orthonormality_defect() const;

  /// Equality form: one unit-normal row per direction of the orthogonal complement.
  std::vector<EqualityRow> to_equalities() const;

 private:
  AffineSubspace(Vector base, Matrix basis) : base_(std::move(base)), basis_(std::move(basis)) {}
  friend std::optional<AffineSubspace> affine_from_equalities(std::span<const EqualityRow>, int,
                                                              const Tolerances&);

  Vector base_;
  Matrix basis_;
};

/// Solution set of the equalities, or nullopt when the system is inconsistent
/// (least-squares residual above `tol.feas`).
std::optional<AffineSubspace> affine_from_equalities(std::span<const EqualityRow> rows, int ambient_dim,
                                                     const Tolerances& tol = {});

/// Closed halfspace {x : <normal, x> <= offset}.
class Halfspace {
 public:
  Halfspace(Vector normal, double offset);

  const Vector& normal() const { return normal_; }
  double offset() const { return offset_; }
  int dim() const { return static_cast<int>(normal_.size()); }

 private:
  Vector normal_;
  double offset_;
};

/// Finite intersection of halfspaces. An empty list is the whole space.
///
/// Unit-normalized copies of the constraints are cached; every slack the
/// library reports is a signed distance to the bounding hyperplane.
class Polyhedron {
 public:
  Polyhedron(int ambient_dim, std::vector<Halfspace> halfspaces = {});

  int ambient_dim() const { return dim_; }
  int size() const { return static_cast<int>(halfspaces_.size()); }
  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }

  /// Row i is the unit normal of constraint i.
  const Matrix& unit_normals() const { return unit_normals_; }
  const Vector& unit_offsets() const { return unit_offsets_; }

  /// Signed distance of x inside constraint i (negative when violated).
  double slack(int i, const Vector& x) const;
  /// All slacks at once.
  Vector slacks(const Vector& x) const;
  bool contains(const Vector& x, double tol) const;

  /// Indices with |slack| <= tol, in increasing order.
  std::vector<int> active_set(const Vector& x, double tol) const;

  /// Unit-normal equality rows for the given constraint indices.
  std::vector<EqualityRow> equality_rows(std::span<const int> indices) const;

 private:
  int dim_;
  std::vector<Halfspace> halfspaces_;
  Matrix unit_normals_;
  Vector unit_offsets_;
};

}  // namespace polyproj
