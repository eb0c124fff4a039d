#pragma once

#include <memory>
#include <vector>

#include "polyproj/geometry.hpp"

namespace polyproj {

/// Most constraints enumerate_faces will accept (2^12 candidate sets).
inline constexpr int kFaceEnumerationCap = 12;

/// A nonempty face C ∩ {<a_i, .> = beta_i : i in active} of a polyhedron.
struct Face {
  std::shared_ptr<const Polyhedron> parent;
  /// Every constraint that holds with equality on the whole face, sorted.
  std::vector<int> active;
  /// Affine hull of the face.
  AffineSubspace hull;
  /// A point of the relative interior.
  Vector witness;

  int dim() const { return hull.dim(); }
};

/// All faces of a polyhedron, one entry per distinct face.
struct FaceLattice {
  std::vector<Face> faces;

  std::size_t size() const { return faces.size(); }
  /// Face whose implicit-equality set is `active`, or nullptr.
  const Face* find(const std::vector<int>& active) const;
};

/// True when c is in the relative interior of `face`: tight on the face's
/// equalities and slack by more than `tol.act` on every other constraint.
bool in_relative_interior(const Face& face, const Vector& c, const Tolerances& tol = {});

/// The face C_J for an arbitrary index set J, or nullopt when C_J is empty.
///
/// Implicit equalities of C_J are found by probing, for each i outside J,
/// whether C_J ∩ {slack_i >= t} is nonempty for t from 1 down to 1e-5; the
/// witness is the average of the probe points, so it is slack on every
/// non-implicit constraint.
std::optional<Face> face_of_index_set(std::shared_ptr<const Polyhedron> c, std::vector<int> j,
                                      const Tolerances& tol = {});

/// Throws EmptyPolyhedron, or CapExceeded beyond kFaceEnumerationCap constraints.
FaceLattice enumerate_faces(const Polyhedron& c, const Tolerances& tol = {});

/// The unique face with c in its relative interior. Throws PointNotInSet.
Face minimal_face(const Polyhedron& c, const Vector& point, const Tolerances& tol = {});

struct FaceProjection {
  Face face;
  Vector point;
  /// ||P_{aff F} x - P_C x||.
  double hull_discrepancy = 0.0;
};

/// P_C x together with its minimal face F; throws NumericalFailure unless
/// P_{aff F} x reproduces P_C x within 10 * tol.feas * (1 + max(|x|, |P_C x|)).
FaceProjection face_of_projection(const Polyhedron& c, const Vector& x, const Tolerances& tol = {});

struct PartitionReport {
  std::size_t samples = 0;
  std::size_t faces = 0;
  /// Number of faces whose relative interior holds each sample.
  std::vector<int> counts;
  /// Sample indices with a count other than 1.
  std::vector<std::size_t> violations;
};

PartitionReport partition_check(const Polyhedron& c, const std::vector<Vector>& samples,
                                const Tolerances& tol = {});

}  // namespace polyproj
