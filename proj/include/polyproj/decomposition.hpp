#pragma once

#include <optional>
#include <span>
#include <vector>

#include "polyproj/geometry.hpp"

namespace polyproj {

/// A polyhedron C split along a linear subspace K inside the common kernel of
/// its normals: P_C = P_K + P_D P_{K⊥} with D = C ∩ K⊥.
struct SplitPolyhedron {
  Polyhedron c;
  /// Linear subspace (zero base) contained in every ker a_i.
  AffineSubspace k;
  /// Orthonormal basis of K⊥, one vector per column; it defines D's coordinates.
  Matrix kperp_basis;
  /// C ∩ K⊥ written in kperp_basis coordinates.
  Polyhedron d;

  /// Coordinates of P_{K⊥} x.
  Vector to_kperp(const Vector& x) const { return kperp_basis.transpose() * x; }
  Vector lift(const Vector& y) const { return kperp_basis * y; }
  Vector project_k(const Vector& x) const { return k.basis() * (k.basis().transpose() * x); }
};

/// Splits C. With no K given, K is the full kernel intersection, which makes
/// K⊥ the span of the normals. Throws KNotInKernel when a supplied K is not a
/// linear subspace orthogonal to every normal.
SplitPolyhedron split(const Polyhedron& c, const std::optional<AffineSubspace>& k = std::nullopt,
                      const Tolerances& tol = {});

/// P_K x + lift(P_D(coordinates of x in K⊥)).
Vector project_via_split(const SplitPolyhedron& s, const Vector& x, const Tolerances& tol = {});

/// Intersection of ker a_i over every constraint of every polyhedron.
AffineSubspace common_kernel(std::span<const Polyhedron> cs, const Tolerances& tol = {});

}  // namespace polyproj
