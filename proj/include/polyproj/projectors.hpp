#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "polyproj/geometry.hpp"

namespace polyproj {

/// The epigraph of exp, {(x, y) : exp(x) <= y}, in the plane.
struct EpiExp {};

/// Anything the iteration engine can project onto.
using Target = std::variant<AffineSubspace, Polyhedron, EpiExp>;

int ambient_dim(const Target& target);

Vector project_affine(const AffineSubspace& a, const Vector& x);

/// Result of an exact polyhedral projection.
struct PolyhedralProjection {
  Vector point;
  /// Constraints tight at `point` within Tolerances::act.
  std::vector<int> active;
  /// The inequality indices of the accepted candidate (linearly independent
  /// normals); feeding it back as a hint usually skips the enumeration.
  std::vector<int> support;
};

/// Nearest point of C to x.
///
/// Candidate active sets J are tried in order of size; a candidate is
/// accepted when the projection q of x onto {<a_i, .> = beta_i, i in J} is
/// feasible for C and x - q lies in the cone spanned by {a_i : i in J}
/// (checked with NNLS). Only sets with independent normals are needed, and
/// for x outside C a valid J must contain a constraint x violates.
///
/// Throws EmptyPolyhedron when no candidate passes and the feasibility sweep
/// finds no point of C.
PolyhedralProjection project_polyhedron(const Polyhedron& c, const Vector& x, const Tolerances& tol = {},
                                        std::span<const int> hint = {});

/// Projection onto the face set C ∩ {<a_i, .> = beta_i : i in equalities}.
PolyhedralProjection project_polyhedron_face(const Polyhedron& c, std::span<const int> equalities,
                                             const Vector& x, const Tolerances& tol = {});

/// Some point of C ∩ {equalities}, or nullopt when that set is empty.
std::optional<Vector> find_feasible_point(const Polyhedron& c, std::span<const int> equalities = {},
                                          const Tolerances& tol = {});

/// Nearest point of epi(exp) to (x0, y0). Points below the graph land on
/// (t, exp(t)) where t solves (t - x0) + exp(t) (exp(t) - y0) = 0, t < x0.
Eigen::Vector2d project_epiexp(double x0, double y0);

/// Dispatches to the projector matching the target.
Vector project(const Target& target, const Vector& x, const Tolerances& tol = {});

/// (1 - lambda) x + lambda * p, where p is a projection of x.
Vector relax(const Vector& x, const Vector& p, double lambda);

/// (1 - lambda) Id + lambda P_target, lambda in [0, 2].
class RelaxedProjector {
 public:
  RelaxedProjector(Target target, double lambda);

  const Target& target() const { return target_; }
  double lambda() const { return lambda_; }

  Vector apply(const Vector& x, const Tolerances& tol = {}) const;

 private:
  Target target_;
  double lambda_;
};

}  // namespace polyproj
