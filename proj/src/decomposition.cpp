#include "polyproj/decomposition.hpp"

#include <string>

#include "polyproj/errors.hpp"
#include "polyproj/projectors.hpp"

namespace polyproj {

namespace {

constexpr const char* kModule = "decomposition";

AffineSubspace kernel_of(const std::vector<EqualityRow>& rows, int dim, const Tolerances& tol) {
  auto k = affine_from_equalities(rows, dim, tol);
  // Homogeneous systems are always consistent.
  if (!k) throw NumericalFailure(kModule, "homogeneous system reported inconsistent");
  return std::move(*k);
}

}  // namespace

SplitPolyhedron split(const Polyhedron& c, const std::optional<AffineSubspace>& k, const Tolerances& tol) {
  const int dim = c.ambient_dim();
  std::vector<EqualityRow> homogeneous;
  for (int i = 0; i < c.size(); ++i) homogeneous.push_back({c.unit_normals().row(i).transpose(), 0.0});

  AffineSubspace kk = k ? *k : kernel_of(homogeneous, dim, tol);
  if (k) {
    if (k->ambient_dim() != dim) throw DimensionMismatch(kModule, "K and C live in different dimensions");
    if (k->base().norm() > tol.orth) throw KNotInKernel(kModule, "K must be a linear subspace (zero base)");
    if (c.size() > 0 && k->dim() > 0) {
      const double leak = (c.unit_normals() * k->basis()).cwiseAbs().maxCoeff();
      if (leak > tol.orth) {
        throw KNotInKernel(kModule, "K is not orthogonal to every normal (max |<a_i, k>| = " + std::to_string(leak) + ")");
      }
    }
  }

  Matrix kperp = orthogonal_complement(kk.basis(), dim);
  const Matrix d_normals = c.unit_normals() * kperp;
  std::vector<Halfspace> hs;
  for (int i = 0; i < c.size(); ++i) hs.emplace_back(d_normals.row(i).transpose(), c.unit_offsets()(i));
  Polyhedron d(static_cast<int>(kperp.cols()), std::move(hs));
  return SplitPolyhedron{c, std::move(kk), std::move(kperp), std::move(d)};
}

Vector project_via_split(const SplitPolyhedron& s, const Vector& x, const Tolerances& tol) {
  require_same_dim(s.k.base(), x, kModule);
  const Vector y = project_polyhedron(s.d, s.to_kperp(x), tol).point;
  return s.project_k(x) + s.lift(y);
}

AffineSubspace common_kernel(std::span<const Polyhedron> cs, const Tolerances& tol) {
  if (cs.empty()) throw InvalidArgument(kModule, "common kernel of an empty collection");
  const int dim = cs.front().ambient_dim();
  std::vector<EqualityRow> rows;
  for (const auto& c : cs) {
    if (c.ambient_dim() != dim) throw DimensionMismatch(kModule, "polyhedra of different dimensions");
    for (int i = 0; i < c.size(); ++i) rows.push_back({c.unit_normals().row(i).transpose(), 0.0});
  }
  return kernel_of(rows, dim, tol);
}

}  // namespace polyproj
