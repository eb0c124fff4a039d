#include "polyproj/faces.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "polyproj/errors.hpp"
#include "polyproj/projectors.hpp"

namespace polyproj {

namespace {

constexpr const char* kModule = "faces";
constexpr double kProbeStart = 1.0;
constexpr double kProbeStop = 1e-5;

AffineSubspace hull_of(const Polyhedron& c, const std::vector<int>& active, const Tolerances& tol,
                       double scale = 1.0) {
  // Activity is decided at tol.act, so the equalities only agree to that level.
  Tolerances loose = tol;
  loose.feas = std::max(tol.feas * scale, tol.act);
  auto hull = affine_from_equalities(c.equality_rows(active), c.ambient_dim(), loose);
  if (!hull) throw NumericalFailure(kModule, "active constraints of a nonempty face are inconsistent");
  return std::move(*hull);
}

// C_J ∩ {slack_i >= t} as a polyhedron with the extra constraint appended.
Polyhedron with_margin(const Polyhedron& c, int i, double t) {
  auto hs = c.halfspaces();
  hs.emplace_back(c.unit_normals().row(i).transpose(), c.unit_offsets()(i) - t);
  return Polyhedron(c.ambient_dim(), std::move(hs));
}

}  // namespace

const Face* FaceLattice::find(const std::vector<int>& active) const {
  for (const auto& f : faces) {
    if (f.active == active) return &f;
  }
  return nullptr;
}

bool in_relative_interior(const Face& face, const Vector& c, const Tolerances& tol) {
  const Vector s = face.parent->slacks(c);
  for (int i = 0; i < face.parent->size(); ++i) {
    const bool eq = std::binary_search(face.active.begin(), face.active.end(), i);
    if (eq ? std::abs(s(i)) > tol.act : s(i) <= tol.act) return false;
  }
  return true;
}

std::optional<Face> face_of_index_set(std::shared_ptr<const Polyhedron> c, std::vector<int> j,
                                      const Tolerances& tol) {
  std::sort(j.begin(), j.end());
  j.erase(std::unique(j.begin(), j.end()), j.end());
  // Witnesses must clear act, so feasibility is decided well below it even
  // when the caller loosened feas.
  Tolerances fine = tol;
  fine.feas = std::min(tol.feas, 1e-2 * tol.act);
  auto start = find_feasible_point(*c, j, fine);
  if (!start) return std::nullopt;

  std::vector<Vector> points{*start};
  std::vector<int> implicit = j;
  for (int i = 0; i < c->size(); ++i) {
    if (std::binary_search(j.begin(), j.end(), i)) continue;
    bool slack_seen = false;
    for (const auto& p : points) {
      if (c->slack(i, p) >= kProbeStop) {
        slack_seen = true;
        break;
      }
    }
    for (double t = kProbeStart; !slack_seen && t >= kProbeStop * 0.999; t *= 0.1) {
      const Polyhedron probe = with_margin(*c, i, t);
      if (auto p = find_feasible_point(probe, j, fine)) {
        points.push_back(std::move(*p));
        slack_seen = true;
      }
    }
    if (!slack_seen) implicit.push_back(i);
  }
  std::sort(implicit.begin(), implicit.end());

  Vector witness = Vector::Zero(c->ambient_dim());
  for (const auto& p : points) witness += p;
  witness /= static_cast<double>(points.size());

  Face face{c, implicit, hull_of(*c, implicit, tol), {}};
  face.witness = project_affine(face.hull, witness);
  if (!in_relative_interior(face, face.witness, tol)) {
    throw NumericalFailure(kModule, "relative-interior witness failed its own membership test");
  }
  return face;
}

FaceLattice enumerate_faces(const Polyhedron& c, const Tolerances& tol) {
  if (c.size() > kFaceEnumerationCap) {
    throw CapExceeded(kModule, std::to_string(c.size()) + " constraints exceeds the cap of " +
                                   std::to_string(kFaceEnumerationCap));
  }
  auto parent = std::make_shared<const Polyhedron>(c);
  const int m = c.size();
  FaceLattice lattice;
  std::set<std::vector<int>> seen;
  std::vector<unsigned> empty_masks;

  // Increasing popcount so that empty subsets prune their supersets.
  std::vector<unsigned> masks(1u << m);
  for (unsigned k = 0; k < masks.size(); ++k) masks[k] = k;
  std::stable_sort(masks.begin(), masks.end(),
                   [](unsigned a, unsigned b) { return __builtin_popcount(a) < __builtin_popcount(b); });

  for (unsigned mask : masks) {
    if (std::any_of(empty_masks.begin(), empty_masks.end(), [&](unsigned e) { return (mask & e) == e; })) continue;
    std::vector<int> j;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) j.push_back(i);
    }
    auto face = face_of_index_set(parent, j, tol);
    if (!face) {
      if (mask == 0) throw EmptyPolyhedron(kModule, "cannot enumerate faces of an empty polyhedron");
      empty_masks.push_back(mask);
      continue;
    }
    if (seen.insert(face->active).second) lattice.faces.push_back(std::move(*face));
  }
  return lattice;
}

namespace {

// `scale` multiplies feas, as in the projector that produced `point`.
Face minimal_face_at_scale(const Polyhedron& c, const Vector& point, const Tolerances& tol, double scale) {
  if (!c.contains(point, tol.feas * scale)) throw PointNotInSet(kModule, "point is not in the polyhedron");
  // Every constraint outside the tight set is slack at `point` itself, so the
  // tight set is exactly the implicit-equality set of its face.
  std::vector<int> active = c.active_set(point, tol.act);
  Face face{std::make_shared<const Polyhedron>(c), active, hull_of(c, active, tol, scale), point};
  // No further check: |slack| <= act on the tight set and > act off it is the
  // relative-interior condition. Under a feas looser than act a constraint
  // may also be violated by more than act; the point then sits just outside
  // C and gets the face of its tight set.
  return face;
}

}  // namespace

Face minimal_face(const Polyhedron& c, const Vector& point, const Tolerances& tol) {
  return minimal_face_at_scale(c, point, tol, 1.0 + point.norm());
}

FaceProjection face_of_projection(const Polyhedron& c, const Vector& x, const Tolerances& tol) {
  auto proj = project_polyhedron(c, x, tol);
  // The projector accepted proj.point relative to the size of x.
  const double scale = 1.0 + std::max(x.norm(), proj.point.norm());
  Face face = minimal_face_at_scale(c, proj.point, tol, scale);
  const double discrepancy = (project_affine(face.hull, x) - proj.point).norm();
  if (discrepancy > 10.0 * tol.feas * scale) {
    throw NumericalFailure(kModule, "projection onto the face hull differs from the projection by " +
                                        std::to_string(discrepancy));
  }
  return {std::move(face), std::move(proj.point), discrepancy};
}

PartitionReport partition_check(const Polyhedron& c, const std::vector<Vector>& samples, const Tolerances& tol) {
  const FaceLattice lattice = enumerate_faces(c, tol);
  PartitionReport report;
  report.samples = samples.size();
  report.faces = lattice.size();
  for (std::size_t s = 0; s < samples.size(); ++s) {
    int count = 0;
    for (const auto& f : lattice.faces) {
      if (in_relative_interior(f, samples[s], tol)) ++count;
    }
    report.counts.push_back(count);
    if (count != 1) report.violations.push_back(s);
  }
  return report;
}

}  // namespace polyproj
