#include "polyproj/projectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "polyproj/errors.hpp"
#include "polyproj/nnls.hpp"

namespace polyproj {

namespace {

constexpr const char* kModule = "projectors";

// Advances `idx` (a strictly increasing k-subset of [0, n)) to the next
// subset in lexicographic order. Returns false after the last one.
bool next_combination(std::vector<int>& idx, int n) {
  const int k = static_cast<int>(idx.size());
  for (int i = k - 1; i >= 0; --i) {
    if (idx[static_cast<std::size_t>(i)] < n - k + i) {
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

// Projection onto C ∩ {equalities} by candidate enumeration.
class ActiveSetSearch {
 public:
  ActiveSetSearch(const Polyhedron& c, std::span<const int> equalities, const Vector& x, const Tolerances& tol)
      : c_(c), x_(x), tol_(tol), eq_(equalities.begin(), equalities.end()) {
    if (x.size() != c.ambient_dim()) {
      throw DimensionMismatch(kModule, "point of dimension " + std::to_string(x.size()) +
                                           " for polyhedron of dimension " + std::to_string(c.ambient_dim()));
    }
    std::sort(eq_.begin(), eq_.end());
    eq_.erase(std::unique(eq_.begin(), eq_.end()), eq_.end());
    std::vector<bool> is_eq(static_cast<std::size_t>(c.size()), false);
    for (int i : eq_) {
      if (i < 0 || i >= c.size()) throw InvalidArgument(kModule, "equality index out of range");
      is_eq[static_cast<std::size_t>(i)] = true;
    }
    for (int i = 0; i < c.size(); ++i) {
      if (!is_eq[static_cast<std::size_t>(i)]) ineq_.push_back(i);
    }
    select_independent_equalities();
    scale_ = 1.0 + x.norm();
  }

  std::optional<PolyhedralProjection> run(std::span<const int> hint) {
    // Points of aff(E) have the same projection as x, and relative to such a
    // point every valid candidate must contain a violated constraint.
    Vector anchor = x_;
    if (!eq_ind_.empty()) {
      auto q = affine_projection(eq_ind_, x_);
      if (!q) return sweep();
      anchor = *q;
    }
    std::vector<bool> violated(static_cast<std::size_t>(c_.size()), false);
    bool any_violated = false;
    for (int i : ineq_) {
      if (c_.slack(i, anchor) < -tol_.feas * scale_) {
        violated[static_cast<std::size_t>(i)] = true;
        any_violated = true;
      }
    }

    if (!hint.empty() && hint_is_usable(hint)) {
      std::vector<int> s(hint.begin(), hint.end());
      if (auto r = try_candidate(s)) return r;
    }
    if (!any_violated) {
      if (auto r = try_candidate({})) return r;
    }

    const int max_k = std::min<int>(static_cast<int>(ineq_.size()), c_.ambient_dim() - static_cast<int>(eq_ind_.size()));
    const int n = static_cast<int>(ineq_.size());
    for (int k = 1; k <= max_k; ++k) {
      std::vector<int> pos(static_cast<std::size_t>(k));
      for (int j = 0; j < k; ++j) pos[static_cast<std::size_t>(j)] = j;
      do {
        std::vector<int> s(static_cast<std::size_t>(k));
        bool touches_violated = false;
        for (int j = 0; j < k; ++j) {
          s[static_cast<std::size_t>(j)] = ineq_[static_cast<std::size_t>(pos[static_cast<std::size_t>(j)])];
          touches_violated = touches_violated || violated[static_cast<std::size_t>(s[static_cast<std::size_t>(j)])];
        }
        if (!touches_violated) continue;
        if (auto r = try_candidate(s)) return r;
      } while (next_combination(pos, n));
    }
    return sweep();
  }

  // Min-norm points of every candidate affine set; nullopt when none is
  // feasible, which certifies C ∩ {equalities} empty.
  std::optional<Vector> feasibility_sweep() const {
    const Vector zero = Vector::Zero(c_.ambient_dim());
    const int max_k = std::min<int>(static_cast<int>(ineq_.size()), c_.ambient_dim() - static_cast<int>(eq_ind_.size()));
    const int n = static_cast<int>(ineq_.size());
    for (int k = 0; k <= max_k; ++k) {
      std::vector<int> pos(static_cast<std::size_t>(k));
      for (int j = 0; j < k; ++j) pos[static_cast<std::size_t>(j)] = j;
      do {
        std::vector<int> rows = eq_ind_;
        for (int p : pos) rows.push_back(ineq_[static_cast<std::size_t>(p)]);
        if (auto q = affine_projection(rows, zero)) {
          if (feasible(*q, 1.0 + q->norm())) return q;
        }
      } while (k > 0 && next_combination(pos, n));
    }
    return std::nullopt;
  }

 private:
  void select_independent_equalities() {
    std::vector<Vector> basis;
    for (int i : eq_) {
      Vector w = c_.unit_normals().row(i).transpose();
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) w -= q.dot(w) * q;
      }
      const double n = w.norm();
      if (n > tol_.rank) {
        basis.push_back(w / n);
        eq_ind_.push_back(i);
      }
    }
  }

  bool hint_is_usable(std::span<const int> hint) const {
    for (int i : hint) {
      if (i < 0 || i >= c_.size()) return false;
      if (std::binary_search(eq_.begin(), eq_.end(), i)) return false;
    }
    return std::is_sorted(hint.begin(), hint.end());
  }

  // Projection of y onto {<a_i, .> = beta_i : i in rows}; nullopt when the
  // unit normals of `rows` are numerically dependent.
  std::optional<Vector> affine_projection(const std::vector<int>& rows, const Vector& y) const {
    if (rows.empty()) return y;
    const auto k = static_cast<Eigen::Index>(rows.size());
    Matrix a(k, c_.ambient_dim());
    Vector r(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const int i = rows[static_cast<std::size_t>(j)];
      a.row(j) = c_.unit_normals().row(i);
      r(j) = a.row(j).dot(y) - c_.unit_offsets()(i);
    }
    const Matrix gram = a * a.transpose();
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) return std::nullopt;
    // For unit rows the Cholesky diagonal is the distance of each row from
    // the span of the previous ones.
    const Matrix l = llt.matrixL();
    if (l.diagonal().minCoeff() <= tol_.rank) return std::nullopt;
    const Vector mu = llt.solve(r);
    return Vector(y - a.transpose() * mu);
  }

  bool feasible(const Vector& q, double scale) const {
    const Vector s = c_.slacks(q);
    for (int i : ineq_) {
      if (s(i) < -tol_.feas * scale) return false;
    }
    for (int i : eq_) {
      if (std::abs(s(i)) > tol_.feas * scale) return false;
    }
    return true;
  }

  std::optional<PolyhedralProjection> try_candidate(const std::vector<int>& s) {
    std::vector<int> rows = eq_ind_;
    rows.insert(rows.end(), s.begin(), s.end());
    auto q = affine_projection(rows, x_);
    if (!q || !feasible(*q, scale_)) return std::nullopt;

    // KKT: x - q must be a combination of the equality normals (any sign)
    // and the candidate's inequality normals (nonnegative weights).
    const auto ne = static_cast<Eigen::Index>(eq_ind_.size());
    Matrix generators(c_.ambient_dim(), 2 * ne + static_cast<Eigen::Index>(s.size()));
    for (Eigen::Index j = 0; j < ne; ++j) {
      generators.col(2 * j) = c_.unit_normals().row(eq_ind_[static_cast<std::size_t>(j)]).transpose();
      generators.col(2 * j + 1) = -generators.col(2 * j);
    }
    for (std::size_t j = 0; j < s.size(); ++j) {
      generators.col(2 * ne + static_cast<Eigen::Index>(j)) = c_.unit_normals().row(s[j]).transpose();
    }
    if (!in_cone(generators, x_ - *q, tol_.dual)) return std::nullopt;

    PolyhedralProjection out;
    out.point = std::move(*q);
    out.active = c_.active_set(out.point, tol_.act);
    for (int i : eq_) {
      if (!std::binary_search(out.active.begin(), out.active.end(), i)) out.active.push_back(i);
    }
    std::sort(out.active.begin(), out.active.end());
    out.support = s;
    return out;
  }

  std::optional<PolyhedralProjection> sweep() const {
    if (feasibility_sweep()) {
      throw NumericalFailure(kModule, "no candidate active set passed the KKT test although the set is nonempty");
    }
    return std::nullopt;
  }

  const Polyhedron& c_;
  const Vector& x_;
  Tolerances tol_;
  std::vector<int> eq_;
  std::vector<int> eq_ind_;
  std::vector<int> ineq_;
  double scale_ = 1.0;
};

}  // namespace

int ambient_dim(const Target& target) {
  return std::visit(
      [](const auto& t) -> int {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, EpiExp>) {
          return 2;
        } else {
          return t.ambient_dim();
        }
      },
      target);
}

Vector project_affine(const AffineSubspace& a, const Vector& x) {
  require_same_dim(a.base(), x, kModule);
  const Vector offset = x - a.base();
  return a.base() + a.basis() * (a.basis().transpose() * offset);
}

PolyhedralProjection project_polyhedron(const Polyhedron& c, const Vector& x, const Tolerances& tol,
                                        std::span<const int> hint) {
  ActiveSetSearch search(c, {}, x, tol);
  auto r = search.run(hint);
  if (!r) throw EmptyPolyhedron(kModule, "polyhedron has no feasible point");
  return std::move(*r);
}

PolyhedralProjection project_polyhedron_face(const Polyhedron& c, std::span<const int> equalities,
                                             const Vector& x, const Tolerances& tol) {
  ActiveSetSearch search(c, equalities, x, tol);
  auto r = search.run({});
  if (!r) throw EmptyPolyhedron(kModule, "face set has no feasible point");
  return std::move(*r);
}

std::optional<Vector> find_feasible_point(const Polyhedron& c, std::span<const int> equalities,
                                          const Tolerances& tol) {
  const Vector zero = Vector::Zero(c.ambient_dim());
  ActiveSetSearch search(c, equalities, zero, tol);
  return search.feasibility_sweep();
}

Eigen::Vector2d project_epiexp(double x0, double y0) {
  if (!std::isfinite(x0) || !std::isfinite(y0)) throw InvalidArgument(kModule, "epi-exp input is not finite");
  if (y0 >= std::exp(x0)) return {x0, y0};

  // g is increasing through its unique root left of x0, and g(x0) > 0.
  const auto g = [&](double t) {
    const double e = std::exp(t);
    return (t - x0) + e * (e - y0);
  };
  const auto dg = [&](double t) {
    const double e = std::exp(t);
    return 1.0 + e * (2.0 * e - y0);
  };

  double hi = x0;
  double lo = x0 - std::abs(y0) - 2.0;
  double width = hi - lo;
  while (g(lo) > 0.0) {
    hi = lo;
    width *= 2.0;
    lo -= width;
  }

  const double gtol = 1e-12 * std::max({1.0, std::abs(x0), std::abs(y0)});
  double t = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    const double gt = g(t);
    if (std::abs(gt) <= gtol) break;
    if (gt > 0.0) {
      hi = t;
    } else {
      lo = t;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) break;
    const double d = dg(t);
    double next = (d > 0.0 && std::isfinite(d)) ? t - gt / d : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  return {t, std::exp(t)};
}

Vector project(const Target& target, const Vector& x, const Tolerances& tol) {
  return std::visit(
      [&](const auto& t) -> Vector {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, AffineSubspace>) {
          return project_affine(t, x);
        } else if constexpr (std::is_same_v<T, Polyhedron>) {
          return project_polyhedron(t, x, tol).point;
        } else {
          if (x.size() != 2) throw DimensionMismatch(kModule, "epi-exp lives in dimension 2");
          return project_epiexp(x(0), x(1));
        }
      },
      target);
}

Vector relax(const Vector& x, const Vector& p, double lambda) {
  return (1.0 - lambda) * x + lambda * p;
}

RelaxedProjector::RelaxedProjector(Target target, double lambda) : target_(std::move(target)), lambda_(lambda) {
  if (!(lambda >= 0.0 && lambda <= 2.0)) {
    throw InvalidArgument(kModule, "relaxation parameter " + std::to_string(lambda) + " outside [0, 2]");
  }
}

Vector RelaxedProjector::apply(const Vector& x, const Tolerances& tol) const {
  if (x.size() != ambient_dim(target_)) throw DimensionMismatch(kModule, "relaxed projector input dimension");
  return relax(x, project(target_, x, tol), lambda_);
}

}  // namespace polyproj
