#include "polyproj/iteration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "polyproj/csv.hpp"
#include "polyproj/errors.hpp"
#include "polyproj/rng.hpp"

namespace polyproj {

namespace {

constexpr const char* kModule = "iteration";

void require_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 2.0)) {
    throw InvalidArgument(kModule, "relaxation parameter " + std::to_string(lambda) + " outside [0, 2]");
  }
}

// Projector with per-set warm starts for polyhedral active sets.
class CachedProjector {
 public:
  CachedProjector(const Collection& c, const Tolerances& tol) : c_(c), tol_(tol), hints_(c.size()) {}

  Vector operator()(std::size_t i, const Vector& x) {
    if (const auto* poly = std::get_if<Polyhedron>(&c_[i])) {
      auto r = project_polyhedron(*poly, x, tol_, hints_[i]);
      hints_[i] = std::move(r.support);
      return std::move(r.point);
    }
    return project(c_[i], x, tol_);
  }

 private:
  const Collection& c_;
  Tolerances tol_;
  std::vector<std::vector<int>> hints_;
};

}  // namespace

Collection::Collection(std::vector<Target> sets, const Tolerances& tol) : sets_(std::move(sets)) {
  if (sets_.empty()) throw InvalidArgument(kModule, "collection needs at least one set");
  dim_ = polyproj::ambient_dim(sets_.front());
  for (std::size_t i = 0; i < sets_.size(); ++i) {
    if (polyproj::ambient_dim(sets_[i]) != dim_) {
      throw DimensionMismatch(kModule, "set " + std::to_string(i) + " has dimension " +
                                           std::to_string(polyproj::ambient_dim(sets_[i])) + ", expected " + std::to_string(dim_));
    }
    if (const auto* poly = std::get_if<Polyhedron>(&sets_[i])) {
      if (!find_feasible_point(*poly, {}, tol)) {
        throw EmptyPolyhedron(kModule, "set " + std::to_string(i) + " is an empty polyhedron");
      }
    }
  }
}

RelaxationSchedule RelaxationSchedule::constant(double lambda) {
  require_lambda(lambda);
  RelaxationSchedule s;
  s.kind_ = Kind::Constant;
  s.lambda_max_ = lambda;
  return s;
}

RelaxationSchedule RelaxationSchedule::sequence(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument(kModule, "empty relaxation sequence");
  for (double v : values) require_lambda(v);
  RelaxationSchedule s;
  s.kind_ = Kind::Sequence;
  s.lambda_max_ = *std::max_element(values.begin(), values.end());
  s.values_ = std::move(values);
  return s;
}

RelaxationSchedule RelaxationSchedule::formula(LambdaSchedule schedule) {
  RelaxationSchedule s;
  s.kind_ = Kind::Formula;
  s.lambda_max_ = 2.0;
  s.formula_ = std::move(schedule);
  return s;
}

RelaxationSchedule RelaxationSchedule::random_in(double lambda_max, std::uint64_t seed) {
  require_lambda(lambda_max);
  RelaxationSchedule s;
  s.kind_ = Kind::RandomIn;
  s.lambda_max_ = lambda_max;
  s.seed_ = seed;
  return s;
}

std::string RelaxationSchedule::describe() const {
  switch (kind_) {
    case Kind::Constant: return "constant(" + format_double(lambda_max_) + ")";
    case Kind::Sequence: return "sequence(" + std::to_string(values_.size()) + " values)";
    case Kind::Formula: return "formula(" + formula_->label() + ")";
    case Kind::RandomIn: return "random_in([0, " + format_double(lambda_max_) + "], seed " + std::to_string(seed_) + ")";
  }
  return "unknown";
}

double RelaxationSchedule::at(std::size_t n, std::mt19937_64& rng) const {
  switch (kind_) {
    case Kind::Constant: return lambda_max_;
    case Kind::Sequence: return values_[n % values_.size()];
    case Kind::Formula: return (*formula_)(n);
    case Kind::RandomIn: return lambda_max_ * unit_uniform(rng);
  }
  return lambda_max_;
}

Trajectory run(const Collection& c, const SelectionPolicy& policy, const RelaxationSchedule& sched,
               const Vector& x0, std::size_t n_steps, const Tolerances& tol) {
  if (x0.size() != c.ambient_dim()) {
    throw DimensionMismatch(kModule, "start point of dimension " + std::to_string(x0.size()) +
                                         " for collection of dimension " + std::to_string(c.ambient_dim()));
  }
  if (policy.kind == SelectionPolicy::Kind::Scripted) {
    if (policy.script.empty()) throw InvalidArgument(kModule, "scripted policy without picks");
    for (auto i : policy.script) {
      if (i >= c.size()) throw InvalidArgument(kModule, "scripted pick " + std::to_string(i) + " out of range");
    }
  }

  std::mt19937_64 policy_rng(policy.seed);
  std::mt19937_64 schedule_rng(sched.seed());
  CachedProjector proj(c, tol);

  Trajectory t;
  t.iterates.reserve(n_steps + 1);
  t.norms.reserve(n_steps + 1);
  t.picks.reserve(n_steps);
  t.running_max.reserve(n_steps + 1);
  t.iterates.push_back(x0);
  t.norms.push_back(x0.norm());
  t.running_max.push_back(t.norms.back());

  for (std::size_t n = 0; n < n_steps; ++n) {
    const Vector& x = t.iterates.back();
    std::size_t pick = 0;
    Vector p;
    switch (policy.kind) {
      case SelectionPolicy::Kind::Cyclic: pick = n % c.size(); break;
      case SelectionPolicy::Kind::RandomUniform: pick = static_cast<std::size_t>(policy_rng() % c.size()); break;
      case SelectionPolicy::Kind::Scripted: pick = policy.script[n % policy.script.size()]; break;
      case SelectionPolicy::Kind::Farthest: {
        double best = -1.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
          Vector q = proj(i, x);
          const double dist = (x - q).norm();
          if (dist > best) {
            best = dist;
            pick = i;
            p = std::move(q);
          }
        }
        break;
      }
    }
    if (policy.kind != SelectionPolicy::Kind::Farthest) p = proj(pick, x);

    const double lambda = sched.at(n, schedule_rng);
    require_lambda(lambda);
    // lambda = 0 must leave the iterate bit-identical.
    Vector next = lambda == 0.0 ? x : relax(x, p, lambda);
    t.picks.push_back({pick, lambda});
    t.norms.push_back(next.norm());
    if (t.norms.back() > t.norms[t.norms.size() - 2]) t.norms_nonincreasing = false;
    t.running_max.push_back(std::max(t.running_max.back(), t.norms.back()));
    t.iterates.push_back(std::move(next));
  }
  return t;
}

std::string_view to_string(Verdict v) { return v == Verdict::Growing ? "GROWING" : "STABLE"; }

BoundednessReport boundedness_report(const Trajectory& t, std::size_t window) {
  if (window == 0) throw InvalidArgument(kModule, "boundedness window must be at least 1");
  BoundednessReport r;
  const std::size_t count = t.norms.size();
  if (count == 0) return r;
  const std::size_t last = count - 1;
  window = std::min(window, count);

  r.sup_norm = t.running_max.back();
  r.sup_first_window = *std::max_element(t.norms.begin(), t.norms.begin() + static_cast<std::ptrdiff_t>(window));
  r.sup_trailing_window = *std::max_element(t.norms.end() - static_cast<std::ptrdiff_t>(window), t.norms.end());

  // Log-norm trend over the trailing half.
  const std::size_t from = last / 2;
  const std::size_t len = last - from + 1;
  if (len >= 2) {
    double mean_n = 0.0;
    double mean_l = 0.0;
    for (std::size_t n = from; n <= last; ++n) {
      mean_n += static_cast<double>(n);
      mean_l += std::log(std::max(t.norms[n], 1e-300));
    }
    mean_n /= static_cast<double>(len);
    mean_l /= static_cast<double>(len);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t n = from; n <= last; ++n) {
      const double dn = static_cast<double>(n) - mean_n;
      num += dn * (std::log(std::max(t.norms[n], 1e-300)) - mean_l);
      den += dn * dn;
    }
    r.trailing_log_slope = den > 0.0 ? num / den : 0.0;
  }

  const bool fast = r.sup_trailing_window >= kGrowthFactor * r.sup_first_window && r.trailing_log_slope > kGrowthSlope;

  bool slow = false;
  if (last >= 8) {
    const auto& s = t.running_max;
    r.gain_previous_half = s[last / 2] - s[last / 4];
    r.gain_last_half = s[last] - s[last / 2];
    std::size_t last_record = 0;
    for (std::size_t n = 1; n <= last; ++n) {
      if (t.norms[n] > s[n - 1]) last_record = n;
    }
    slow = r.gain_previous_half > 0.0 && r.gain_last_half >= kSlowGrowthRatio * r.gain_previous_half &&
           r.gain_last_half > 1e-12 * (1.0 + s[last]) && last_record >= last - last / 10;
  }
  r.verdict = (fast || slow) ? Verdict::Growing : Verdict::Stable;
  return r;
}

FejerReport fejer_check(const Trajectory& t, const Collection& c, const std::optional<Vector>& z,
                        const Tolerances& tol) {
  FejerReport r;
  if (z) {
    r.reference = *z;
  } else {
    std::vector<Halfspace> hs;
    for (const auto& target : c.sets()) {
      if (const auto* poly = std::get_if<Polyhedron>(&target)) {
        hs.insert(hs.end(), poly->halfspaces().begin(), poly->halfspaces().end());
      } else if (const auto* aff = std::get_if<AffineSubspace>(&target)) {
        for (const auto& row : aff->to_equalities()) {
          hs.emplace_back(row.normal, row.value);
          hs.emplace_back(-row.normal, -row.value);
        }
      } else {
        throw NotApplicable(kModule, "common-point search does not handle epi(exp); supply a reference point");
      }
    }
    auto common = find_feasible_point(Polyhedron(c.ambient_dim(), std::move(hs)), {}, tol);
    if (!common) throw NotApplicable(kModule, "the sets have no common point");
    r.reference = std::move(*common);
  }
  require_same_dim(r.reference, t.iterates.front(), kModule);

  r.worst_increase = -std::numeric_limits<double>::infinity();
  double prev = (t.iterates.front() - r.reference).norm();
  for (std::size_t n = 1; n < t.iterates.size(); ++n) {
    const double cur = (t.iterates[n] - r.reference).norm();
    r.worst_increase = std::max(r.worst_increase, cur - prev);
    if (cur > prev + tol.feas * std::max(1.0, prev)) ++r.violations;
    prev = cur;
  }
  if (t.iterates.size() < 2) r.worst_increase = 0.0;
  return r;
}

Trajectory divergence_experiment_line_epiexp(const Vector& x0, std::size_t n_steps) {
  if (x0.size() != 2) throw DimensionMismatch(kModule, "the line/epi(exp) experiment lives in dimension 2");
  const Vector e1 = Vector::Unit(2, 0);
  const Collection c({AffineSubspace(Vector::Zero(2), std::span<const Vector>(&e1, 1)), EpiExp{}});
  return run(c, SelectionPolicy::cyclic(), RelaxationSchedule::constant(1.0), x0, n_steps);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
  const auto dim = t.iterates.empty() ? 0 : t.iterates.front().size();
  os << 'n';
  for (Eigen::Index j = 1; j <= dim; ++j) os << ",x_" << j;
  os << ",norm,set_index,lambda\n";
  for (std::size_t n = 0; n < t.iterates.size(); ++n) {
    os << n;
    for (Eigen::Index j = 0; j < dim; ++j) os << ',' << format_double(t.iterates[n](j));
    os << ',' << format_double(t.norms[n]);
    if (n == 0) {
      os << ",,";
    } else {
      os << ',' << t.picks[n - 1].set << ',' << format_double(t.picks[n - 1].lambda);
    }
    os << '\n';
  }
}

}  // namespace polyproj
