#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "polyproj/projectors.hpp"
#include "polyproj/scalar_reflect.hpp"

namespace polyproj {

/// Name of the pseudo-random generator behind every seeded policy and schedule.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64";

/// Nonempty finite list of nonempty targets sharing one ambient dimension.
class Collection {
 public:
  /// Throws InvalidArgument for an empty list, DimensionMismatch for mixed
  /// dimensions and EmptyPolyhedron for an empty polyhedron.
  explicit Collection(std::vector<Target> sets, const Tolerances& tol = {});

  int ambient_dim() const { return dim_; }
  std::size_t size() const { return sets_.size(); }
  const std::vector<Target>& sets() const { return sets_; }
  const Target& operator[](std::size_t i) const { return sets_[i]; }

 private:
  std::vector<Target> sets_;
  int dim_ = 0;
};

/// Which set the next step projects onto.
struct SelectionPolicy {
  enum class Kind { Cyclic, RandomUniform, Farthest, Scripted };
  Kind kind = Kind::Cyclic;
  std::uint64_t seed = 0;
  /// Scripted picks, repeated cyclically when the run is longer.
  std::vector<std::size_t> script;

  static SelectionPolicy cyclic() { return {}; }
  static SelectionPolicy random_uniform(std::uint64_t seed) { return {Kind::RandomUniform, seed, {}}; }
  /// Picks the set maximizing ||x - P_S x|| (lowest index on ties).
  static SelectionPolicy farthest() { return {Kind::Farthest, 0, {}}; }
  static SelectionPolicy scripted(std::vector<std::size_t> picks) { return {Kind::Scripted, 0, std::move(picks)}; }
};

/// Where each step's lambda comes from.
class RelaxationSchedule {
 public:
  enum class Kind { Constant, Sequence, Formula, RandomIn };

  static RelaxationSchedule constant(double lambda);
  /// Explicit values, repeated cyclically when the run is longer.
  static RelaxationSchedule sequence(std::vector<double> values);
  static RelaxationSchedule formula(LambdaSchedule schedule);
  /// Uniform draws from [0, lambda_max].
  static RelaxationSchedule random_in(double lambda_max, std::uint64_t seed);

  Kind kind() const { return kind_; }
  double lambda_max() const { return lambda_max_; }
  std::uint64_t seed() const { return seed_; }
  std::string describe() const;

  /// lambda for step n. Only RandomIn consumes `rng`.
  double at(std::size_t n, std::mt19937_64& rng) const;

 private:
  RelaxationSchedule() = default;

  Kind kind_ = Kind::Constant;
  double lambda_max_ = 1.0;
  std::vector<double> values_;
  std::optional<LambdaSchedule> formula_;
  std::uint64_t seed_ = 0;
};

struct Pick {
  std::size_t set = 0;
  double lambda = 0.0;
};

/// x_0..x_N with per-step picks. picks[n] produced iterates[n + 1].
struct Trajectory {
  std::vector<Vector> iterates;
  std::vector<double> norms;
  std::vector<Pick> picks;
  /// running_max[n] = max_{k <= n} norms[k].
  std::vector<double> running_max;
  bool norms_nonincreasing = true;
  std::string rng_algorithm{kRngAlgorithm};

  std::size_t steps() const { return picks.size(); }
};

/// x_{n+1} = (1 - lambda_n) x_n + lambda_n P_{S_n} x_n. Identical inputs give
/// bit-identical trajectories.
Trajectory run(const Collection& c, const SelectionPolicy& policy, const RelaxationSchedule& sched,
               const Vector& x0, std::size_t n_steps, const Tolerances& tol = {});

enum class Verdict { Stable, Growing };
std::string_view to_string(Verdict v);

/// Thresholds of the growth heuristic.
inline constexpr double kGrowthFactor = 10.0;
inline constexpr double kGrowthSlope = 1e-3;
inline constexpr double kSlowGrowthRatio = 0.75;

struct BoundednessReport {
  double sup_norm = 0.0;
  double sup_first_window = 0.0;
  double sup_trailing_window = 0.0;
  /// Least-squares slope of log(norm) per step over the trailing half.
  double trailing_log_slope = 0.0;
  /// Gains of the running maximum over [N/4, N/2] and [N/2, N].
  double gain_previous_half = 0.0;
  double gain_last_half = 0.0;
  Verdict verdict = Verdict::Stable;
};

/// GROWING when either
///  - the trailing-window max is at least kGrowthFactor times the first-window
///    max and the trailing log-norm slope exceeds kGrowthSlope (fast growth), or
///  - the running max keeps rising at an undiminished pace: it gained over
///    both [N/4, N/2] and [N/2, N], the later gain is at least kSlowGrowthRatio
///    times the earlier one, and a new maximum was set in the last 10% of the run
///    (logarithmic growth, which the first test cannot see at desk scale).
BoundednessReport boundedness_report(const Trajectory& t, std::size_t window);

struct FejerReport {
  Vector reference;
  std::size_t violations = 0;
  /// Largest one-step increase of ||x_n - z|| (negative when strictly decreasing).
  double worst_increase = 0.0;
};

/// Checks ||x_{n+1} - z|| <= ||x_n - z|| + tol.feas. Without `z`, a common point
/// of the (affine and polyhedral) sets is searched; throws NotApplicable when
/// none exists or the collection holds a set the search cannot handle.
FejerReport fejer_check(const Trajectory& t, const Collection& c, const std::optional<Vector>& z = std::nullopt,
                        const Tolerances& tol = {});

/// Alternating projections between the horizontal axis and epi(exp) from x0.
Trajectory divergence_experiment_line_epiexp(const Vector& x0, std::size_t n_steps);

/// Columns n, x_1..x_d, norm, set_index, lambda; row 0 has empty pick fields.
void write_trajectory_csv(std::ostream& os, const Trajectory& t);

}  // namespace polyproj
