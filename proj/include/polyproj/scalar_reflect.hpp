#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace polyproj {

/// Index-to-value map n -> s_n.
using Sequence = std::function<double(std::size_t)>;

/// eps_n = 2^-(n+1).
double geometric_eps(std::size_t n);
/// eps_n = 1 / (n + 2).
double harmonic_eps(std::size_t n);

/// Relaxation parameters (lambda_n) in [0, 2] for the two-point recursion.
class LambdaSchedule {
 public:
  enum class Kind { Explicit, TwoMinus, Harmonic, Mixed, Truncated };

  /// Finite list; indexing past the end throws.
  static LambdaSchedule explicit_values(std::vector<double> values);
  /// lambda_n = 2 - eps_n.
  static LambdaSchedule two_minus(Sequence eps, std::string label);
  /// lambda_n = (2n + 3) / (n + 2).
  static LambdaSchedule harmonic();
  /// lambda_{2n} = 2 - rho_n, lambda_{2n+1} = 1.
  static LambdaSchedule mixed(Sequence rho, std::string label);
  /// Blocks mu_0..mu_{2m} followed by a single 1, for m = 0, 1, 2, ...;
  /// mu is evaluated lazily so the schedule has no length limit.
  static LambdaSchedule truncated(LambdaSchedule mu);

  Kind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  std::optional<std::size_t> length() const { return length_; }

  /// lambda_n; throws InvalidArgument when the value falls outside [0, 2].
  double operator()(std::size_t n) const;

 private:
  LambdaSchedule(Kind kind, std::string label, Sequence fn, std::optional<std::size_t> length)
      : kind_(kind), label_(std::move(label)), fn_(std::move(fn)), length_(length) {}

  Kind kind_;
  std::string label_;
  Sequence fn_;
  std::optional<std::size_t> length_;
};

std::string_view to_string(LambdaSchedule::Kind kind);

/// Materializes the truncated-and-reset schedule from an explicit mu list.
/// Throws InvalidArgument when `mu` is too short for `total_len` entries.
LambdaSchedule build_truncated_schedule(const std::vector<double>& mu, std::size_t total_len);

/// First index of block m in the truncated schedule: m (m + 1).
inline std::size_t truncated_block_start(std::size_t m) { return m * (m + 1); }

/// x0 on the line, alternately relaxed toward the points a (even steps) and b (odd steps).
struct ScalarProblem {
  double a = 0.0;
  double b = 1.0;
  double x0 = 0.0;
};

/// x_0..x_{n_steps} from x_{n+1} = (1 - lambda_n) x_n + lambda_n t_n with
/// t_n = a for even n and b for odd n.
std::vector<double> iterate_scalar(const ScalarProblem& p, const LambdaSchedule& sched, std::size_t n_steps);

/// Per-pair quantities of the even subsequence y_n = x_{2n}.
struct DerivedSequences {
  std::vector<double> gamma;  ///< (1 - lambda_{2n}) (1 - lambda_{2n+1})
  std::vector<double> delta;  ///< 1 - gamma_n
  std::vector<double> d;      ///< (1 - lambda_{2n+1}) lambda_{2n} a + lambda_{2n+1} b

  /// gamma_k ... gamma_n for k <= n, and 1 for k > n.
  double big_gamma(std::size_t k, std::ptrdiff_t n) const;
};

DerivedSequences derive(const ScalarProblem& p, const LambdaSchedule& sched, std::size_t pairs);

/// y_n = Gamma_{0,n-1} y_0 + sum_{k<n} d_k Gamma_{k+1,n-1}, summed term by term.
double closed_form_even(const ScalarProblem& p, const LambdaSchedule& sched, std::size_t n);

/// All even terms y_0..y_n from the closed form, O(n^2) but independent of the recursion order.
std::vector<double> closed_form_even_all(const ScalarProblem& p, const LambdaSchedule& sched, std::size_t n);

struct SummabilityReport {
  double sum_eps = 0.0;             ///< sum eps_n
  double sum_delta = 0.0;           ///< sum over pairs of eps_{2n} + eps_{2n+1} - eps_{2n} eps_{2n+1}
  double sum_eps_minus_half_sq = 0.0;  ///< sum eps_n - (1/2) sum eps_n^2
  double half_sum_eps = 0.0;        ///< (1/2) sum eps_n
  bool chain_holds = true;          ///< all four inequalities, pair by pair and for the totals
  std::size_t first_violation = 0;  ///< pair index of the first failing pair, if any
};

/// Checks sum eps >= sum delta >= sum eps - (1/2) sum eps^2 >= (1/2) sum eps on
/// a finite list. An odd-length list pairs its last entry with 0. Throws
/// EpsOutOfRange unless every eps_n is in [0, 1).
SummabilityReport summability_relation(const std::vector<double>& eps);

enum class Regime { Convergent, BoundedOscillating, UnboundedWithBoundedSubsequence, DivergentToInfinity };

std::string_view to_string(Regime r);

struct RegimeReport {
  Regime regime = Regime::Convergent;
  double leading_max = 0.0;   ///< max(1, max |x| over the first 10%)
  double trailing_min = 0.0;  ///< min |x| over the last 10%
  double trailing_max = 0.0;  ///< max |x| over the last 10%
  double even_limit = 0.0;    ///< last even term
  double odd_limit = 0.0;     ///< last odd term
};

/// Growth factor separating divergent from bounded runs in regime_classify.
inline constexpr double kRegimeGrowthFactor = 2.0;

/// Finite-horizon surrogate for the four asymptotic behaviours:
/// DIVERGENT when the trailing-window minimum of |x| exceeds kRegimeGrowthFactor
/// times the leading-window scale; UNBOUNDED_WITH_BOUNDED_SUBSEQ when only the
/// trailing maximum does; otherwise BOUNDED_OSCILLATING if the last even and
/// odd terms differ (or have not settled) by more than 1e-6, else CONVERGENT.
/// Requires n_steps >= 1000.
RegimeReport regime_classify(const ScalarProblem& p, const LambdaSchedule& sched, std::size_t n_steps);

struct HarmonicLimitReport {
  std::size_t n = 0;
  double y_recursion = 0.0;
  double y_closed_form = 0.0;
  double relative_difference = 0.0;
  bool sign_matches = false;      ///< sign(y_n - y_{n/2}) == sign(b - a)
  bool magnitude_growing = false;  ///< |y_{n/4}| < |y_{n/2}| < |y_n|
};

/// Runs the harmonic schedule lambda_n = (2n+3)/(n+2) both ways. Requires a != b and n >= 4.
HarmonicLimitReport harmonic_limit_check(const ScalarProblem& p, std::size_t n);

/// CSV with columns n, lambda_n, x_n, y, gamma, delta, d, Gamma_0n; the last
/// five are filled on even rows only (y = x_n, the rest indexed by n/2).
void write_scalar_csv(std::ostream& os, const ScalarProblem& p, const LambdaSchedule& sched, std::size_t n_steps);

}  // namespace polyproj
