#include "polyproj/scalar_reflect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "polyproj/csv.hpp"
#include "polyproj/errors.hpp"

namespace polyproj {

namespace {

constexpr const char* kModule = "scalar_reflect";

int sign(double v) { return (v > 0.0) - (v < 0.0); }

// Largest m with m (m + 1) <= n.
std::size_t block_of(std::size_t n) {
  auto m = static_cast<std::size_t>((std::sqrt(4.0 * static_cast<double>(n) + 1.0) - 1.0) / 2.0);
  while (truncated_block_start(m + 1) <= n) ++m;
  while (m > 0 && truncated_block_start(m) > n) --m;
  return m;
}

// Ulp-scale slack for comparisons that are equalities in exact arithmetic.
bool geq(double lhs, double rhs) {
  return lhs >= rhs - 8.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

}  // namespace

double geometric_eps(std::size_t n) { return std::ldexp(1.0, -static_cast<int>(n + 1)); }

double harmonic_eps(std::size_t n) { return 1.0 / static_cast<double>(n + 2); }

LambdaSchedule LambdaSchedule::explicit_values(std::vector<double> values) {
  auto shared = std::make_shared<const std::vector<double>>(std::move(values));
  const std::size_t len = shared->size();
  return LambdaSchedule(Kind::Explicit, "explicit",
                        [shared](std::size_t n) {
                          if (n >= shared->size()) {
                            throw InvalidArgument(kModule, "explicit schedule has no entry " + std::to_string(n));
                          }
                          return (*shared)[n];
                        },
                        len);
}

LambdaSchedule LambdaSchedule::two_minus(Sequence eps, std::string label) {
  return LambdaSchedule(Kind::TwoMinus, "two_minus(" + label + ")",
                        [eps = std::move(eps)](std::size_t n) { return 2.0 - eps(n); }, std::nullopt);
}

LambdaSchedule LambdaSchedule::harmonic() {
  return LambdaSchedule(Kind::Harmonic, "harmonic",
                        [](std::size_t n) {
                          const auto k = static_cast<double>(n);
                          return (2.0 * k + 3.0) / (k + 2.0);
                        },
                        std::nullopt);
}

LambdaSchedule LambdaSchedule::mixed(Sequence rho, std::string label) {
  return LambdaSchedule(Kind::Mixed, "mixed(" + label + ")",
                        [rho = std::move(rho)](std::size_t n) { return n % 2 == 0 ? 2.0 - rho(n / 2) : 1.0; },
                        std::nullopt);
}

LambdaSchedule LambdaSchedule::truncated(LambdaSchedule mu) {
  std::string label = "truncated(" + mu.label() + ")";
  const auto mu_len = mu.length();
  std::optional<std::size_t> len;
  if (mu_len) {
    // Block m needs mu_0..mu_{2m}; stop before the first block that cannot be built.
    std::size_t m = 0;
    while (2 * m < *mu_len) ++m;
    len = truncated_block_start(m);
  }
  return LambdaSchedule(Kind::Truncated, std::move(label),
                        [mu = std::move(mu)](std::size_t n) {
                          const std::size_t m = block_of(n);
                          const std::size_t j = n - truncated_block_start(m);
                          return j == 2 * m + 1 ? 1.0 : mu(j);
                        },
                        len);
}

double LambdaSchedule::operator()(std::size_t n) const {
  const double v = fn_(n);
  if (!(v >= 0.0 && v <= 2.0)) {
    throw InvalidArgument(kModule, label_ + " produced lambda_" + std::to_string(n) + " = " + std::to_string(v) +
                                       " outside [0, 2]");
  }
  return v;
}

std::string_view to_string(LambdaSchedule::Kind kind) {
  switch (kind) {
    case LambdaSchedule::Kind::Explicit: return "explicit";
    case LambdaSchedule::Kind::TwoMinus: return "two_minus";
    case LambdaSchedule::Kind::Harmonic: return "harmonic";
    case LambdaSchedule::Kind::Mixed: return "mixed";
    case LambdaSchedule::Kind::Truncated: return "truncated";
  }
  return "unknown";
}

LambdaSchedule build_truncated_schedule(const std::vector<double>& mu, std::size_t total_len) {
  for (double v : mu) {
    if (!(v >= 0.0 && v <= 2.0)) throw InvalidArgument(kModule, "mu value outside [0, 2]");
  }
  std::vector<double> out;
  out.reserve(total_len);
  for (std::size_t m = 0; out.size() < total_len; ++m) {
    for (std::size_t j = 0; j <= 2 * m && out.size() < total_len; ++j) {
      if (j >= mu.size()) {
        throw InvalidArgument(kModule, "mu list too short: block " + std::to_string(m) + " needs mu_" +
                                           std::to_string(j));
      }
      out.push_back(mu[j]);
    }
    if (out.size() < total_len) out.push_back(1.0);
  }
  return LambdaSchedule::explicit_values(std::move(out));
}

std::vector<double> iterate_scalar(const ScalarProblem& p, const LambdaSchedule& sched, std::size_t n_steps) {
  std::vector<double> x;
  x.reserve(n_steps + 1);
  x.push_back(p.x0);
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double lambda = sched(n);
    const double target = n % 2 == 0 ? p.a : p.b;
    // Same map as (1 - lambda) x + lambda t, written so that x = t and lambda = 1 are exact.
    x.push_back(target + (1.0 - lambda) * (x.back() - target));
  }
  return x;
}

double DerivedSequences::big_gamma(std::size_t k, std::ptrdiff_t n) const {
  if (n < 0 || static_cast<std::ptrdiff_t>(k) > n) return 1.0;
  if (static_cast<std::size_t>(n) >= gamma.size()) throw InvalidArgument(kModule, "Gamma index beyond derived range");
  double prod = 1.0;
  for (auto i = static_cast<std::ptrdiff_t>(k); i <= n; ++i) prod *= gamma[static_cast<std::size_t>(i)];
  return prod;
}

DerivedSequences derive(const ScalarProblem& p, const LambdaSchedule& sched, std::size_t pairs) {
  DerivedSequences s;
  s.gamma.reserve(pairs);
  s.delta.reserve(pairs);
  s.d.reserve(pairs);
  for (std::size_t n = 0; n < pairs; ++n) {
    const double even = sched(2 * n);
    const double odd = sched(2 * n + 1);
    const double g = (1.0 - even) * (1.0 - odd);
    s.gamma.push_back(g);
    s.delta.push_back(1.0 - g);
    s.d.push_back((1.0 - odd) * even * p.a + odd * p.b);
  }
  return s;
}

double closed_form_even(const ScalarProblem& p, const LambdaSchedule& sched, std::size_t n) {
  const DerivedSequences s = derive(p, sched, n);
  // suffix = Gamma_{k+1,n-1}, built from the right.
  double suffix = 1.0;
  double sum = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    sum += s.d[k] * suffix;
    suffix *= s.gamma[k];
  }
  return suffix * p.x0 + sum;
}

std::vector<double> closed_form_even_all(const ScalarProblem& p, const LambdaSchedule& sched, std::size_t n) {
  const DerivedSequences s = derive(p, sched, n);
  std::vector<double> y(n + 1);
  for (std::size_t m = 0; m <= n; ++m) {
    double suffix = 1.0;
    double sum = 0.0;
    for (std::size_t k = m; k-- > 0;) {
      sum += s.d[k] * suffix;
      suffix *= s.gamma[k];
    }
    y[m] = suffix * p.x0 + sum;
  }
  return y;
}

SummabilityReport summability_relation(const std::vector<double>& eps) {
  for (std::size_t n = 0; n < eps.size(); ++n) {
    if (!(eps[n] >= 0.0 && eps[n] < 1.0)) {
      throw EpsOutOfRange(kModule, "eps_" + std::to_string(n) + " = " + std::to_string(eps[n]) + " not in [0, 1)");
    }
  }
  SummabilityReport r;
  double sum_sq = 0.0;
  for (std::size_t pair = 0; 2 * pair < eps.size(); ++pair) {
    const double e0 = eps[2 * pair];
    const double e1 = 2 * pair + 1 < eps.size() ? eps[2 * pair + 1] : 0.0;
    const double s = e0 + e1;
    const double delta = s - e0 * e1;
    const double lower = s - 0.5 * (e0 * e0 + e1 * e1);
    const bool ok = geq(s, delta) && geq(delta, lower) && geq(lower, 0.5 * s);
    if (!ok && r.chain_holds) {
      r.chain_holds = false;
      r.first_violation = pair;
    }
    r.sum_eps += s;
    r.sum_delta += delta;
    sum_sq += e0 * e0 + e1 * e1;
  }
  r.sum_eps_minus_half_sq = r.sum_eps - 0.5 * sum_sq;
  r.half_sum_eps = 0.5 * r.sum_eps;
  if (!(geq(r.sum_eps, r.sum_delta) && geq(r.sum_delta, r.sum_eps_minus_half_sq) &&
        geq(r.sum_eps_minus_half_sq, r.half_sum_eps))) {
    if (r.chain_holds) r.first_violation = eps.size() / 2;
    r.chain_holds = false;
  }
  return r;
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Convergent: return "CONVERGENT";
    case Regime::BoundedOscillating: return "BOUNDED_OSCILLATING";
    case Regime::UnboundedWithBoundedSubsequence: return "UNBOUNDED_WITH_BOUNDED_SUBSEQ";
    case Regime::DivergentToInfinity: return "DIVERGENT_TO_INFINITY";
  }
  return "UNKNOWN";
}

RegimeReport regime_classify(const ScalarProblem& p, const LambdaSchedule& sched, std::size_t n_steps) {
  if (n_steps < 1000) throw InvalidArgument(kModule, "regime classification needs at least 1000 steps");
  const std::vector<double> x = iterate_scalar(p, sched, n_steps);
  const std::size_t window = x.size() / 10;

  RegimeReport r;
  r.leading_max = 1.0;
  for (std::size_t n = 0; n < window; ++n) r.leading_max = std::max(r.leading_max, std::abs(x[n]));
  r.trailing_min = std::numeric_limits<double>::infinity();
  for (std::size_t n = x.size() - window; n < x.size(); ++n) {
    r.trailing_min = std::min(r.trailing_min, std::abs(x[n]));
    r.trailing_max = std::max(r.trailing_max, std::abs(x[n]));
  }
  const std::size_t last_even = n_steps % 2 == 0 ? n_steps : n_steps - 1;
  const std::size_t last_odd = n_steps % 2 == 1 ? n_steps : n_steps - 1;
  r.even_limit = x[last_even];
  r.odd_limit = x[last_odd];

  const double threshold = kRegimeGrowthFactor * r.leading_max;
  if (!std::isfinite(r.trailing_min) || r.trailing_min >= threshold) {
    r.regime = Regime::DivergentToInfinity;
  } else if (!std::isfinite(r.trailing_max) || r.trailing_max >= threshold) {
    r.regime = Regime::UnboundedWithBoundedSubsequence;
  } else {
    const double settle = std::max(std::abs(x[last_even] - x[last_even - 2]), std::abs(x[last_odd] - x[last_odd - 2]));
    const bool split = std::abs(r.even_limit - r.odd_limit) > 1e-6;
    r.regime = (split || settle > 1e-6) ? Regime::BoundedOscillating : Regime::Convergent;
  }
  return r;
}

HarmonicLimitReport harmonic_limit_check(const ScalarProblem& p, std::size_t n) {
  if (p.a == p.b) throw InvalidArgument(kModule, "harmonic limit check needs a != b");
  if (n < 4) throw InvalidArgument(kModule, "harmonic limit check needs n >= 4");
  const LambdaSchedule sched = LambdaSchedule::harmonic();
  const std::vector<double> x = iterate_scalar(p, sched, 2 * n);

  HarmonicLimitReport r;
  r.n = n;
  r.y_recursion = x[2 * n];
  r.y_closed_form = closed_form_even(p, sched, n);
  r.relative_difference = std::abs(r.y_closed_form - r.y_recursion) / std::max(1.0, std::abs(r.y_recursion));
  const double y_half = x[2 * (n / 2)];
  const double y_quarter = x[2 * (n / 4)];
  r.sign_matches = sign(r.y_recursion - y_half) == sign(p.b - p.a);
  r.magnitude_growing = std::abs(y_quarter) < std::abs(y_half) && std::abs(y_half) < std::abs(r.y_recursion);
  return r;
}

void write_scalar_csv(std::ostream& os, const ScalarProblem& p, const LambdaSchedule& sched, std::size_t n_steps) {
  const std::vector<double> x = iterate_scalar(p, sched, n_steps);
  std::size_t pairs = n_steps / 2 + 1;
  if (sched.length()) pairs = std::min(pairs, *sched.length() / 2);
  const DerivedSequences s = derive(p, sched, pairs);
  os << "n,lambda_n,x_n,y,gamma,delta,d,Gamma_0n\n";
  double big_gamma = 1.0;
  for (std::size_t n = 0; n <= n_steps; ++n) {
    os << n << ',' << format_double(sched(n)) << ',' << format_double(x[n]);
    if (n % 2 == 0 && n / 2 < pairs) {
      const std::size_t m = n / 2;
      big_gamma *= s.gamma[m];
      os << ',' << format_double(x[n]) << ',' << format_double(s.gamma[m]) << ',' << format_double(s.delta[m]) << ','
         << format_double(s.d[m]) << ',' << format_double(big_gamma);
    } else {
      os << ",,,,,";
    }
    os << '\n';
  }
}

}  // namespace polyproj
