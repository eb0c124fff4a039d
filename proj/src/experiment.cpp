#include "polyproj/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "polyproj/corpus.hpp"
#include "polyproj/csv.hpp"
#include "polyproj/decomposition.hpp"
#include "polyproj/errors.hpp"
#include "polyproj/faces.hpp"
#include "polyproj/rng.hpp"

namespace polyproj {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kModule = "cli";

[[noreturn]] void invalid(const std::string& what) { throw ConfigInvalid(kModule, what); }

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) invalid(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

double number(const json& j, const char* what) {
  if (!j.is_number()) invalid(std::string("\"") + what + "\" must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) invalid(std::string("\"") + what + "\" must be finite");
  return v;
}

double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? number(j.at(key), key) : fallback;
}

std::size_t count(const json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 0) invalid(std::string("\"") + what + "\" must be a nonnegative integer");
  return j.get<std::size_t>();
}

std::size_t count_or(const json& j, const char* key, std::size_t fallback) {
  return j.contains(key) ? count(j.at(key), key) : fallback;
}

bool flag_or(const json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) invalid(std::string("\"") + key + "\" must be true or false");
  return j.at(key).get<bool>();
}

std::string text(const json& j, const char* what) {
  if (!j.is_string()) invalid(std::string("\"") + what + "\" must be a string");
  return j.get<std::string>();
}

Vector vector_of(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) invalid(std::string("\"") + what + "\" must be a nonempty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], what);
  return v;
}

double lambda_value(const json& j, const char* what) {
  const double v = number(j, what);
  if (v < 0.0 || v > 2.0) invalid(std::string("\"") + what + "\" = " + format_double(v) + " lies outside [0, 2]");
  return v;
}

Sequence named_sequence(const json& j, const char* what) {
  const std::string name = text(j, what);
  if (name == "geometric") return geometric_eps;
  if (name == "harmonic") return harmonic_eps;
  invalid(std::string("\"") + what + "\" must be \"geometric\" or \"harmonic\"");
}

std::string sequence_label(const std::string& name) { return name == "geometric" ? "2^-(n+1)" : "1/(n+2)"; }

Target parse_set(const json& s, int dim) {
  const std::string type = text(require(s, "type"), "type");
  if (type == "epiexp") {
    if (dim != 2) invalid("epi(exp) needs dim = 2");
    return EpiExp{};
  }
  if (type == "affine") {
    const Vector base = vector_of(require(s, "base"), "base");
    if (base.size() != dim) invalid("affine base has the wrong dimension");
    std::vector<Vector> dirs;
    if (s.contains("directions")) {
      for (const auto& d : s.at("directions")) {
        dirs.push_back(vector_of(d, "directions"));
        if (dirs.back().size() != dim) invalid("affine direction has the wrong dimension");
      }
    }
    return AffineSubspace(base, dirs);
  }
  if (type == "box") {
    const double lo = number(require(s, "lo"), "lo"), hi = number(require(s, "hi"), "hi");
    if (lo > hi) invalid("box needs lo <= hi");
    return corpus::box(dim, lo, hi);
  }
  if (type == "polyhedron") {
    const json& rows = require(s, "halfspaces");
    if (!rows.is_array()) invalid("\"halfspaces\" must be an array");
    std::vector<Halfspace> hs;
    for (const auto& r : rows) {
      const Vector a = vector_of(require(r, "normal"), "normal");
      if (a.size() != dim) invalid("halfspace normal has the wrong dimension");
      if (a.norm() == 0.0) invalid("halfspace normal is zero");
      hs.emplace_back(a, number(require(r, "offset"), "offset"));
    }
    return Polyhedron(dim, std::move(hs));
  }
  invalid("unknown set type \"" + type + "\"");
}

SelectionPolicy parse_policy(const json& j, std::optional<std::uint64_t> seed, std::size_t n_sets) {
  const json& spec = j.is_object() ? require(j, "kind") : j;
  const std::string kind = text(spec, "policy");
  if (kind == "cyclic") return SelectionPolicy::cyclic();
  if (kind == "farthest") return SelectionPolicy::farthest();
  if (kind == "random_uniform") {
    if (!seed) invalid("policy random_uniform needs a seed");
    return SelectionPolicy::random_uniform(*seed);
  }
  if (kind == "scripted") {
    std::vector<std::size_t> picks;
    for (const auto& p : require(j, "picks")) {
      picks.push_back(count(p, "picks"));
      if (picks.back() >= n_sets) invalid("scripted pick out of range");
    }
    if (picks.empty()) invalid("scripted policy without picks");
    return SelectionPolicy::scripted(std::move(picks));
  }
  invalid("unknown policy \"" + kind + "\"");
}

RelaxationSchedule parse_relaxation(const json& j, std::optional<std::uint64_t> seed) {
  const std::string kind = text(require(j, "kind"), "schedule kind");
  if (kind == "constant") return RelaxationSchedule::constant(lambda_value(require(j, "lambda"), "lambda"));
  if (kind == "sequence") {
    std::vector<double> values;
    for (const auto& v : require(j, "values")) values.push_back(lambda_value(v, "values"));
    if (values.empty()) invalid("empty relaxation sequence");
    return RelaxationSchedule::sequence(std::move(values));
  }
  if (kind == "random_in") {
    const double lmax = lambda_value(require(j, "lambda_max"), "lambda_max");
    if (!seed) invalid("schedule random_in needs a seed");
    return RelaxationSchedule::random_in(lmax, *seed);
  }
  if (kind == "formula") return RelaxationSchedule::formula(schedule_from_json(require(j, "schedule")));
  invalid("unknown relaxation schedule \"" + kind + "\"");
}

// Optional seed: CLI override first, then the document.
std::optional<std::uint64_t> seed_of(const json& doc, const RunOptions& opt) {
  if (opt.seed) return opt.seed;
  if (doc.contains("seed")) return static_cast<std::uint64_t>(count(doc.at("seed"), "seed"));
  return std::nullopt;
}

std::uint64_t require_seed(const json& doc, const RunOptions& opt, const std::string& why) {
  auto s = seed_of(doc, opt);
  if (!s) invalid("a seed is required: " + why);
  return *s;
}

std::size_t steps_of(const json& j, const RunOptions& opt, std::size_t fallback) {
  return opt.steps ? *opt.steps : count_or(j, "steps", fallback);
}

Tolerances tolerances_of(const json& doc, const RunOptions& opt) {
  std::map<std::string, double> all;
  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    if (!t.is_object()) invalid("\"tolerances\" must be an object");
    for (const auto& [k, v] : t.items()) all[k] = number(v, "tolerances");
  }
  for (const auto& [k, v] : opt.tol) all[k] = v;
  return apply_tolerance_overrides(Tolerances{}, all);
}

json tolerances_json(const Tolerances& t) {
  return {{"orth", t.orth}, {"feas", t.feas}, {"rank", t.rank}, {"act", t.act}, {"dual", t.dual}};
}

// Thresholds print short; measured values keep all 17 digits.
std::string short_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_dat(const fs::path& path, const std::string& x_name, const std::string& y_name,
               const std::vector<double>& xs, const std::vector<double>& ys) {
  std::ofstream os(path);
  os << "# " << x_name << ' ' << y_name << '\n';
  for (std::size_t i = 0; i < xs.size(); ++i) os << format_double(xs[i]) << ' ' << format_double(ys[i]) << '\n';
}

std::vector<double> iota_doubles(std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(i);
  return out;
}

// Check against an upper bound from the expect block.
void expect_at_most(const json& expect, const char* key, double measured, std::vector<Check>& checks) {
  if (!expect.contains(key)) return;
  const double bound = number(expect.at(key), key);
  checks.push_back({key, measured <= bound, "measured " + format_double(measured) + " <= " + short_double(bound)});
}

void expect_equal(const json& expect, const char* key, const std::string& measured, std::vector<Check>& checks) {
  if (!expect.contains(key)) return;
  const std::string want = text(expect.at(key), key);
  checks.push_back({key, measured == want, "measured " + measured + ", expected " + want});
}

void expect_true(const json& expect, const char* key, bool measured, std::vector<Check>& checks) {
  if (!expect.contains(key)) return;
  const bool want = flag_or(expect, key, true);
  checks.push_back({key, measured == want, std::string("measured ") + (measured ? "true" : "false")});
}

struct Context {
  const ExperimentConfig& cfg;
  const RunOptions& opt;
  Tolerances tol;
  fs::path dir;
  json results = json::object();
  std::vector<Check> checks;
  json expect = json::object();
};

// ---------------------------------------------------------------- orbit

void run_orbit(Context& ctx) {
  const json& doc = ctx.cfg.doc;
  const std::size_t steps = steps_of(doc, ctx.opt, 1000);
  const std::size_t runs = count_or(doc, "runs", 1);
  if (runs == 0) invalid("\"runs\" must be at least 1");
  const std::size_t window = count_or(doc, "window", std::max<std::size_t>(1, steps / 10));
  if (window == 0) invalid("\"window\" must be at least 1");

  const bool random_sets = doc.contains("random_sets");
  if (random_sets == doc.contains("sets")) invalid("orbit needs exactly one of \"sets\" and \"random_sets\"");

  // Policies cycle over runs when given as a list.
  std::vector<json> policies;
  const json& pol = require(doc, "policy");
  if (pol.is_array()) {
    for (const auto& p : pol) policies.push_back(p);
    if (policies.empty()) invalid("empty policy list");
  } else {
    policies.push_back(pol);
  }
  const json& sched_doc = require(doc, "schedule");

  bool randomized = random_sets || runs > 1;
  for (const auto& p : policies) {
    const std::string kind = p.is_object() ? text(require(p, "kind"), "policy") : text(p, "policy");
    randomized = randomized || kind == "random_uniform";
  }
  randomized = randomized || text(require(sched_doc, "kind"), "schedule kind") == "random_in";
  std::optional<std::uint64_t> seed = seed_of(doc, ctx.opt);
  if (randomized && !seed) invalid("a seed is required for randomized policies, schedules or collections");

  StressRunSpec spec;
  int fixed_dim = 0;
  std::vector<Target> fixed_sets;
  Vector fixed_x0;
  if (random_sets) {
    const json& r = doc.at("random_sets");
    spec.max_sets = count_or(r, "max_sets", spec.max_sets);
    spec.min_dim = static_cast<int>(count_or(r, "min_dim", static_cast<std::size_t>(spec.min_dim)));
    spec.max_dim = static_cast<int>(count_or(r, "max_dim", static_cast<std::size_t>(spec.max_dim)));
    spec.max_constraints = static_cast<int>(count_or(r, "max_constraints", static_cast<std::size_t>(spec.max_constraints)));
    spec.x0_radius = number_or(r, "x0_radius", spec.x0_radius);
    if (spec.max_sets == 0 || spec.min_dim < 1 || spec.min_dim > spec.max_dim || spec.max_constraints < 1) {
      invalid("inconsistent \"random_sets\" bounds");
    }
  } else {
    fixed_dim = static_cast<int>(count(require(doc, "dim"), "dim"));
    if (fixed_dim < 1) invalid("\"dim\" must be positive");
    const json& sets = doc.at("sets");
    if (!sets.is_array() || sets.empty()) invalid("\"sets\" must be a nonempty array");
    for (const auto& s : sets) fixed_sets.push_back(parse_set(s, fixed_dim));
    fixed_x0 = vector_of(require(doc, "x0"), "x0");
    if (fixed_x0.size() != fixed_dim) invalid("\"x0\" has the wrong dimension");
  }

  std::optional<Vector> fejer_z;
  bool fejer = false;
  if (doc.contains("fejer")) {
    const json& f = doc.at("fejer");
    if (f.is_boolean()) {
      fejer = f.get<bool>();
    } else {
      fejer = true;
      fejer_z = vector_of(require(f, "z"), "z");
    }
  }

  // Each run draws its own seeds from one master stream.
  std::mt19937_64 master(seed.value_or(0));
  json run_rows = json::array();
  std::vector<double> sups;
  std::size_t growing = 0;
  std::size_t fejer_violations = 0;
  std::ofstream runs_csv;
  if (runs > 1) {
    runs_csv.open(ctx.dir / "runs.csv");
    runs_csv << "run,dim,sets,policy,sup_norm,verdict\n";
  }
  for (std::size_t r = 0; r < runs; ++r) {
    const std::uint64_t run_seed = master();
    const std::uint64_t policy_seed = master();
    const std::uint64_t schedule_seed = master();
    std::vector<Target> sets = fixed_sets;
    int dim = fixed_dim;
    Vector x0 = fixed_x0;
    if (random_sets) {
      std::mt19937_64 rng(run_seed);
      sets = random_collection(rng, spec, dim);
      x0 = corpus::random_point(rng, dim, spec.x0_radius);
    }
    const json& pdoc = policies[r % policies.size()];
    const SelectionPolicy policy = parse_policy(pdoc, runs > 1 ? policy_seed : seed.value_or(0), sets.size());
    const RelaxationSchedule sched = parse_relaxation(sched_doc, runs > 1 ? schedule_seed : seed.value_or(0));
    const Collection c(std::move(sets), ctx.tol);
    const Trajectory t = run(c, policy, sched, x0, steps, ctx.tol);
    const BoundednessReport b = boundedness_report(t, window);
    sups.push_back(b.sup_norm);
    if (b.verdict == Verdict::Growing) ++growing;

    const std::string policy_name = pdoc.is_object() ? pdoc.at("kind").get<std::string>() : pdoc.get<std::string>();
    if (r == 0) {
      std::ofstream csv(ctx.dir / "trajectory.csv");
      write_trajectory_csv(csv, t);
      write_dat(ctx.dir / "norm.dat", "n", "norm", iota_doubles(t.norms.size()), t.norms);
      write_dat(ctx.dir / "running_max.dat", "n", "running_max", iota_doubles(t.running_max.size()), t.running_max);
      ctx.results["schedule"] = sched.describe();
      ctx.results["sup_norm"] = b.sup_norm;
      ctx.results["sup_first_window"] = b.sup_first_window;
      ctx.results["sup_trailing_window"] = b.sup_trailing_window;
      ctx.results["trailing_log_slope"] = b.trailing_log_slope;
      ctx.results["verdict"] = std::string(to_string(b.verdict));
    }
    if (fejer) {
      const FejerReport f = fejer_check(t, c, fejer_z, ctx.tol);
      fejer_violations += f.violations;
      if (r == 0) ctx.results["fejer_worst_increase"] = f.worst_increase;
    }
    if (runs > 1) {
      runs_csv << r << ',' << c.ambient_dim() << ',' << c.size() << ',' << policy_name << ','
               << format_double(b.sup_norm) << ',' << to_string(b.verdict) << '\n';
      run_rows.push_back({{"run", r}, {"dim", c.ambient_dim()}, {"sets", c.size()}, {"policy", policy_name},
                          {"sup_norm", b.sup_norm}, {"verdict", std::string(to_string(b.verdict))}});
    }
  }
  ctx.results["steps"] = steps;
  ctx.results["runs"] = runs;
  ctx.results["growing_runs"] = growing;
  if (fejer) ctx.results["fejer_violations"] = fejer_violations;
  if (runs > 1) {
    ctx.results["run_table"] = run_rows;
    write_dat(ctx.dir / "sup_norm.dat", "run", "sup_norm", iota_doubles(sups.size()), sups);
  }

  // Every run must match an expected verdict.
  if (ctx.expect.contains("verdict")) {
    const std::string want = text(ctx.expect.at("verdict"), "verdict");
    const std::size_t matching = want == "GROWING" ? growing : runs - growing;
    ctx.checks.push_back({"verdict", matching == runs,
                          std::to_string(matching) + " of " + std::to_string(runs) + " runs " + want});
  }
  if (ctx.expect.contains("fejer_violations")) {
    expect_at_most(ctx.expect, "fejer_violations", static_cast<double>(fejer_violations), ctx.checks);
  }
}

// ---------------------------------------------------------------- divergence

void run_divergence(Context& ctx) {
  const json& doc = ctx.cfg.doc;
  const std::size_t steps = steps_of(doc, ctx.opt, 500);
  const Vector x0 = doc.contains("x0") ? vector_of(doc.at("x0"), "x0") : Vector::Zero(2);
  if (x0.size() != 2) invalid("\"x0\" must have two entries");
  const std::size_t window = count_or(doc, "window", std::max<std::size_t>(1, steps / 10));
  if (window == 0) invalid("\"window\" must be at least 1");
  const std::size_t burn_in = count_or(doc, "burn_in", 10);

  const Trajectory t = divergence_experiment_line_epiexp(x0, steps);
  const BoundednessReport b = boundedness_report(t, window);

  // The line step keeps the first coordinate, so strictness is per pair of steps.
  bool nonincreasing = true;
  bool strict_pairs = true;
  bool strict_steps = true;
  for (std::size_t n = burn_in + 1; n <= steps; ++n) {
    nonincreasing = nonincreasing && t.iterates[n](0) <= t.iterates[n - 1](0);
    strict_steps = strict_steps && t.iterates[n](0) < t.iterates[n - 1](0);
    if (n >= burn_in + 2) strict_pairs = strict_pairs && t.iterates[n](0) < t.iterates[n - 2](0);
  }

  std::ofstream csv(ctx.dir / "trajectory.csv");
  write_trajectory_csv(csv, t);
  std::vector<double> x1;
  for (const auto& x : t.iterates) x1.push_back(x(0));
  write_dat(ctx.dir / "norm.dat", "n", "norm", iota_doubles(t.norms.size()), t.norms);
  write_dat(ctx.dir / "x1.dat", "n", "x_1", iota_doubles(x1.size()), x1);

  ctx.results["steps"] = steps;
  ctx.results["sup_norm"] = b.sup_norm;
  ctx.results["final_norm"] = t.norms.back();
  ctx.results["final_x1"] = x1.back();
  ctx.results["trailing_log_slope"] = b.trailing_log_slope;
  ctx.results["verdict"] = std::string(to_string(b.verdict));
  ctx.results["x1_nonincreasing_after_burn_in"] = nonincreasing;
  ctx.results["x1_strict_every_pair_after_burn_in"] = strict_pairs;
  ctx.results["x1_strict_every_step_after_burn_in"] = strict_steps;

  expect_equal(ctx.expect, "verdict", std::string(to_string(b.verdict)), ctx.checks);
  expect_true(ctx.expect, "x1_decreasing", nonincreasing && strict_pairs, ctx.checks);
  if (ctx.expect.contains("norm_ratio")) {
    const json& e = ctx.expect.at("norm_ratio");
    const std::size_t from = count(require(e, "from"), "from"), to = count(require(e, "to"), "to");
    const double min_ratio = number(require(e, "min"), "min");
    if (from > steps || to > steps || from == 0) invalid("norm_ratio indices outside the run");
    const double ratio = t.norms[to] / t.norms[from];
    ctx.results["norm_ratio"] = ratio;
    ctx.checks.push_back({"norm_ratio", ratio >= min_ratio,
                          "||x_" + std::to_string(to) + "|| / ||x_" + std::to_string(from) + "|| = " +
                              format_double(ratio) + " >= " + short_double(min_ratio)});
  }
}

// ---------------------------------------------------------------- scalar

void run_scalar(Context& ctx) {
  const json& doc = ctx.cfg.doc;
  const json& pj = require(doc, "problem");
  const ScalarProblem p{number(require(pj, "a"), "a"), number(require(pj, "b"), "b"), number_or(pj, "x0", 0.0)};
  const json& sj = require(doc, "schedule");
  const LambdaSchedule sched = schedule_from_json(sj);
  std::size_t steps = steps_of(doc, ctx.opt, 2000);
  if (sched.length() && steps > *sched.length()) invalid("explicit schedule shorter than \"steps\"");

  const std::vector<double> x = iterate_scalar(p, sched, steps);
  std::size_t pairs = steps / 2;
  if (sched.length()) pairs = std::min(pairs, *sched.length() / 2);

  std::ofstream csv(ctx.dir / "trajectory.csv");
  write_scalar_csv(csv, p, sched, steps);
  write_dat(ctx.dir / "x_n.dat", "n", "x_n", iota_doubles(x.size()), x);
  std::vector<double> ys, ns;
  for (std::size_t n = 0; 2 * n <= steps; ++n) {
    ns.push_back(static_cast<double>(n));
    ys.push_back(x[2 * n]);
  }
  write_dat(ctx.dir / "y_n.dat", "n", "y_n", ns, ys);

  ctx.results["schedule"] = sched.label();
  ctx.results["schedule_kind"] = std::string(to_string(sched.kind()));
  ctx.results["steps"] = steps;
  ctx.results["final_x"] = x.back();

  // Closed form against the recursion.
  const std::size_t cf_n = std::min<std::size_t>(pairs, 1000);
  const std::vector<double> y = closed_form_even_all(p, sched, cf_n);
  double cf_err = 0.0;
  for (std::size_t n = 0; n <= cf_n; ++n) cf_err = std::max(cf_err, std::abs(y[n] - x[2 * n]) / std::max(1.0, std::abs(x[2 * n])));
  ctx.results["closed_form_terms"] = cf_n;
  ctx.results["closed_form_rel_error"] = cf_err;
  expect_at_most(ctx.expect, "closed_form_rel_error", cf_err, ctx.checks);

  if (steps >= 1000) {
    const RegimeReport r = regime_classify(p, sched, steps);
    ctx.results["regime"] = std::string(to_string(r.regime));
    ctx.results["leading_max"] = r.leading_max;
    ctx.results["trailing_min"] = r.trailing_min;
    ctx.results["trailing_max"] = r.trailing_max;
    ctx.results["even_limit"] = r.even_limit;
    ctx.results["odd_limit"] = r.odd_limit;
    expect_equal(ctx.expect, "regime", std::string(to_string(r.regime)), ctx.checks);
  } else if (ctx.expect.contains("regime")) {
    invalid("regime expectations need at least 1000 steps");
  }

  if (ctx.expect.contains("even_positive_increasing") && pairs >= 4) {
    // sign(b - a) times y at n/4, n/2, n: positive and increasing.
    const double s = p.b > p.a ? 1.0 : -1.0;
    const double q1 = s * x[2 * (pairs / 4)], q2 = s * x[2 * (pairs / 2)], q3 = s * x[2 * pairs];
    expect_true(ctx.expect, "even_positive_increasing", q1 > 0.0 && q1 < q2 && q2 < q3, ctx.checks);
  }

  switch (sched.kind()) {
    case LambdaSchedule::Kind::TwoMinus: {
      std::vector<double> eps;
      const std::size_t terms = count_or(doc, "summability_terms", 1000);
      for (std::size_t n = 0; n < terms; ++n) eps.push_back(2.0 - sched(n));
      const SummabilityReport s = summability_relation(eps);
      ctx.results["sum_eps"] = s.sum_eps;
      ctx.results["sum_delta"] = s.sum_delta;
      ctx.results["sum_eps_minus_half_sq"] = s.sum_eps_minus_half_sq;
      ctx.results["half_sum_eps"] = s.half_sum_eps;
      ctx.results["summability_chain"] = s.chain_holds;
      expect_true(ctx.expect, "summability_chain", s.chain_holds, ctx.checks);
      break;
    }
    case LambdaSchedule::Kind::Harmonic: {
      const std::size_t n_max = std::min<std::size_t>(pairs, 1001);
      const DerivedSequences d = derive(p, sched, n_max);
      double worst = 0.0;
      for (std::size_t n = 0; n < n_max; ++n) {
        double prod = 1.0;
        for (std::size_t k = n + 1; k-- > 0;) {
          prod *= d.gamma[k];
          const double exact = (2.0 * static_cast<double>(k) + 1.0) / (2.0 * static_cast<double>(n) + 3.0);
          worst = std::max(worst, std::abs(prod - exact) / exact);
        }
      }
      ctx.results["telescoping_rel_error"] = worst;
      expect_at_most(ctx.expect, "telescoping_rel_error", worst, ctx.checks);
      if (p.a != p.b && pairs >= 4) {
        const HarmonicLimitReport h = harmonic_limit_check(p, pairs);
        ctx.results["harmonic_sign_matches"] = h.sign_matches;
        ctx.results["harmonic_magnitude_growing"] = h.magnitude_growing;
        ctx.results["harmonic_recursion_vs_closed_form"] = h.relative_difference;
        expect_true(ctx.expect, "harmonic_trend", h.sign_matches && h.magnitude_growing, ctx.checks);
      }
      break;
    }
    case LambdaSchedule::Kind::Mixed: {
      double even_err = 0.0;
      for (std::size_t n = 1; 2 * n <= steps; ++n) even_err = std::max(even_err, std::abs(x[2 * n] - p.b));
      const std::size_t odd_n = std::min<std::size_t>(count_or(doc, "odd_limit_n", 1000), (steps - 1) / 2);
      const double odd_err = std::abs(x[2 * odd_n + 1] - (2.0 * p.a - p.b));
      ctx.results["max_even_minus_b"] = even_err;
      ctx.results["odd_limit_index"] = 2 * odd_n + 1;
      ctx.results["odd_limit_error"] = odd_err;
      expect_true(ctx.expect, "even_terms_exact_b", even_err == 0.0, ctx.checks);
      expect_at_most(ctx.expect, "odd_limit_error", odd_err, ctx.checks);
      break;
    }
    case LambdaSchedule::Kind::Truncated: {
      // Exact resets x_{n(n+1)} = b, and the max |x| over each whole block.
      std::size_t resets = 0;
      bool exact = true;
      for (std::size_t n = 1; n * (n + 1) <= steps && n <= 40; ++n) {
        ++resets;
        exact = exact && x[n * (n + 1)] == p.b;
      }
      std::vector<double> ms, maxima;
      for (std::size_t m = 0; truncated_block_start(m + 1) <= steps; ++m) {
        double mx = 0.0;
        for (std::size_t n = truncated_block_start(m); n < truncated_block_start(m + 1); ++n) mx = std::max(mx, std::abs(x[n]));
        ms.push_back(static_cast<double>(m));
        maxima.push_back(mx);
      }
      write_dat(ctx.dir / "block_max.dat", "m", "max_abs_x", ms, maxima);
      ctx.results["resets_checked"] = resets;
      ctx.results["resets_exact"] = exact;
      ctx.results["block_maxima"] = maxima;
      expect_true(ctx.expect, "block_resets_exact", exact && resets > 0, ctx.checks);
      if (ctx.expect.contains("block_growth")) {
        const json& e = ctx.expect.at("block_growth");
        const std::size_t from = count(require(e, "from"), "from"), to = count(require(e, "to"), "to");
        const double min_ratio = number(require(e, "min"), "min");
        if (to >= maxima.size() || from >= maxima.size()) invalid("block_growth needs more steps");
        const double ratio = maxima[to] / maxima[from];
        ctx.results["block_growth_ratio"] = ratio;
        ctx.checks.push_back({"block_growth", ratio >= min_ratio,
                              "block max ratio m=" + std::to_string(from) + "->" + std::to_string(to) + " = " +
                                  format_double(ratio) + " >= " + short_double(min_ratio)});
      }
      break;
    }
    case LambdaSchedule::Kind::Explicit: break;
  }
}

// ---------------------------------------------------------------- faces_check

struct CorpusSpec {
  std::size_t count = 20;
  int max_dim = 6;
  int max_constraints = 10;
};

CorpusSpec parse_corpus(const json& doc) {
  CorpusSpec c;
  const json& j = require(doc, "corpus");
  c.count = count_or(j, "count", c.count);
  c.max_dim = static_cast<int>(count_or(j, "max_dim", static_cast<std::size_t>(c.max_dim)));
  c.max_constraints = static_cast<int>(count_or(j, "max_constraints", static_cast<std::size_t>(c.max_constraints)));
  if (c.count == 0 || c.max_dim < 2 || c.max_constraints < 1) invalid("inconsistent \"corpus\" bounds");
  return c;
}

void run_faces_check(Context& ctx) {
  const json& doc = ctx.cfg.doc;
  const std::uint64_t seed = require_seed(doc, ctx.opt, "faces_check samples a random corpus");
  const CorpusSpec cs = parse_corpus(doc);
  const std::size_t points = count_or(doc, "points_per_set", 100);
  const double radius = number_or(doc, "radius", 5.0);
  const std::size_t partition_samples = count_or(doc, "partition_samples", 30);

  const auto polys = corpus::standard_corpus(seed, cs.count, cs.max_dim, cs.max_constraints);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::ofstream csv(ctx.dir / "samples.csv");
  csv << "set,sample,dim,constraints,face_dim,discrepancy\n";
  std::vector<double> idx, disc;
  double worst = 0.0;
  std::size_t partition_violations = 0;
  std::size_t partition_skipped = 0;
  for (std::size_t s = 0; s < polys.size(); ++s) {
    const Polyhedron& c = polys[s];
    std::vector<Vector> in_c;
    for (std::size_t k = 0; k < points; ++k) {
      const Vector x = corpus::random_point(rng, c.ambient_dim(), radius);
      const FaceProjection fp = face_of_projection(c, x, ctx.tol);
      // Recomputed here rather than trusted from the projection result.
      const double d = (project_affine(fp.face.hull, x) - project_polyhedron(c, x, ctx.tol).point).norm();
      worst = std::max(worst, d);
      csv << s << ',' << k << ',' << c.ambient_dim() << ',' << c.size() << ',' << fp.face.dim() << ','
          << format_double(d) << '\n';
      idx.push_back(static_cast<double>(disc.size()));
      disc.push_back(d);
      // Under a feas looser than act the projection may sit just outside C,
      // where no face contains it; those points stay out of the partition test.
      if (in_c.size() < partition_samples) {
        if (c.contains(fp.point, ctx.tol.act)) in_c.push_back(fp.point);
        else ++partition_skipped;
      }
    }
    if (c.size() <= kFaceEnumerationCap) partition_violations += partition_check(c, in_c, ctx.tol).violations.size();
  }
  write_dat(ctx.dir / "discrepancy.dat", "sample", "discrepancy", idx, disc);
  ctx.results["polyhedra"] = polys.size();
  ctx.results["points_per_set"] = points;
  ctx.results["max_discrepancy"] = worst;
  ctx.results["partition_violations"] = partition_violations;
  ctx.results["partition_samples_outside"] = partition_skipped;
  expect_at_most(ctx.expect, "max_discrepancy", worst, ctx.checks);
  expect_at_most(ctx.expect, "partition_violations", static_cast<double>(partition_violations), ctx.checks);
}

// ---------------------------------------------------------------- split_check

void run_split_check(Context& ctx) {
  const json& doc = ctx.cfg.doc;
  const std::uint64_t seed = require_seed(doc, ctx.opt, "split_check samples a random corpus");
  const CorpusSpec cs = parse_corpus(doc);
  const int dim = static_cast<int>(count_or(doc, "ambient_dim", 40));
  if (dim < cs.max_dim) invalid("\"ambient_dim\" must be at least the corpus dimension");
  const std::size_t points = count_or(doc, "points_per_set", 100);
  const double radius = number_or(doc, "radius", 5.0);

  const auto polys = corpus::standard_corpus(seed, cs.count, cs.max_dim, cs.max_constraints);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Polyhedron> embedded;
  for (const auto& c : polys) embedded.push_back(corpus::embed(c, dim, corpus::random_support(rng, dim, c.ambient_dim())));

  std::ofstream csv(ctx.dir / "samples.csv");
  csv << "set,sample,kperp_dim,error\n";
  std::vector<double> idx, errs;
  double worst = 0.0;
  for (std::size_t s = 0; s < embedded.size(); ++s) {
    const SplitPolyhedron sp = split(embedded[s], std::nullopt, ctx.tol);
    for (std::size_t k = 0; k < points; ++k) {
      const Vector x = corpus::random_point(rng, dim, radius);
      const double e = (project_via_split(sp, x, ctx.tol) - project_polyhedron(embedded[s], x, ctx.tol).point).norm();
      worst = std::max(worst, e);
      csv << s << ',' << k << ',' << sp.kperp_basis.cols() << ',' << format_double(e) << '\n';
      idx.push_back(static_cast<double>(errs.size()));
      errs.push_back(e);
    }
  }
  write_dat(ctx.dir / "split_error.dat", "sample", "error", idx, errs);
  ctx.results["polyhedra"] = embedded.size();
  ctx.results["ambient_dim"] = dim;
  ctx.results["max_pointwise"] = worst;
  expect_at_most(ctx.expect, "max_pointwise", worst, ctx.checks);

  // Orbits on collections drawn from the embedded corpus, against orbits on the D-parts.
  if (doc.contains("orbit")) {
    const json& o = doc.at("orbit");
    const std::size_t collections = count_or(o, "collections", 5);
    const std::size_t per = count_or(o, "sets_per_collection", 3);
    const std::size_t steps = ctx.opt.steps ? *ctx.opt.steps : count_or(o, "steps", 200);
    const double lmax = o.contains("lambda_max") ? lambda_value(o.at("lambda_max"), "lambda_max") : 1.9;
    if (per == 0 || per > embedded.size()) invalid("\"sets_per_collection\" must be between 1 and the corpus size");
    std::vector<double> per_step(steps + 1, 0.0);
    for (std::size_t k = 0; k < collections; ++k) {
      std::vector<Polyhedron> cs_k;
      for (int i : corpus::random_support(rng, static_cast<int>(embedded.size()), static_cast<int>(per))) cs_k.push_back(embedded[static_cast<std::size_t>(i)]);
      const AffineSubspace kk = common_kernel(cs_k, ctx.tol);
      std::vector<Target> full, reduced;
      std::optional<SplitPolyhedron> first;
      for (const auto& c : cs_k) {
        SplitPolyhedron sp = split(c, kk, ctx.tol);
        full.emplace_back(c);
        reduced.emplace_back(sp.d);
        if (!first) first = std::move(sp);
      }
      const Vector x0 = corpus::random_point(rng, dim, radius);
      const auto policy = SelectionPolicy::random_uniform(rng());
      const auto sched = RelaxationSchedule::random_in(lmax, rng());
      const Trajectory a = run(Collection(full, ctx.tol), policy, sched, x0, steps, ctx.tol);
      const Trajectory b = run(Collection(reduced, ctx.tol), policy, sched, first->to_kperp(x0), steps, ctx.tol);
      const Vector k0 = first->project_k(x0);
      for (std::size_t n = 0; n <= steps; ++n) {
        per_step[n] = std::max(per_step[n], (a.iterates[n] - (k0 + first->lift(b.iterates[n]))).norm());
      }
    }
    const double orbit_worst = *std::max_element(per_step.begin(), per_step.end());
    write_dat(ctx.dir / "orbit_error.dat", "n", "max_error", iota_doubles(per_step.size()), per_step);
    ctx.results["orbit_collections"] = collections;
    ctx.results["orbit_steps"] = steps;
    ctx.results["max_orbit"] = orbit_worst;
    expect_at_most(ctx.expect, "max_orbit", orbit_worst, ctx.checks);
  }
}

void write_text_report(const fs::path& path, const ExperimentResult& r) {
  std::ofstream os(path);
  os << "experiment: " << r.name << '\n' << "kind: " << r.kind << '\n';
  for (const auto& [k, v] : r.report.items()) {
    if (k == "results" || k == "checks" || k == "name" || k == "kind") continue;
    os << k << ": " << v.dump() << '\n';
  }
  for (const auto& [k, v] : r.report.at("results").items()) {
    if (v.is_array()) continue;  // tables live in the CSV and .dat files
    os << k << ": " << (v.is_number_float() ? format_double(v.get<double>()) : v.dump()) << '\n';
  }
  for (const auto& c : r.checks) os << "check " << c.name << ": " << (c.passed ? "PASS" : "FAIL") << " (" << c.detail << ")\n";
}

}  // namespace

bool ExperimentResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::pair<std::string, double> parse_tolerance_override(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) invalid("tolerance override \"" + s + "\" is not name=value");
  const std::string name = s.substr(0, eq);
  const std::string value = s.substr(eq + 1);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    invalid("tolerance override \"" + s + "\" has no numeric value");
  }
  if (used != value.size()) invalid("tolerance override \"" + s + "\" has trailing characters");
  return {name, v};
}

Tolerances apply_tolerance_overrides(Tolerances t, const std::map<std::string, double>& overrides) {
  for (const auto& [name, v] : overrides) {
    if (!(v > 0.0) || !std::isfinite(v)) invalid("tolerance " + name + " must be positive and finite");
    if (name == "orth") t.orth = v;
    else if (name == "feas") t.feas = v;
    else if (name == "rank") t.rank = v;
    else if (name == "act") t.act = v;
    else if (name == "dual") t.dual = v;
    else invalid("unknown tolerance \"" + name + "\" (orth, feas, rank, act, dual)");
  }
  return t;
}

LambdaSchedule schedule_from_json(const json& j) {
  const std::string kind = text(require(j, "kind"), "schedule kind");
  if (kind == "harmonic") return LambdaSchedule::harmonic();
  if (kind == "two_minus") {
    const std::string name = text(require(j, "eps"), "eps");
    return LambdaSchedule::two_minus(named_sequence(j.at("eps"), "eps"), sequence_label(name));
  }
  if (kind == "mixed") {
    const std::string name = text(require(j, "rho"), "rho");
    return LambdaSchedule::mixed(named_sequence(j.at("rho"), "rho"), sequence_label(name));
  }
  if (kind == "truncated") return LambdaSchedule::truncated(schedule_from_json(require(j, "mu")));
  if (kind == "explicit") {
    std::vector<double> values;
    for (const auto& v : require(j, "values")) values.push_back(lambda_value(v, "values"));
    if (values.empty()) invalid("empty explicit schedule");
    return LambdaSchedule::explicit_values(std::move(values));
  }
  invalid("unknown scalar schedule \"" + kind + "\"");
}

std::vector<Target> random_collection(std::mt19937_64& rng, const StressRunSpec& spec, int& dim) {
  dim = uniform_int(rng, spec.min_dim, spec.max_dim);
  const int n_sets = uniform_int(rng, 1, static_cast<int>(spec.max_sets));
  std::vector<Target> sets;
  for (int i = 0; i < n_sets; ++i) {
    sets.emplace_back(corpus::random_polyhedron(rng, dim, uniform_int(rng, 1, spec.max_constraints)));
  }
  return sets;
}

ExperimentConfig parse_config(const std::string& body, const fs::path& source) {
  json doc;
  try {
    doc = json::parse(body, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    invalid("cannot parse " + (source.empty() ? std::string("config") : source.string()) + ": " + e.what());
  }
  if (!doc.is_object()) invalid("config must be a JSON object");
  ExperimentConfig cfg;
  cfg.name = text(require(doc, "name"), "name");
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos || cfg.name == "." || cfg.name == "..") {
    invalid("\"name\" must be a plain nonempty file name");
  }
  cfg.kind = text(require(doc, "kind"), "kind");
  static const std::vector<std::string> kinds{"orbit", "scalar", "faces_check", "split_check", "divergence_epiexp"};
  if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end()) invalid("unknown kind \"" + cfg.kind + "\"");
  if (doc.contains("expect") && !doc.at("expect").is_object()) invalid("\"expect\" must be an object");
  cfg.source = source;
  cfg.doc = std::move(doc);
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) invalid("cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  Context ctx{cfg, opt, tolerances_of(cfg.doc, opt), opt.out_dir / cfg.name, json::object(), {}, json::object()};
  if (cfg.doc.contains("expect")) ctx.expect = cfg.doc.at("expect");
  fs::create_directories(ctx.dir);

  try {
    if (cfg.kind == "orbit") run_orbit(ctx);
    else if (cfg.kind == "scalar") run_scalar(ctx);
    else if (cfg.kind == "faces_check") run_faces_check(ctx);
    else if (cfg.kind == "split_check") run_split_check(ctx);
    else run_divergence(ctx);
  } catch (const json::exception& e) {
    invalid(std::string("malformed field: ") + e.what());
  }

  ExperimentResult r;
  r.name = cfg.name;
  r.kind = cfg.kind;
  r.dir = ctx.dir;
  r.checks = std::move(ctx.checks);
  r.report = {{"name", cfg.name}, {"kind", cfg.kind}, {"rng", std::string(kRngAlgorithm)},
              {"tolerances", tolerances_json(ctx.tol)}, {"results", ctx.results}};
  if (auto s = seed_of(cfg.doc, opt)) r.report["seed"] = *s;
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  r.report["checks"] = checks;
  r.report["passed"] = r.all_passed();

  std::ofstream(ctx.dir / "report.json") << r.report.dump(2) << '\n';
  write_text_report(ctx.dir / "report.txt", r);
  return r;
}

fs::path bundled_config_dir() {
  if (const char* env = std::getenv("POLYPROJ_CONFIG_DIR")) return env;
  return POLYPROJ_CONFIG_DIR;
}

std::vector<fs::path> config_files(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> list_bundled() {
  std::vector<std::string> names;
  for (const auto& p : config_files(bundled_config_dir())) names.push_back(p.stem().string());
  return names;
}

}  // namespace polyproj
