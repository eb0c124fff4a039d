// polyproj: run, list and verify the bundled projection experiments.

#include <iostream>

#include "CLI11.hpp"
#include "polyproj/acceptance.hpp"
#include "polyproj/errors.hpp"
#include "polyproj/experiment.hpp"

namespace fs = std::filesystem;
using namespace polyproj;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitCriterion = 4;

// Argument errors from the numerical modules come from bad config values.
int exit_code_for(const Error& e) {
  if (dynamic_cast<const ConfigInvalid*>(&e) || dynamic_cast<const InvalidArgument*>(&e) ||
      dynamic_cast<const DimensionMismatch*>(&e) || dynamic_cast<const EpsOutOfRange*>(&e)) {
    return kExitConfig;
  }
  return kExitNumerical;
}

std::string error_kind(const Error& e) {
  if (dynamic_cast<const ConfigInvalid*>(&e)) return "ConfigInvalid";
  if (dynamic_cast<const NumericalFailure*>(&e)) return "NumericalFailure";
  if (dynamic_cast<const EmptyPolyhedron*>(&e)) return "EmptyPolyhedron";
  if (dynamic_cast<const CapExceeded*>(&e)) return "CapExceeded";
  return "Error";
}

void print_checks(const ExperimentResult& r) {
  for (const auto& c : r.checks) std::cout << "  " << (c.passed ? "PASS" : "FAIL") << ' ' << c.name << ": " << c.detail << '\n';
}

// A single file, or every *.json inside a directory.
std::vector<fs::path> expand(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const auto& a : args) {
    if (fs::is_directory(a)) {
      for (auto& p : config_files(a)) out.push_back(p);
    } else {
      out.emplace_back(a);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxed projections onto polyhedra: experiments and acceptance checks"};
  app.require_subcommand(1);

  RunOptions opt;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::string out_dir = "out";
  std::vector<std::string> tol_args;
  auto add_common = [&](CLI::App* sub, bool with_overrides) {
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    sub->add_option("--tol", tol_args, "Tolerance override name=value (orth, feas, rank, act, dual)");
    if (with_overrides) {
      sub->add_option("--seed", seed, "Seed override");
      sub->add_option("--steps", steps, "Step-count override");
    }
  };

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment config");
  run_cmd->add_option("config", config_path, "Config file, or the name of a bundled config")->required();
  add_common(run_cmd, true);

  auto* list_cmd = app.add_subcommand("list", "List the bundled configs");

  std::vector<std::string> extra;
  bool configs_only = false;
  bool record_bounds = false;
  auto* verify_cmd = app.add_subcommand("verify", "Run every bundled config and the acceptance criteria");
  verify_cmd->add_option("extra", extra, "Additional config files or directories to run");
  verify_cmd->add_flag("--configs-only", configs_only, "Skip the acceptance criteria");
  verify_cmd->add_flag("--record-bounds", record_bounds, "Store the stress sup norms as the new regression bounds");
  add_common(verify_cmd, false);

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& t : tol_args) opt.tol.insert(parse_tolerance_override(t));
    apply_tolerance_overrides(Tolerances{}, opt.tol);
  } catch (const Error& e) {
    std::cerr << "error [" << e.module() << "]: " << e.what() << '\n';
    return kExitConfig;
  }
  opt.out_dir = out_dir;
  if (run_cmd->count("--seed")) opt.seed = seed;
  if (run_cmd->count("--steps")) opt.steps = steps;

  if (*list_cmd) {
    for (const auto& n : list_bundled()) std::cout << n << '\n';
    return kExitOk;
  }

  if (*run_cmd) {
    fs::path path = config_path;
    if (!fs::exists(path) && fs::exists(bundled_config_dir() / (config_path + ".json"))) {
      path = bundled_config_dir() / (config_path + ".json");
    }
    try {
      const ExperimentConfig cfg = load_config(path);
      const ExperimentResult r = run_experiment(cfg, opt);
      std::cout << r.name << ": " << (r.all_passed() ? "PASS" : "FAIL") << " (" << r.dir.string() << ")\n";
      print_checks(r);
      return r.all_passed() ? kExitOk : kExitCriterion;
    } catch (const Error& e) {
      std::cerr << "error [" << e.module() << "] " << error_kind(e) << ": " << e.what() << '\n';
      return exit_code_for(e);
    }
  }

  // verify
  bool ok = true;
  std::vector<fs::path> paths = config_files(bundled_config_dir());
  for (auto& p : expand(extra)) paths.push_back(p);
  for (const auto& p : paths) {
    try {
      const ExperimentResult r = run_experiment(load_config(p), opt);
      ok = ok && r.all_passed();
      std::cout << (r.all_passed() ? "PASS" : "FAIL") << " config " << r.name << '\n';
      print_checks(r);
    } catch (const Error& e) {
      ok = false;
      std::cout << "FAIL config " << p.filename().string() << ": " << error_kind(e) << " [" << e.module()
                << "]: " << e.what() << '\n';
    }
  }
  if (!configs_only) {
    AcceptanceOptions ao;
    ao.work_dir = opt.out_dir / "acceptance";
    ao.tol = opt.tol;
    ao.record_bounds = record_bounds;
    for (const auto& c : run_acceptance(ao, std::cout)) ok = ok && c.passed;
  }
  std::cout << (ok ? "all checks passed" : "some checks failed") << '\n';
  return ok ? kExitOk : kExitCriterion;
}
