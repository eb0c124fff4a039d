#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "polyproj/iteration.hpp"
#include "polyproj/tolerances.hpp"

namespace polyproj {

/// One expectation from a config's "expect" block, after the run.
struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// A parsed and validated experiment document.
struct ExperimentConfig {
  std::string name;
  std::string kind;  ///< orbit, scalar, faces_check, split_check or divergence_epiexp
  std::filesystem::path source;
  nlohmann::json doc;
};

/// Command-line overrides applied on top of a config.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::filesystem::path out_dir = "out";
  std::map<std::string, double> tol;
};

struct ExperimentResult {
  std::string name;
  std::string kind;
  std::filesystem::path dir;  ///< out_dir / name
  nlohmann::json report;      ///< also written to report.json
  std::vector<Check> checks;

  bool all_passed() const;
};

/// Reads a JSON document (// comments allowed) and validates it. Throws ConfigInvalid.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& source = {});

/// Applies name=value overrides; throws ConfigInvalid on unknown names or bad values.
Tolerances apply_tolerance_overrides(Tolerances base, const std::map<std::string, double>& overrides);
/// Splits "name=value".
std::pair<std::string, double> parse_tolerance_override(const std::string& text);

/// Runs the experiment and writes its artifacts under options.out_dir / name:
/// a CSV (trajectory.csv or samples.csv), report.txt, report.json and
/// two-column .dat plot series. Throws ConfigInvalid, or NumericalFailure and
/// friends from the numerical modules.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Directory of the shipped configs.
std::filesystem::path bundled_config_dir();
/// Names of the shipped configs, sorted.
std::vector<std::string> list_bundled();
/// Every *.json under `dir`, sorted.
std::vector<std::filesystem::path> config_files(const std::filesystem::path& dir);

/// Scalar schedule from its JSON form, e.g. {"kind": "two_minus", "eps": "geometric"}.
LambdaSchedule schedule_from_json(const nlohmann::json& j);

/// Random collection used by the boundedness stress runs.
struct StressRunSpec {
  std::size_t max_sets = 5;
  int min_dim = 2;
  int max_dim = 6;
  int max_constraints = 8;
  double x0_radius = 10.0;
};
std::vector<Target> random_collection(std::mt19937_64& rng, const StressRunSpec& spec, int& dim);

}  // namespace polyproj
