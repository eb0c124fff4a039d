#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "polyproj/experiment.hpp"

namespace polyproj {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string measured;  ///< measured values next to their pinned thresholds
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::filesystem::path config_dir;  ///< defaults to bundled_config_dir()
  std::filesystem::path work_dir = "acceptance_out";
  std::filesystem::path bounds_file;  ///< defaults to the shipped stress bounds
  bool record_bounds = false;         ///< overwrite bounds_file with the measured sup norms
  std::map<std::string, double> tol;  ///< forwarded to every config run
};

/// Runs criteria 1 to 11 and writes one line per criterion to `out` as it goes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& out);

/// "PASS [ 1] title: measured (1.2 s)"
std::string format_criterion(const CriterionResult& r);

std::filesystem::path default_bounds_file();

}  // namespace polyproj
