#include <algorithm>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "polyproj/errors.hpp"
#include "polyproj/experiment.hpp"

using namespace polyproj;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("polyproj_test_experiment_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ExperimentConfig bundled(const std::string& name) { return load_config(bundled_config_dir() / (name + ".json")); }

const char* kSmallOrbit = R"({
  "name": "small_orbit",
  "kind": "orbit",
  "seed": 3,
  "dim": 2,
  "steps": 50,
  "x0": [4, -1],
  "sets": [{"type": "box", "lo": 0, "hi": 1},
           {"type": "affine", "base": [0, 0.5], "directions": [[1, 0]]}],
  "policy": "random_uniform",
  "schedule": {"kind": "random_in", "lambda_max": 1.9}
})";

}  // namespace

TEST_CASE("config parsing rejects malformed documents") {
  CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigInvalid);
  CHECK_THROWS_AS(parse_config("{\"kind\": \"orbit\"}"), ConfigInvalid);
  CHECK_THROWS_AS(parse_config("{\"name\": \"x\", \"kind\": \"sorcery\"}"), ConfigInvalid);
  CHECK_THROWS_AS(parse_config("{\"name\": \"../x\", \"kind\": \"orbit\"}"), ConfigInvalid);
  CHECK_THROWS_AS(parse_config("{\"name\": \"x\", \"kind\": \"orbit\""), ConfigInvalid);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigInvalid);
  // Comments are allowed.
  CHECK(parse_config("// header\n{\"name\": \"x\", \"kind\": \"scalar\"}").kind == "scalar");
}

TEST_CASE("config validation happens before any numerical work") {
  const fs::path out = scratch("validation");
  RunOptions o;
  o.out_dir = out;
  auto with = [](std::string text, const std::string& from, const std::string& to) {
    text.replace(text.find(from), from.size(), to);
    return parse_config(text);
  };
  CHECK_THROWS_AS(run_experiment(with(kSmallOrbit, "\"lambda_max\": 1.9", "\"lambda_max\": 2.5"), o), ConfigInvalid);
  CHECK_THROWS_AS(run_experiment(with(kSmallOrbit, "\"seed\": 3,", ""), o), ConfigInvalid);
  CHECK_THROWS_AS(run_experiment(with(kSmallOrbit, "\"x0\": [4, -1]", "\"x0\": [4, -1, 2]"), o), ConfigInvalid);
  CHECK_THROWS_AS(run_experiment(with(kSmallOrbit, "\"hi\": 1", "\"hi\": -1"), o), ConfigInvalid);
  CHECK_THROWS_AS(run_experiment(with(kSmallOrbit, "\"policy\": \"random_uniform\"", "\"policy\": \"telepathy\""), o),
                  ConfigInvalid);
  CHECK_THROWS_AS(run_experiment(with(kSmallOrbit, "\"lo\": 0", "\"lo\": \"zero\""), o), ConfigInvalid);
  CHECK_THROWS_AS(run_experiment(with(kSmallOrbit, "\"steps\": 50", "\"steps\": -5"), o), ConfigInvalid);

  // A seed on the command line satisfies the requirement.
  o.seed = 9;
  CHECK_NOTHROW(run_experiment(with(kSmallOrbit, "\"seed\": 3,", ""), o));
}

TEST_CASE("tolerance overrides") {
  CHECK(parse_tolerance_override("feas=1e-2") == std::pair<std::string, double>{"feas", 1e-2});
  CHECK_THROWS_AS(parse_tolerance_override("feas"), ConfigInvalid);
  CHECK_THROWS_AS(parse_tolerance_override("feas=abc"), ConfigInvalid);
  CHECK_THROWS_AS(parse_tolerance_override("feas=1e-2x"), ConfigInvalid);
  const Tolerances t = apply_tolerance_overrides(Tolerances{}, {{"feas", 1e-2}, {"act", 1e-5}});
  CHECK(t.feas == 1e-2);
  CHECK(t.act == 1e-5);
  CHECK(t.orth == Tolerances{}.orth);
  CHECK_THROWS_AS(apply_tolerance_overrides(Tolerances{}, {{"nonsense", 1.0}}), ConfigInvalid);
  CHECK_THROWS_AS(apply_tolerance_overrides(Tolerances{}, {{"feas", -1.0}}), ConfigInvalid);
}

TEST_CASE("runs write the CSV, both reports and plot series") {
  const fs::path out = scratch("artifacts");
  RunOptions o;
  o.out_dir = out;
  const auto r = run_experiment(parse_config(kSmallOrbit), o);
  CHECK(r.dir == out / "small_orbit");
  for (const char* f : {"trajectory.csv", "report.txt", "report.json", "norm.dat", "running_max.dat"})
    CHECK(fs::exists(r.dir / f));
  const std::string csv = slurp(r.dir / "trajectory.csv");
  CHECK(csv.rfind("n,x_1,x_2,norm,set_index,lambda\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 52);
  const auto report = nlohmann::json::parse(slurp(r.dir / "report.json"));
  CHECK(report.at("seed") == 3);
  CHECK(report.at("rng") == "mt19937_64");
  CHECK(report.at("results").at("steps") == 50);

  // Same seed, same bytes; another seed, other bytes; a step override shortens the run.
  RunOptions again = o;
  again.out_dir = out / "again";
  CHECK(slurp(run_experiment(parse_config(kSmallOrbit), again).dir / "trajectory.csv") == csv);
  RunOptions reseeded = again;
  reseeded.out_dir = out / "reseeded";
  reseeded.seed = 4;
  CHECK(slurp(run_experiment(parse_config(kSmallOrbit), reseeded).dir / "trajectory.csv") != csv);
  RunOptions shorter = again;
  shorter.out_dir = out / "shorter";
  shorter.steps = 7;
  const std::string short_csv = slurp(run_experiment(parse_config(kSmallOrbit), shorter).dir / "trajectory.csv");
  CHECK(std::count(short_csv.begin(), short_csv.end(), '\n') == 9);
}

TEST_CASE("bundled configs") {
  const auto names = list_bundled();
  for (const char* n : {"epiexp_divergence", "meshpoly_stress_d6", "scalar_harmonic", "scalar_mixed_bounded",
                        "scalar_two_minus", "scalar_truncated", "face_projection_identity", "split_identity_d40"}) {
    CHECK_MESSAGE(std::find(names.begin(), names.end(), n) != names.end(), n);
  }
  for (const auto& p : config_files(bundled_config_dir())) {
    const std::string text = slurp(p);
    // Each one opens with a comment that states the claim it exercises.
    CHECK_MESSAGE(text.rfind("// ", 0) == 0, p.filename().string());
    const auto cfg = load_config(p);
    CHECK(cfg.name == p.stem().string());
  }
}

TEST_CASE("bundled examples: divergence and mixed schedule") {
  const fs::path out = scratch("bundled");
  RunOptions o;
  o.out_dir = out;
  const auto div = run_experiment(bundled("epiexp_divergence"), o);
  CHECK(div.report.at("results").at("verdict") == "GROWING");

  const auto mixed = run_experiment(bundled("scalar_mixed_bounded"), o);
  const auto& res = mixed.report.at("results");
  CHECK(res.at("regime") == "BOUNDED_OSCILLATING");
  CHECK(res.at("even_limit").get<double>() == 1.0);
  CHECK(fs::exists(mixed.dir / "y_n.dat"));
}

TEST_CASE("a loose feasibility tolerance still gives the face-projection identity") {
  const fs::path out = scratch("loose");
  RunOptions o;
  o.out_dir = out;
  o.tol["feas"] = 1e-2;
  const auto r = run_experiment(bundled("face_projection_identity"), o);
  CHECK(r.report.at("tolerances").at("feas") == 1e-2);
  CHECK(r.all_passed());
  CHECK(r.report.at("results").at("max_discrepancy").get<double>() <= 1e-8);
}
