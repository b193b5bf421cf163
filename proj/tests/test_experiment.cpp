#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cone_spde/appendix.hpp"
#include "cone_spde/error.hpp"
#include "cone_spde/experiment.hpp"

using namespace cone_spde;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("cone_spde_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("presets expand and parse") {
  for (const auto& name : preset_names()) {
    const auto cfg = parse_config(json{{"preset", name}});
    CHECK(cfg.dim() == 16);
    CHECK(cfg.cone.contains(cfg.initial));
    CHECK(cfg.dt_sweep.size() == 3);
  }
  const auto cfg = parse_config(json{{"preset", "heat-positive"}});
  CHECK(cfg.coefficients.vol().size() == 8);
  CHECK(cfg.coefficients.jumps().size() == 1);
  CHECK(cfg.noise.q_eigenvalues == std::vector<double>(8, 1.0));
  CHECK(cfg.dt_sweep == std::vector<double>{4e-3, 2e-3, 1e-3});
  CHECK(parse_config(json{{"preset", "heat-positive-badvol"}}).coefficients.vol().size() == 9);
  CHECK_THROWS_AS(preset_document("heat-negative"), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"preset", "heat-negative"}}), ConfigError);
}

TEST_CASE("explicit fields override the preset") {
  const auto cfg =
      parse_config(json{{"preset", "heat-positive"}, {"sim", {{"paths", 7}}}, {"noise", {{"seed", 4}}}});
  CHECK(cfg.sim.paths == 7);
  CHECK(cfg.sim.dt == 1e-3);
  CHECK(cfg.noise.seed == 4);
}

TEST_CASE("config errors name the offending field") {
  const json base = {{"preset", "heat-positive"}};
  auto with = [&](const json& patch) {
    json doc = base;
    doc.merge_patch(patch);
    return config_error(doc);
  };
  CHECK(with({{"coefficients", {{"vol", {{{"family", "nope"}}}}}}}).find("coefficients.vol[0]") !=
        std::string::npos);
  CHECK(with({{"sim", {{"dt", -1.0}}}}).find("sim") != std::string::npos);
  CHECK(with({{"sim", {{"frobnicate", 1}}}}).find("frobnicate") != std::string::npos);
  CHECK(with({{"initial", -1.0}}).find("initial") != std::string::npos);
  CHECK(with({{"semigroup", {{"rates", {1.0, 2.0}}}}}).find("semigroup") != std::string::npos);
  CHECK(with({{"verify", {{"exit_threshold", 2.0}}}}).find("exit_threshold") != std::string::npos);
  CHECK(with({{"unknown_section", 1}}).find("unknown_section") != std::string::npos);
  CHECK_FALSE(with({{"sim", {{"paths", 3}}}}).size() > 0);
}

TEST_CASE("malformed files report line and column") {
  const auto dir = scratch("malformed");
  std::ofstream(dir / "bad.json") << "{\n  \"preset\": \"heat-positive\",\n  oops\n}\n";
  try {
    load_config_document(dir / "bad.json");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad.json:3:") != std::string::npos);
  }
  CHECK_THROWS_AS(load_config_document(dir / "missing.json"), ConfigError);
}

TEST_CASE("canonical form round-trips and hashes stably") {
  const auto cfg = parse_config(json{{"preset", "heat-positive-hidden-drift"}});
  const auto canon = canonical_json(cfg);
  CHECK_FALSE(canon.contains("preset"));
  const auto again = parse_config(canon);
  CHECK(canonical_json(again) == canon);
  CHECK(manifest_hash(again) == manifest_hash(cfg));
  CHECK(manifest_hash(cfg).size() == 40);
  CHECK(manifest_hash(parse_config(json{{"preset", "heat-positive"}})) != manifest_hash(cfg));
}

TEST_CASE("git blob hashes") {
  // Values printed by `git hash-object`.
  CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("overrides") {
  const auto doc = apply_overrides(json{{"preset", "heat-positive"}},
                                   {std::nullopt, 42u, 10u, 5e-3});
  const auto cfg = parse_config(doc);
  CHECK(cfg.noise.seed == 42);
  CHECK(cfg.sim.paths == 10);
  CHECK(cfg.sim.dt == 5e-3);
  CHECK(cfg.dt_sweep == std::vector<double>{2e-2, 1e-2, 5e-3});
  const auto preset = parse_config(apply_overrides(json::object(), {"heat-positive-badvol", {}, {}, {}}));
  CHECK(preset.preset == "heat-positive-badvol");
}

TEST_CASE("agreement between checker and simulation") {
  SweepRow quiet{1e-3, 100, 0, 0, 0.0, 0.0};
  SweepRow some{1e-3, 100, 5, 0, 0.05, 0.02};
  CHECK(agreement(Verdict::no_violation_found, quiet, 0.01));
  CHECK_FALSE(agreement(Verdict::no_violation_found, some, 0.01));
  CHECK(agreement(Verdict::violated, some, 0.01));
  CHECK_FALSE(agreement(Verdict::violated, quiet, 0.01));
}

TEST_CASE("double formatting round-trips") {
  for (double x : {0.1, 1e-3, 1.0 / 3.0, -2.5e300, 0.0}) {
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("command runners write their outputs") {
  auto cfg = parse_config(json{{"preset", "heat-positive-badvol"}, {"sim", {{"paths", 20}}}});
  const auto dir = scratch("runners");
  CHECK(cmd_check(cfg, dir / "check") == exit_violation);
  CHECK(fs::exists(dir / "check" / "report.json"));
  const auto report = json::parse(read_file(dir / "check" / "report.json"));
  CHECK(report.dump().find("volatility") != std::string::npos);

  CHECK(cmd_verify(cfg, dir / "verify") == exit_ok);
  const auto sweep = read_file(dir / "verify" / "sweep.csv");
  const auto hash = manifest_hash(cfg);
  CHECK(sweep.rfind("# manifest=" + hash + "\n", 0) == 0);
  CHECK(sweep.find("dt,paths,exits,diverged,exit_fraction,std_error") != std::string::npos);
  CHECK(read_file(dir / "verify" / "paths.csv").find("path,seed,exited,exit_time,min_margin,diverged") !=
        std::string::npos);

  // A manifest is accepted as a config and reproduces the hash.
  const auto manifest = load_config_document(dir / "verify" / "manifest.json");
  CHECK(manifest_hash(parse_config(manifest)) == hash);
  CHECK(json::parse(read_file(dir / "verify" / "manifest.json")).at("hash") == hash);

  cfg.sim.paths = 1;
  CHECK(cmd_simulate(cfg, dir / "sim") == exit_ok);
  CHECK(fs::exists(dir / "sim" / "trajectory.csv"));
  CHECK(fs::exists(dir / "sim" / "summary.json"));
  fs::remove_all(dir);
}

TEST_CASE("verification of the compliant preset agrees") {
  const auto cfg = parse_config(json{{"preset", "heat-positive"}, {"sim", {{"paths", 30}}}});
  PathEnsemble finest;
  const auto r = run_verification(cfg, &finest);
  CHECK(r.checker.verdict() == Verdict::no_violation_found);
  REQUIRE(r.sweep.size() == 3);
  CHECK(r.sweep.back().dt == 1e-3);
  CHECK(finest.paths.size() == 30);
  CHECK(r.agreement);
}

TEST_CASE("appendix runner") {
  CHECK(appendix_suites() ==
        std::vector<std::string>{"phi", "retraction", "supinf", "mollify", "rho", "all"});
  CHECK_THROWS_AS(run_appendix("bogus"), ConfigError);
  AppendixOptions small;
  small.samples = 500;
  for (const auto& r : run_appendix("phi", small)) {
    CHECK(r.suite == "phi");
    CHECK(r.checks > 0);
    CHECK(r.passed());
  }
  std::ostringstream table;
  print_appendix_table(table, run_appendix("retraction", small));
  CHECK(table.str().find("retraction") != std::string::npos);
}
