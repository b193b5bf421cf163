// cone-spde: check, simulate and verify cone invariance of truncated SPDEs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cone_spde/appendix.hpp"
#include "cone_spde/error.hpp"
#include "cone_spde/experiment.hpp"

namespace {

constexpr const char* kFooter = R"(Exit codes:
  0  success (check: NO VIOLATION FOUND; verify: report written, agreement or not)
  1  configuration or runtime error
  2  check: VIOLATED; appendix: a property failed

Outputs (every CSV starts with a '# manifest=<hash>' line):
  paths.csv       path,seed,exited,exit_time,min_margin,diverged
                  exit_time is empty for paths that stay in the cone; min_margin
                  is the smallest theta_k r_k(t) over the time grid.
  sweep.csv       dt,paths,exits,diverged,exit_fraction,std_error
                  one row per step of the verification sweep.
  trajectory.csv  path,t,r0,...,r{N-1}   (simulate with --paths 1)
  report.json     checker verdict, witnesses, sweep and agreement flag
  manifest.json   canonical config and its hash; accepted by --config

Presets: heat-positive, heat-positive-badvol, heat-positive-hidden-drift.
CONE_SPDE_THREADS caps the number of worker threads.)";

struct RunOptions {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<double> dt;
  std::optional<std::string> preset;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--config", o.config, "Experiment JSON or a previous manifest.json");
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Master seed of the noise");
  cmd->add_option("--paths", o.paths, "Number of Monte Carlo paths")->check(CLI::PositiveNumber);
  cmd->add_option("--dt", o.dt, "Time step; the sweep becomes {4dt, 2dt, dt}")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--preset", o.preset, "Built-in experiment to start from");
}

cone_spde::ExperimentConfig load(const RunOptions& o) {
  using namespace cone_spde;
  if (o.config.empty() && !o.preset) throw ConfigError("give --config or --preset");
  nlohmann::json doc =
      o.config.empty() ? nlohmann::json::object() : load_config_document(o.config);
  return parse_config(apply_overrides(std::move(doc), {o.preset, o.seed, o.paths, o.dt}));
}

int run_appendix_command(const std::string& suite, const cone_spde::AppendixOptions& options,
                         const std::filesystem::path& out) {
  const auto results = cone_spde::run_appendix(suite, options);
  cone_spde::print_appendix_table(std::cout, results);
  std::filesystem::create_directories(out);
  std::ofstream(out / "appendix.json") << nlohmann::json(results).dump(2) << '\n';
  for (const auto& r : results) {
    if (!r.passed()) return cone_spde::exit_violation;
  }
  return cone_spde::exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cone invariance checks and simulation for Galerkin-truncated jump SPDEs",
               "cone-spde"};
  app.footer(kFooter);
  app.require_subcommand(1);

  RunOptions check_opts;
  RunOptions sim_opts;
  RunOptions verify_opts;
  auto* check = app.add_subcommand("check", "Evaluate the boundary conditions at sampled points");
  add_run_options(check, check_opts);
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo ensemble");
  add_run_options(simulate, sim_opts);
  auto* verify = app.add_subcommand("verify", "Checker plus a time-step sweep of exit fractions");
  add_run_options(verify, verify_opts);

  auto* appendix = app.add_subcommand("appendix", "Property suites of the approximation operators");
  std::string suite = "all";
  std::string appendix_out = "out";
  cone_spde::AppendixOptions appendix_opts;
  appendix->add_option("suite,--suite", suite, "phi, retraction, supinf, mollify, rho or all")
      ->capture_default_str();
  appendix->add_option("--out", appendix_out, "Output directory")->capture_default_str();
  appendix->add_option("--samples", appendix_opts.samples, "Grid points or random pairs")
      ->capture_default_str();
  appendix->add_option("--face-points", appendix_opts.face_points, "Sampled face points")
      ->capture_default_str();
  appendix->add_option("--seed", appendix_opts.seed, "Seed of the random samples")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cone_spde::exit_error;
  }

  try {
    if (*check) return cone_spde::cmd_check(load(check_opts), check_opts.out);
    if (*simulate) return cone_spde::cmd_simulate(load(sim_opts), sim_opts.out);
    if (*verify) return cone_spde::cmd_verify(load(verify_opts), verify_opts.out);
    if (*appendix) return run_appendix_command(suite, appendix_opts, appendix_out);
  } catch (const cone_spde::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cone_spde::exit_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cone_spde::exit_error;
  }
  return cone_spde::exit_error;
}
