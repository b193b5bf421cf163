#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cone_spde/checker.hpp"
#include "cone_spde/coefficients.hpp"
#include "cone_spde/cone.hpp"
#include "cone_spde/semigroup.hpp"
#include "cone_spde/simulate.hpp"
#include "cone_spde/state.hpp"

namespace cone_spde {

/// Process exit codes of the command runners.
enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_violation = 2 };

/// A fully expanded and validated experiment document.
///
///   {
///     "preset": "heat-positive",                       optional shortcut
///     "space": {"dim": N, "signs": "nonnegative" | "unconstrained" | [..]},
///     "semigroup": {"rates": "heat" | [..]},
///     "coefficients": {"drift": .., "vol": [..], "jumps": [..]},
///     "noise": {"q_eigenvalues": "unit" | "geometric" | [..], "seed": s},
///     "sim": {"dt", "horizon", "paths", "exit_tol", "dt_sweep", ...},
///     "initial": "apex" | x | [..],
///     "checker": {"per_face", "interior", "corners", "seed", "scale", "tol"},
///     "verify": {"exit_threshold": 0.01}
///   }
///
/// Preset fields are expanded first; explicit fields then replace them
/// (JSON merge patch).
struct ExperimentConfig {
  std::string preset;
  ConeSpec cone;
  DiagonalSemigroup semigroup;
  CoefficientSet coefficients;
  nlohmann::json coefficients_spec;
  NoiseSpec noise;
  SimConfig sim;
  /// Time steps of the verification sweep, coarse to fine. Defaults to
  /// {4 dt, 2 dt, dt}.
  std::vector<double> dt_sweep;
  StateVec initial;
  SamplerSpec sampler;
  std::optional<double> checker_tol;
  double exit_threshold = 0.01;

  std::size_t dim() const noexcept { return cone.dim(); }
};

/// Names accepted by "preset".
std::vector<std::string> preset_names();
/// The document a preset expands to. Throws ConfigError for unknown names.
nlohmann::json preset_document(const std::string& name);

/// Expands the preset, validates every section and checks that the
/// dimensions of cone, semigroup, coefficients, noise and initial state agree.
/// Errors are ConfigError with the offending field path in the message.
ExperimentConfig parse_config(const nlohmann::json& doc);
/// Reads a JSON file; syntax errors report line and column. A run manifest is
/// accepted too and yields the config it records.
nlohmann::json load_config_document(const std::filesystem::path& path);

/// Canonical form: every default filled in, preset expanded, keys sorted.
nlohmann::json canonical_json(const ExperimentConfig& cfg);
/// Git blob SHA-1 of the compact canonical JSON.
std::string manifest_hash(const ExperimentConfig& cfg);
/// git hash-object of arbitrary content.
std::string git_blob_sha1(const std::string& content);

/// Command-line overrides applied to the document before parsing.
struct Overrides {
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<double> dt;
};
nlohmann::json apply_overrides(nlohmann::json doc, const Overrides& o);

/// Exit fractions of one ensemble in the verification sweep.
struct SweepRow {
  double dt = 0.0;
  std::size_t paths = 0;
  std::size_t exits = 0;
  std::size_t diverged = 0;
  double exit_fraction = 0.0;
  double std_error = 0.0;
};

struct VerdictReport {
  ConditionReport checker;
  std::vector<SweepRow> sweep;
  bool agreement = false;
  std::string manifest;
};

/// SATISFIED with the finest-step exit fraction at most the threshold, or
/// VIOLATED with at least one exit at the finest step.
bool agreement(Verdict checker, const SweepRow& finest, double exit_threshold);

ConditionReport run_checker(const ExperimentConfig& cfg);
PathEnsemble run_simulation(const ExperimentConfig& cfg, double dt);
/// Optionally hands back the ensemble of the finest step.
VerdictReport run_verification(const ExperimentConfig& cfg, PathEnsemble* finest = nullptr);

// Command runners. Each writes its outputs below `out` and returns the exit code.
//   check     report.json, manifest.json
//   simulate  paths.csv, summary.json, manifest.json, trajectory.csv (single path
//             or keep_trajectories)
//   verify    report.json, sweep.csv, paths.csv (finest dt), manifest.json
// All CSV files begin with "# manifest=<hash>".
int cmd_check(const ExperimentConfig& cfg, const std::filesystem::path& out);
int cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out);
int cmd_verify(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

void write_paths_csv(const std::filesystem::path& file, const PathEnsemble& e,
                     const std::string& manifest);
void write_sweep_csv(const std::filesystem::path& file, const std::vector<SweepRow>& rows,
                     const std::string& manifest);
void write_trajectory_csv(const std::filesystem::path& file, const PathEnsemble& e,
                          const std::string& manifest);

void to_json(nlohmann::json& j, const SweepRow& r);
void to_json(nlohmann::json& j, const VerdictReport& r);

}  // namespace cone_spde
