#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cone_spde/coefficients.hpp"
#include "cone_spde/cone.hpp"
#include "cone_spde/field.hpp"
#include "cone_spde/rng.hpp"
#include "cone_spde/semigroup.hpp"

namespace cone_spde {

/// Covariance eigenvalues lambda_j of the Q-Wiener process and the master seed.
/// Column j of the volatility is driven by sqrt(lambda_j) dbeta^j. Columns past
/// the last eigenvalue receive no noise.
struct NoiseSpec {
  std::vector<double> q_eigenvalues;
  std::uint64_t seed = 0;

  /// lambda_j = 2^-j, j = 1..count.
  static NoiseSpec geometric(std::size_t count, std::uint64_t seed);
  /// lambda_j = 1.
  static NoiseSpec unit(std::size_t count, std::uint64_t seed);
  void validate(std::size_t columns) const;
};

enum class Scheme { exponential_euler };

struct SimConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  std::size_t paths = 1;
  Scheme scheme = Scheme::exponential_euler;
  double exit_tol = 1e-9;
  /// Project onto the cone after every step (comparison runs only).
  bool clip = false;
  double overflow_guard = 1e12;
  /// Worker threads; 0 means CONE_SPDE_THREADS or hardware concurrency.
  std::size_t threads = 0;
  bool keep_trajectories = false;
  /// Keep every `thin`-th state when trajectories are stored.
  std::size_t thin = 1;

  std::size_t steps() const;
  void validate() const;
};

/// Gaussian and Poisson draws for one path.
class PathNoise {
 public:
  PathNoise(const NoiseSpec& noise, std::vector<double> jump_weights, std::uint64_t seed);

  /// Wiener increments sqrt(lambda_j dt) xi_j and Poisson arrival counts with
  /// mean w_i dt for one step.
  void draw(double dt, std::span<double> wiener, std::span<unsigned> counts);

 private:
  std::vector<double> sqrt_q_;
  std::vector<double> weights_;
  Engine rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct PathResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  /// min over grid times and constrained k of theta_k r_k(t).
  double min_margin = 0.0;
  std::optional<double> exit_time;
  bool exited = false;
  bool diverged = false;
  std::size_t diverged_step = 0;
  StateVec final_state;
  std::vector<double> times;
  std::vector<StateVec> trajectory;
};

/// Exponential-Euler path of the mild solution,
///   r_{m+1} = S_dt [ r_m + dt alpha(r_m) - dt sum_i w_i gamma_i(r_m)
///                    + sum_j sigma^j(r_m) dW_j + sum_i N_i gamma_i(r_m) ],
/// with jumps inside a step applied at its end. Deterministic given
/// (noise.seed, index). Throws DivergenceError when |r| exceeds the guard.
PathResult simulate_path(const DiagonalSemigroup& s, const CoefficientSet& c,
                         const ConeSpec& cone, const NoiseSpec& noise, const SimConfig& cfg,
                         const StateVec& h0, std::size_t index = 0);

struct PathEnsemble {
  std::vector<PathResult> paths;
  double exit_tol = 0.0;
  std::uint64_t master_seed = 0;

  std::size_t diverged() const;
  std::size_t exited() const;
  /// Exited / non-diverged paths at the ensemble's own tolerance.
  double exit_fraction() const;
  /// Re-evaluated at another tolerance from the stored minimum margins.
  double exit_fraction_at(double tol) const;
  /// Binomial standard error of exit_fraction().
  double exit_std_error() const;
};

/// cfg.paths independent paths with seeds derive_seed(noise.seed, p). A diverged
/// path is recorded, not fatal. Results do not depend on the thread count.
PathEnsemble run_ensemble(const DiagonalSemigroup& s, const CoefficientSet& c,
                          const ConeSpec& cone, const NoiseSpec& noise, const SimConfig& cfg,
                          const StateVec& h0);

struct StabilityPoint {
  std::size_t index = 0;
  double mean = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of E sup_{t <= T} |r_t - r^n_t|^2 for each entry of
/// `sequence`, with r and every r^n driven by the same Wiener increments and
/// Poisson counts. All sets must share dimension, column count and atom count.
std::vector<StabilityPoint> stability_experiment(const DiagonalSemigroup& s,
                                                 const CoefficientSet& limit,
                                                 const std::vector<CoefficientSet>& sequence,
                                                 const NoiseSpec& noise, const SimConfig& cfg,
                                                 const StateVec& h0);

/// min over the grid of d_K(S_t h + t Sigma(h)) / t. Requires h in K.
double ssnc_estimate(const DiagonalSemigroup& s, const VectorField& sigma, const ConeSpec& cone,
                     const StateVec& h, const LiminfGrid& grid = {});

/// Worker count: cfg.threads, else CONE_SPDE_THREADS, else hardware concurrency.
std::size_t resolve_threads(std::size_t requested);

void to_json(nlohmann::json& j, const NoiseSpec& n);
/// "q_eigenvalues" may be a list, "geometric" or "unit" (sized to `columns`).
NoiseSpec noise_from_json(const nlohmann::json& j, std::size_t columns);
void to_json(nlohmann::json& j, const SimConfig& c);
void from_json(const nlohmann::json& j, SimConfig& c);

}  // namespace cone_spde
