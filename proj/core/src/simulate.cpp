#include "cone_spde/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "cone_spde/error.hpp"

namespace cone_spde {

NoiseSpec NoiseSpec::geometric(std::size_t count, std::uint64_t seed) {
  NoiseSpec n{std::vector<double>(count), seed};
  for (std::size_t j = 0; j < count; ++j) n.q_eigenvalues[j] = std::ldexp(1.0, -static_cast<int>(j + 1));
  return n;
}

NoiseSpec NoiseSpec::unit(std::size_t count, std::uint64_t seed) {
  return NoiseSpec{std::vector<double>(count, 1.0), seed};
}

void NoiseSpec::validate(std::size_t columns) const {
  for (double q : q_eigenvalues) {
    if (!(q > 0.0) || !std::isfinite(q)) throw ConfigError("noise: eigenvalues must be positive");
  }
  if (q_eigenvalues.size() > columns) {
    throw ConfigError("noise: " + std::to_string(q_eigenvalues.size()) +
                      " eigenvalues for only " + std::to_string(columns) + " volatility columns");
  }
}

std::size_t SimConfig::steps() const {
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !(horizon > 0.0) || dt > horizon) {
    throw ConfigError("sim: need 0 < dt <= horizon");
  }
  const double steps_exact = horizon / dt;
  if (std::abs(steps_exact - std::round(steps_exact)) > 1e-9 * steps_exact) {
    throw ConfigError("sim: horizon must be an integer multiple of dt");
  }
  if (paths < 1) throw ConfigError("sim: need at least one path");
  if (!(exit_tol >= 0.0)) throw ConfigError("sim: exit_tol must be nonnegative");
  if (!(overflow_guard > 0.0)) throw ConfigError("sim: overflow_guard must be positive");
  if (thin < 1) throw ConfigError("sim: thin must be at least 1");
}

PathNoise::PathNoise(const NoiseSpec& noise, std::vector<double> jump_weights, std::uint64_t seed)
    : weights_(std::move(jump_weights)), rng_(seed) {
  sqrt_q_.reserve(noise.q_eigenvalues.size());
  for (double q : noise.q_eigenvalues) sqrt_q_.push_back(std::sqrt(q));
}

void PathNoise::draw(double dt, std::span<double> wiener, std::span<unsigned> counts) {
  const double sdt = std::sqrt(dt);
  for (std::size_t j = 0; j < wiener.size(); ++j) {
    wiener[j] = j < sqrt_q_.size() ? sqrt_q_[j] * sdt * normal_(rng_) : 0.0;
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double mean = weights_[i] * dt;
    if (mean > 0.0) {
      std::poisson_distribution<unsigned> poisson(mean);
      counts[i] = poisson(rng_);
    } else {
      counts[i] = 0;
    }
  }
}

namespace {

std::vector<double> jump_weights(const CoefficientSet& c) {
  std::vector<double> w;
  for (const auto& a : c.jumps()) w.push_back(a.weight);
  return w;
}

/// One exponential-Euler step driven by pre-drawn increments.
StateVec step(const CoefficientSet& c, const std::vector<double>& decay, const StateVec& r,
              double dt, std::span<const double> wiener, std::span<const unsigned> counts) {
  StateVec x = r;
  x.axpy(dt, c.drift()(r));
  for (std::size_t j = 0; j < c.vol().size(); ++j) {
    if (wiener[j] != 0.0) x.axpy(wiener[j], c.vol()[j](r));
  }
  for (std::size_t i = 0; i < c.jumps().size(); ++i) {
    const auto& atom = c.jumps()[i];
    const double coeff = static_cast<double>(counts[i]) - atom.weight * dt;
    if (coeff != 0.0) x.axpy(coeff, atom.kernel(r));
  }
  std::vector<double> out(x.values());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= decay[k];
  return StateVec(std::move(out));
}

void require_dims(const DiagonalSemigroup& s, const CoefficientSet& c, const ConeSpec& cone,
                  const StateVec& h0) {
  if (s.dim() != c.dim() || cone.dim() != c.dim() || h0.dim() != c.dim()) {
    throw ShapeError("simulate: semigroup, coefficients, cone and initial state dimensions differ");
  }
}

}  // namespace

PathResult simulate_path(const DiagonalSemigroup& s, const CoefficientSet& c,
                         const ConeSpec& cone, const NoiseSpec& noise, const SimConfig& cfg,
                         const StateVec& h0, std::size_t index) {
  cfg.validate();
  require_dims(s, c, cone, h0);
  noise.validate(c.vol().size());

  PathResult out;
  out.index = index;
  out.seed = derive_seed(noise.seed, index);
  PathNoise draws(noise, jump_weights(c), out.seed);

  const std::size_t steps = cfg.steps();
  const auto decay = s.multipliers(cfg.dt);
  std::vector<double> wiener(c.vol().size());
  std::vector<unsigned> counts(c.jumps().size());

  StateVec r = h0;
  out.min_margin = cone.min_margin(r);
  if (out.min_margin < -cfg.exit_tol) {
    out.exited = true;
    out.exit_time = 0.0;
  }
  if (cfg.keep_trajectories) {
    out.times.push_back(0.0);
    out.trajectory.push_back(r);
  }
  for (std::size_t m = 1; m <= steps; ++m) {
    draws.draw(cfg.dt, wiener, counts);
    try {
      r = step(c, decay, r, cfg.dt, wiener, counts);
    } catch (const NumericError&) {
      throw DivergenceError("simulate: non-finite state at step " + std::to_string(m), m);
    }
    if (cfg.clip) r = cone.clip(r);
    if (!(r.norm() <= cfg.overflow_guard)) {
      throw DivergenceError("simulate: |r| exceeded the overflow guard at step " +
                                std::to_string(m),
                            m);
    }
    const double t = static_cast<double>(m) * cfg.dt;
    const double margin = cone.min_margin(r);
    out.min_margin = std::min(out.min_margin, margin);
    if (!out.exited && margin < -cfg.exit_tol) {
      out.exited = true;
      out.exit_time = t;
    }
    if (cfg.keep_trajectories && (m % cfg.thin == 0 || m == steps)) {
      out.times.push_back(t);
      out.trajectory.push_back(r);
    }
  }
  out.final_state = std::move(r);
  return out;
}

std::size_t resolve_threads(std::size_t requested) {
  std::size_t n = requested;
  if (n == 0) {
    if (const char* env = std::getenv("CONE_SPDE_THREADS")) {
      try {
        n = static_cast<std::size_t>(std::stoul(env));
      } catch (const std::exception&) {
        throw ConfigError("CONE_SPDE_THREADS must be a positive integer");
      }
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

namespace {

/// Runs body(p) for p in [0, count) on up to `threads` workers.
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, const Body& body) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t p = 0; p < count; ++p) body(p);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t p = next++; p < count && !failed; p = next++) {
          try {
            body(p);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

PathEnsemble run_ensemble(const DiagonalSemigroup& s, const CoefficientSet& c,
                          const ConeSpec& cone, const NoiseSpec& noise, const SimConfig& cfg,
                          const StateVec& h0) {
  cfg.validate();
  require_dims(s, c, cone, h0);
  noise.validate(c.vol().size());
  PathEnsemble out;
  out.exit_tol = cfg.exit_tol;
  out.master_seed = noise.seed;
  out.paths.resize(cfg.paths);
  parallel_for(cfg.paths, resolve_threads(cfg.threads), [&](std::size_t p) {
    try {
      out.paths[p] = simulate_path(s, c, cone, noise, cfg, h0, p);
    } catch (const DivergenceError& e) {
      PathResult bad;
      bad.index = p;
      bad.seed = derive_seed(noise.seed, p);
      bad.diverged = true;
      bad.diverged_step = e.step();
      bad.min_margin = std::numeric_limits<double>::quiet_NaN();
      out.paths[p] = std::move(bad);
    }
  });
  return out;
}

std::size_t PathEnsemble::diverged() const {
  return static_cast<std::size_t>(
      std::count_if(paths.begin(), paths.end(), [](const PathResult& p) { return p.diverged; }));
}

std::size_t PathEnsemble::exited() const {
  return static_cast<std::size_t>(std::count_if(
      paths.begin(), paths.end(), [](const PathResult& p) { return !p.diverged && p.exited; }));
}

double PathEnsemble::exit_fraction() const {
  const std::size_t n = paths.size() - diverged();
  return n == 0 ? 0.0 : static_cast<double>(exited()) / static_cast<double>(n);
}

double PathEnsemble::exit_fraction_at(double tol) const {
  std::size_t n = 0;
  std::size_t hits = 0;
  for (const auto& p : paths) {
    if (p.diverged) continue;
    ++n;
    if (p.min_margin < -tol) ++hits;
  }
  return n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
}

double PathEnsemble::exit_std_error() const {
  const std::size_t n = paths.size() - diverged();
  if (n == 0) return 0.0;
  const double p = exit_fraction();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

std::vector<StabilityPoint> stability_experiment(const DiagonalSemigroup& s,
                                                 const CoefficientSet& limit,
                                                 const std::vector<CoefficientSet>& sequence,
                                                 const NoiseSpec& noise, const SimConfig& cfg,
                                                 const StateVec& h0) {
  cfg.validate();
  if (s.dim() != limit.dim() || h0.dim() != limit.dim()) {
    throw ShapeError("stability_experiment: dimension mismatch");
  }
  for (const auto& c : sequence) {
    if (c.dim() != limit.dim() || c.vol().size() != limit.vol().size() ||
        c.jumps().size() != limit.jumps().size()) {
      throw ShapeError("stability_experiment: coefficient sets must share dimension, "
                       "column count and atom count");
    }
    for (std::size_t i = 0; i < c.jumps().size(); ++i) {
      if (c.jumps()[i].weight != limit.jumps()[i].weight) {
        throw ShapeError("stability_experiment: coupled jump atoms need equal weights");
      }
    }
  }
  noise.validate(limit.vol().size());

  const std::size_t steps = cfg.steps();
  const auto decay = s.multipliers(cfg.dt);
  const std::size_t systems = sequence.size();
  // sup_sq[p][n] = sup_t |r_t - r^n_t|^2 on path p.
  std::vector<std::vector<double>> sup_sq(cfg.paths, std::vector<double>(systems, 0.0));

  parallel_for(cfg.paths, resolve_threads(cfg.threads), [&](std::size_t p) {
    PathNoise draws(noise, jump_weights(limit), derive_seed(noise.seed, p));
    std::vector<double> wiener(limit.vol().size());
    std::vector<unsigned> counts(limit.jumps().size());
    StateVec r = h0;
    std::vector<StateVec> rn(systems, h0);
    for (std::size_t m = 1; m <= steps; ++m) {
      draws.draw(cfg.dt, wiener, counts);
      r = step(limit, decay, r, cfg.dt, wiener, counts);
      for (std::size_t n = 0; n < systems; ++n) {
        rn[n] = step(sequence[n], decay, rn[n], cfg.dt, wiener, counts);
        const double d = distance(r, rn[n]);
        sup_sq[p][n] = std::max(sup_sq[p][n], d * d);
      }
      if (!(r.norm() <= cfg.overflow_guard)) {
        throw DivergenceError("stability_experiment: limit path diverged", m);
      }
    }
  });

  std::vector<StabilityPoint> out(systems);
  const double count = static_cast<double>(cfg.paths);
  for (std::size_t n = 0; n < systems; ++n) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t p = 0; p < cfg.paths; ++p) {
      sum += sup_sq[p][n];
      sum_sq += sup_sq[p][n] * sup_sq[p][n];
    }
    const double mean = sum / count;
    const double var = cfg.paths > 1 ? std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0))
                                     : 0.0;
    out[n] = {n, mean, std::sqrt(var / count)};
  }
  return out;
}

double ssnc_estimate(const DiagonalSemigroup& s, const VectorField& sigma, const ConeSpec& cone,
                     const StateVec& h, const LiminfGrid& grid) {
  if (!cone.contains(h)) throw DomainError("ssnc_estimate: h is not in the cone");
  const StateVec direction = sigma(h);
  double best = std::numeric_limits<double>::infinity();
  for (double t : grid.times()) {
    StateVec x = s.apply(t, h);
    x.axpy(t, direction);
    best = std::min(best, cone.distance(x) / t);
  }
  return best;
}

void to_json(nlohmann::json& j, const NoiseSpec& n) {
  j = nlohmann::json{{"q_eigenvalues", n.q_eigenvalues}, {"seed", n.seed}};
}

NoiseSpec noise_from_json(const nlohmann::json& j, std::size_t columns) {
  NoiseSpec n;
  n.seed = j.value("seed", std::uint64_t{0});
  if (!j.contains("q_eigenvalues")) {
    n.q_eigenvalues = NoiseSpec::geometric(columns, 0).q_eigenvalues;
  } else if (j.at("q_eigenvalues").is_string()) {
    const auto rule = j.at("q_eigenvalues").get<std::string>();
    if (rule == "geometric") {
      n.q_eigenvalues = NoiseSpec::geometric(columns, 0).q_eigenvalues;
    } else if (rule == "unit") {
      n.q_eigenvalues = NoiseSpec::unit(columns, 0).q_eigenvalues;
    } else {
      throw ConfigError("noise: unknown eigenvalue rule \"" + rule + "\"");
    }
  } else {
    n.q_eigenvalues = j.at("q_eigenvalues").get<std::vector<double>>();
  }
  n.validate(columns);
  return n;
}

void to_json(nlohmann::json& j, const SimConfig& c) {
  j = nlohmann::json{{"dt", c.dt},
                     {"horizon", c.horizon},
                     {"paths", c.paths},
                     {"scheme", "exponential-euler"},
                     {"exit_tol", c.exit_tol},
                     {"clip", c.clip},
                     {"overflow_guard", c.overflow_guard},
                     {"keep_trajectories", c.keep_trajectories},
                     {"thin", c.thin}};
}

void from_json(const nlohmann::json& j, SimConfig& c) {
  SimConfig d;
  c.dt = j.value("dt", d.dt);
  c.horizon = j.value("horizon", d.horizon);
  c.paths = j.value("paths", d.paths);
  const auto scheme = j.value("scheme", std::string("exponential-euler"));
  if (scheme != "exponential-euler") throw ConfigError("sim: unknown scheme \"" + scheme + "\"");
  c.exit_tol = j.value("exit_tol", d.exit_tol);
  c.clip = j.value("clip", d.clip);
  c.overflow_guard = j.value("overflow_guard", d.overflow_guard);
  c.keep_trajectories = j.value("keep_trajectories", d.keep_trajectories);
  c.thin = j.value("thin", d.thin);
  c.validate();
}

}  // namespace cone_spde
