#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cone_spde/coefficients.hpp"
#include "cone_spde/cone.hpp"
#include "cone_spde/semigroup.hpp"

namespace cone_spde {

/// How the checkers probe the cone.
///
/// For every constrained coordinate k the sampler draws `per_face` points with
/// h_k = 0 and the remaining coordinates folded into the cone (|N(0,1)| with the
/// right sign; free coordinates unfolded). With `corners` it adds the apex and
/// the signed unit vectors lying on that face. The jump check additionally uses
/// `interior` points drawn the same way without a zero coordinate.
struct SamplerSpec {
  std::size_t per_face = 64;
  std::size_t interior = 64;
  bool corners = true;
  std::uint64_t seed = 1;
  /// Scale of the folded normal draws.
  double scale = 1.0;
};

struct BoundarySample {
  Functional functional;
  StateVec point;
};

std::vector<StateVec> sample_cone_points(const ConeSpec& cone, const SamplerSpec& spec);
std::vector<BoundarySample> sample_boundary_pairs(const ConeSpec& cone, const SamplerSpec& spec);

enum class Condition { jump, drift, volatility };
const char* condition_name(Condition c) noexcept;

/// One sampled point where a condition fails by more than the tolerance.
struct Witness {
  Condition condition = Condition::jump;
  Functional functional;
  StateVec point;
  /// Jump atom or volatility column involved, if any.
  std::optional<std::size_t> component;
  double violation = 0.0;
};

enum class Verdict { no_violation_found, violated };
const char* verdict_name(Verdict v) noexcept;

/// Outcome of the sampled condition checks. A missing flag means the check was
/// not run. Every false flag carries at least one witness.
struct ConditionReport {
  std::optional<bool> jump_ok;
  std::optional<bool> drift_ok;
  std::optional<bool> vol_ok;
  /// Drift variants evaluated alongside the main drift condition: the local form
  /// without the semigroup term, and the generator form <h^*, A h + alpha(h)>.
  std::optional<bool> drift_local_ok;
  std::optional<bool> drift_generator_ok;
  std::vector<Witness> witnesses;
  /// Number of violations per condition (witness lists are capped).
  std::size_t jump_violations = 0;
  std::size_t drift_violations = 0;
  std::size_t vol_violations = 0;
  std::size_t sampled_points = 0;
  double tol = 0.0;

  Verdict verdict() const;
  /// Conjunction of two partial reports; witnesses re-sorted canonically.
  void merge(ConditionReport other);
};

/// Maximum witnesses kept per condition.
inline constexpr std::size_t max_witnesses_per_condition = 32;

/// 1e-9, or 1e-6 when any map comes from a user table.
double default_tolerance(const CoefficientSet& c);

ConditionReport check_jump_condition(const CoefficientSet& c, const ConeSpec& cone,
                                     const SamplerSpec& samples, double tol);
ConditionReport check_drift_condition(const CoefficientSet& c, const DiagonalSemigroup& s,
                                      const ConeSpec& cone, const SamplerSpec& samples,
                                      double tol);
ConditionReport check_volatility_condition(const CoefficientSet& c, const DiagonalSemigroup& s,
                                           const ConeSpec& cone, const SamplerSpec& samples,
                                           double tol);
/// All three checks; SATISFIED (no violation found) iff each holds on every sample.
ConditionReport invariance_verdict(const CoefficientSet& c, const DiagonalSemigroup& s,
                                   const ConeSpec& cone, const SamplerSpec& samples,
                                   std::optional<double> tol = std::nullopt);

void to_json(nlohmann::json& j, const SamplerSpec& s);
void from_json(const nlohmann::json& j, SamplerSpec& s);
void to_json(nlohmann::json& j, const Witness& w);
void to_json(nlohmann::json& j, const ConditionReport& r);

}  // namespace cone_spde
