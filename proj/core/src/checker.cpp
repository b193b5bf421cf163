#include "cone_spde/checker.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

#include <nlohmann/json.hpp>

#include "cone_spde/error.hpp"
#include "cone_spde/rng.hpp"

namespace cone_spde {

namespace {

StateVec folded_draw(const ConeSpec& cone, Engine& rng, double scale,
                     std::optional<std::size_t> zero_at) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> c(cone.dim());
  for (std::size_t l = 0; l < c.size(); ++l) {
    const double z = normal(rng) * scale;
    c[l] = cone.sign(l) == 0 ? z : cone.sign(l) * std::abs(z);
  }
  if (zero_at) c[*zero_at] = 0.0;
  return StateVec(std::move(c));
}

bool witness_less(const Witness& a, const Witness& b) {
  return std::tie(a.condition, a.functional, a.component, a.point.values()) <
         std::tie(b.condition, b.functional, b.component, b.point.values());
}

void add_witness(ConditionReport& r, Witness w) {
  std::size_t& count = w.condition == Condition::jump    ? r.jump_violations
                       : w.condition == Condition::drift ? r.drift_violations
                                                         : r.vol_violations;
  ++count;
  if (count <= max_witnesses_per_condition) r.witnesses.push_back(std::move(w));
}

void require_dims(const CoefficientSet& c, const ConeSpec& cone) {
  if (c.dim() != cone.dim()) throw ShapeError("checker: coefficient and cone dimensions differ");
}

void require_dims(const CoefficientSet& c, const DiagonalSemigroup& s, const ConeSpec& cone) {
  require_dims(c, cone);
  if (s.dim() != cone.dim()) throw ShapeError("checker: semigroup and cone dimensions differ");
}

void require_tol(double tol) {
  if (!(tol >= 0.0)) throw DomainError("checker: tolerance must be nonnegative");
}

/// Boundary samples, each confirmed to lie in D.
std::vector<BoundarySample> boundary_pairs_in_D(const DiagonalSemigroup& s, const ConeSpec& cone,
                                                const SamplerSpec& samples) {
  auto pairs = sample_boundary_pairs(cone, samples);
  for (const auto& p : pairs) {
    if (!boundary_set_membership(s, cone, p.functional, p.point).in_D) {
      throw InternalError("checker: sampled boundary pair is not in D");
    }
  }
  return pairs;
}

}  // namespace

std::vector<BoundarySample> sample_boundary_pairs(const ConeSpec& cone, const SamplerSpec& spec) {
  std::vector<BoundarySample> out;
  for (const auto& f : cone.generators()) {
    Engine rng = make_engine(spec.seed, 1000 + f.index);
    if (spec.corners) {
      out.push_back({f, StateVec(cone.dim())});
      for (std::size_t l = 0; l < cone.dim(); ++l) {
        if (l == f.index) continue;
        const double sgn = cone.sign(l) == 0 ? 1.0 : cone.sign(l);
        out.push_back({f, StateVec::unit(cone.dim(), l, sgn)});
      }
    }
    for (std::size_t r = 0; r < spec.per_face; ++r) {
      out.push_back({f, folded_draw(cone, rng, spec.scale, f.index)});
    }
  }
  return out;
}

std::vector<StateVec> sample_cone_points(const ConeSpec& cone, const SamplerSpec& spec) {
  std::vector<StateVec> out;
  Engine rng = make_engine(spec.seed, 0);
  for (std::size_t r = 0; r < spec.interior; ++r) {
    out.push_back(folded_draw(cone, rng, spec.scale, std::nullopt));
  }
  for (auto& b : sample_boundary_pairs(cone, spec)) out.push_back(std::move(b.point));
  for (const auto& h : out) {
    if (!cone.contains(h)) throw InternalError("sampler: produced a point outside the cone");
  }
  return out;
}

const char* condition_name(Condition c) noexcept {
  switch (c) {
    case Condition::jump:
      return "jump";
    case Condition::drift:
      return "drift";
    case Condition::volatility:
      return "volatility";
  }
  return "?";
}

const char* verdict_name(Verdict v) noexcept {
  return v == Verdict::violated ? "VIOLATED" : "NO VIOLATION FOUND";
}

Verdict ConditionReport::verdict() const {
  const bool bad = (jump_ok && !*jump_ok) || (drift_ok && !*drift_ok) || (vol_ok && !*vol_ok);
  return bad ? Verdict::violated : Verdict::no_violation_found;
}

void ConditionReport::merge(ConditionReport other) {
  auto conj = [](std::optional<bool>& a, const std::optional<bool>& b) {
    if (b) a = a ? (*a && *b) : *b;
  };
  conj(jump_ok, other.jump_ok);
  conj(drift_ok, other.drift_ok);
  conj(vol_ok, other.vol_ok);
  conj(drift_local_ok, other.drift_local_ok);
  conj(drift_generator_ok, other.drift_generator_ok);
  jump_violations += other.jump_violations;
  drift_violations += other.drift_violations;
  vol_violations += other.vol_violations;
  sampled_points += other.sampled_points;
  tol = std::max(tol, other.tol);
  for (auto& w : other.witnesses) witnesses.push_back(std::move(w));
  std::sort(witnesses.begin(), witnesses.end(), witness_less);
}

double default_tolerance(const CoefficientSet& c) { return c.tabulated() ? 1e-6 : 1e-9; }

ConditionReport check_jump_condition(const CoefficientSet& c, const ConeSpec& cone,
                                     const SamplerSpec& samples, double tol) {
  require_dims(c, cone);
  require_tol(tol);
  ConditionReport r;
  r.tol = tol;
  const auto points = sample_cone_points(cone, samples);
  r.sampled_points = points.size();
  for (const auto& h : points) {
    for (std::size_t i = 0; i < c.jumps().size(); ++i) {
      const auto& atom = c.jumps()[i];
      if (atom.weight == 0.0) continue;  // F-null atom
      const StateVec landed = h + atom.kernel(h);
      double worst = 0.0;
      Functional at{};
      for (const auto& f : cone.generators()) {
        const double deficit = -f.pair(landed);
        if (deficit > worst) {
          worst = deficit;
          at = f;
        }
      }
      if (worst > tol) add_witness(r, {Condition::jump, at, h, i, worst});
    }
  }
  r.jump_ok = r.jump_violations == 0;
  std::sort(r.witnesses.begin(), r.witnesses.end(), witness_less);
  return r;
}

ConditionReport check_drift_condition(const CoefficientSet& c, const DiagonalSemigroup& s,
                                      const ConeSpec& cone, const SamplerSpec& samples,
                                      double tol) {
  require_dims(c, s, cone);
  require_tol(tol);
  ConditionReport r;
  r.tol = tol;
  std::size_t local_bad = 0;
  std::size_t generator_bad = 0;
  const auto pairs = boundary_pairs_in_D(s, cone, samples);
  r.sampled_points = pairs.size();
  for (const auto& [f, h] : pairs) {
    const double a = boundary_set_membership(s, cone, f, h).a_value;
    const double drift = f.pair(c.drift()(h));
    const double comp = f.pair(c.compensator(h));
    const double local = drift - comp;
    const double value = a + local;
    const double generator = f.pair(s.generator(h)) + local;
    if (value < -tol) add_witness(r, {Condition::drift, f, h, std::nullopt, -value});
    if (local < -tol) ++local_bad;
    if (generator < -tol) ++generator_bad;
  }
  r.drift_ok = r.drift_violations == 0;
  r.drift_local_ok = local_bad == 0;
  r.drift_generator_ok = generator_bad == 0;
  std::sort(r.witnesses.begin(), r.witnesses.end(), witness_less);
  return r;
}

ConditionReport check_volatility_condition(const CoefficientSet& c, const DiagonalSemigroup& s,
                                           const ConeSpec& cone, const SamplerSpec& samples,
                                           double tol) {
  require_dims(c, s, cone);
  require_tol(tol);
  ConditionReport r;
  r.tol = tol;
  const auto pairs = boundary_pairs_in_D(s, cone, samples);
  r.sampled_points = pairs.size();
  for (const auto& [f, h] : pairs) {
    for (std::size_t j = 0; j < c.vol().size(); ++j) {
      const double v = std::abs(f.pair(c.vol()[j](h)));
      if (v > tol) add_witness(r, {Condition::volatility, f, h, j, v});
    }
  }
  r.vol_ok = r.vol_violations == 0;
  std::sort(r.witnesses.begin(), r.witnesses.end(), witness_less);
  return r;
}

ConditionReport invariance_verdict(const CoefficientSet& c, const DiagonalSemigroup& s,
                                   const ConeSpec& cone, const SamplerSpec& samples,
                                   std::optional<double> tol) {
  const double t = tol.value_or(default_tolerance(c));
  ConditionReport r = check_jump_condition(c, cone, samples, t);
  auto drift = check_drift_condition(c, s, cone, samples, t);
  auto vol = check_volatility_condition(c, s, cone, samples, t);
  // The boundary pairs are shared by the drift and volatility checks.
  vol.sampled_points = 0;
  r.merge(std::move(drift));
  r.merge(std::move(vol));
  return r;
}

void to_json(nlohmann::json& j, const SamplerSpec& s) {
  j = nlohmann::json{{"per_face", s.per_face},
                     {"interior", s.interior},
                     {"corners", s.corners},
                     {"seed", s.seed},
                     {"scale", s.scale}};
}

void from_json(const nlohmann::json& j, SamplerSpec& s) {
  SamplerSpec d;
  s.per_face = j.value("per_face", d.per_face);
  s.interior = j.value("interior", d.interior);
  s.corners = j.value("corners", d.corners);
  s.seed = j.value("seed", d.seed);
  s.scale = j.value("scale", d.scale);
  if (!(s.scale > 0.0)) throw ConfigError("checker: sampler scale must be positive");
}

void to_json(nlohmann::json& j, const Witness& w) {
  j = nlohmann::json{{"condition", condition_name(w.condition)},
                     {"functional", {{"theta", w.functional.theta}, {"index", w.functional.index}}},
                     {"point", w.point.values()},
                     {"violation", w.violation}};
  if (w.component) j["component"] = *w.component;
}

void to_json(nlohmann::json& j, const ConditionReport& r) {
  auto flag = [](const std::optional<bool>& b) -> nlohmann::json {
    return b ? nlohmann::json(*b) : nlohmann::json(nullptr);
  };
  j = nlohmann::json{{"verdict", verdict_name(r.verdict())},
                     {"jump_ok", flag(r.jump_ok)},
                     {"drift_ok", flag(r.drift_ok)},
                     {"vol_ok", flag(r.vol_ok)},
                     {"drift_local_ok", flag(r.drift_local_ok)},
                     {"drift_generator_ok", flag(r.drift_generator_ok)},
                     {"violations",
                      {{"jump", r.jump_violations},
                       {"drift", r.drift_violations},
                       {"volatility", r.vol_violations}}},
                     {"sampled_points", r.sampled_points},
                     {"tol", r.tol},
                     {"witnesses", r.witnesses}};
}

}  // namespace cone_spde
