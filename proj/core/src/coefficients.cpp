#include "cone_spde/coefficients.hpp"

#include <cmath>
#include <string>

#include "cone_spde/error.hpp"

namespace cone_spde {

CoefficientSet::CoefficientSet(VectorField drift, std::vector<VectorField> vol,
                               std::vector<JumpAtom> jumps, std::optional<double> lipschitz_hint)
    : drift_(std::move(drift)),
      vol_(std::move(vol)),
      jumps_(std::move(jumps)),
      lipschitz_hint_(lipschitz_hint) {
  const auto n = drift_.dim();
  for (const auto& v : vol_) {
    if (v.dim() != n) throw ShapeError("coefficients: volatility column dimension mismatch");
  }
  for (const auto& a : jumps_) {
    if (a.kernel.dim() != n) throw ShapeError("coefficients: jump kernel dimension mismatch");
    if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) {
      throw ConfigError("coefficients: jump weights must be finite and nonnegative");
    }
  }
  if (lipschitz_hint_ && !(*lipschitz_hint_ >= 0.0)) {
    throw ConfigError("coefficients: lipschitz_hint must be nonnegative");
  }
}

CoefficientSet CoefficientSet::zero(std::size_t dim) {
  return CoefficientSet(VectorField::zero(dim), {}, {});
}

StateVec CoefficientSet::compensator(const StateVec& h) const {
  StateVec out(dim());
  for (const auto& a : jumps_) {
    if (a.weight != 0.0) out.axpy(a.weight, a.kernel(h));
  }
  return out;
}

double CoefficientSet::hs_norm(const StateVec& h) const {
  double s = 0.0;
  for (const auto& v : vol_) s += v(h).norm_squared();
  return std::sqrt(s);
}

double CoefficientSet::total_intensity() const {
  double s = 0.0;
  for (const auto& a : jumps_) s += a.weight;
  return s;
}

bool CoefficientSet::tabulated() const {
  if (drift_.tabulated()) return true;
  for (const auto& v : vol_) {
    if (v.tabulated()) return true;
  }
  for (const auto& a : jumps_) {
    if (a.kernel.tabulated()) return true;
  }
  return false;
}

CoefficientSet coefficients_from_json(const nlohmann::json& j, std::size_t dim) {
  if (!j.is_object()) throw ConfigError("coefficients: expected an object");
  VectorField drift =
      j.contains("drift") ? VectorField::from_spec(j.at("drift"), dim) : VectorField::zero(dim);
  std::vector<VectorField> vol;
  if (j.contains("vol")) {
    for (const auto& v : j.at("vol")) vol.push_back(VectorField::from_spec(v, dim));
  }
  std::vector<JumpAtom> jumps;
  if (j.contains("jumps")) {
    for (const auto& a : j.at("jumps")) {
      if (!a.contains("weight") || !a.contains("kernel")) {
        throw ConfigError("coefficients: each jump needs \"weight\" and \"kernel\"");
      }
      jumps.push_back({a.at("weight").get<double>(), VectorField::from_spec(a.at("kernel"), dim)});
    }
  }
  std::optional<double> hint;
  if (j.contains("lipschitz_hint")) hint = j.at("lipschitz_hint").get<double>();
  return CoefficientSet(std::move(drift), std::move(vol), std::move(jumps), hint);
}

nlohmann::json coefficients_to_json(const CoefficientSet& c) {
  auto spec_of = [](const VectorField& f, const char* what) {
    if (!f.spec()) throw ConfigError(std::string("coefficients: ") + what + " has no spec");
    return *f.spec();
  };
  nlohmann::json j;
  j["drift"] = spec_of(c.drift(), "drift");
  j["vol"] = nlohmann::json::array();
  for (const auto& v : c.vol()) j["vol"].push_back(spec_of(v, "volatility column"));
  j["jumps"] = nlohmann::json::array();
  for (const auto& a : c.jumps()) {
    j["jumps"].push_back({{"weight", a.weight}, {"kernel", spec_of(a.kernel, "jump kernel")}});
  }
  if (c.lipschitz_hint()) j["lipschitz_hint"] = *c.lipschitz_hint();
  return j;
}

}  // namespace cone_spde
