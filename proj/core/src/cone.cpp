#include "cone_spde/cone.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "cone_spde/error.hpp"

namespace cone_spde {

ConeSpec::ConeSpec(std::vector<int> signs) : signs_(std::move(signs)) {
  for (int s : signs_) {
    if (s != -1 && s != 0 && s != 1) throw ConfigError("cone: signs must be -1, 0 or +1");
  }
}

ConeSpec ConeSpec::nonnegative(std::size_t dim) { return ConeSpec(std::vector<int>(dim, 1)); }

ConeSpec ConeSpec::unconstrained(std::size_t dim) { return ConeSpec(std::vector<int>(dim, 0)); }

std::vector<Functional> ConeSpec::generators() const {
  std::vector<Functional> out;
  for (std::size_t k = 0; k < signs_.size(); ++k) {
    if (signs_[k] != 0) out.push_back({signs_[k], k});
  }
  return out;
}

bool ConeSpec::is_generator(const Functional& f) const {
  return f.index < signs_.size() && signs_[f.index] != 0 && signs_[f.index] == f.theta;
}

void ConeSpec::require_dim(const StateVec& h) const {
  if (h.dim() != dim()) {
    throw ShapeError("cone: state has dim " + std::to_string(h.dim()) + ", cone has dim " +
                     std::to_string(dim()));
  }
}

bool ConeSpec::contains(const StateVec& h, double tol) const {
  require_dim(h);
  for (std::size_t k = 0; k < signs_.size(); ++k) {
    if (signs_[k] != 0 && signs_[k] * h[k] < -tol) return false;
  }
  return true;
}

double ConeSpec::distance(const StateVec& h) const {
  require_dim(h);
  double s = 0.0;
  for (std::size_t k = 0; k < signs_.size(); ++k) {
    if (signs_[k] != 0 && signs_[k] * h[k] < 0.0) s += h[k] * h[k];
  }
  return std::sqrt(s);
}

StateVec ConeSpec::clip(const StateVec& h) const {
  require_dim(h);
  std::vector<double> c(h.values());
  for (std::size_t k = 0; k < signs_.size(); ++k) {
    if (signs_[k] != 0 && signs_[k] * c[k] < 0.0) c[k] = 0.0;
  }
  return StateVec(std::move(c));
}

double ConeSpec::min_margin(const StateVec& h) const {
  require_dim(h);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < signs_.size(); ++k) {
    if (signs_[k] != 0) m = std::min(m, signs_[k] * h[k]);
  }
  return m;
}

bool cone_contains(const ConeSpec& cone, const StateVec& h, double tol) {
  if (tol < 0.0) throw DomainError("cone_contains: tol must be nonnegative");
  return cone.contains(h, tol);
}

double cone_distance(const ConeSpec& cone, const StateVec& h) { return cone.distance(h); }

bool cone_leq(const ConeSpec& cone, const StateVec& g, const StateVec& h) {
  require_same_dim(g, h, "cone_leq");
  return cone.contains(h - g, 0.0);
}

void to_json(nlohmann::json& j, const ConeSpec& cone) {
  j = nlohmann::json{{"signs", cone.signs()}};
}

void from_json(const nlohmann::json& j, ConeSpec& cone) {
  if (!j.is_object() || !j.contains("signs")) {
    throw ConfigError("cone: expected an object with a \"signs\" array");
  }
  cone = ConeSpec(j.at("signs").get<std::vector<int>>());
}

}  // namespace cone_spde
