#include "cone_spde/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "cone_spde/error.hpp"

namespace cone_spde {

DiagonalSemigroup::DiagonalSemigroup(std::vector<double> rates) : rates_(std::move(rates)) {
  double min_rate = 0.0;
  for (double c : rates_) {
    if (!std::isfinite(c)) throw ConfigError("semigroup: rates must be finite");
    min_rate = std::min(min_rate, c);
  }
  beta_ = -min_rate;
}

DiagonalSemigroup DiagonalSemigroup::heat(std::size_t dim) {
  std::vector<double> rates(dim);
  for (std::size_t k = 0; k < dim; ++k) rates[k] = static_cast<double>(k + 1);
  return DiagonalSemigroup(std::move(rates));
}

void DiagonalSemigroup::require_dim(const StateVec& h) const {
  if (h.dim() != dim()) {
    throw ShapeError("semigroup: state has dim " + std::to_string(h.dim()) +
                     ", semigroup has dim " + std::to_string(dim()));
  }
}

std::vector<double> DiagonalSemigroup::multipliers(double t) const {
  if (!(t >= 0.0)) throw DomainError("semigroup: t must be nonnegative");
  std::vector<double> m(rates_.size());
  for (std::size_t k = 0; k < rates_.size(); ++k) m[k] = std::exp(-rates_[k] * t);
  return m;
}

StateVec DiagonalSemigroup::apply(double t, const StateVec& h) const {
  require_dim(h);
  if (t == 0.0) return h;
  const auto m = multipliers(t);
  std::vector<double> c(h.values());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= m[k];
  return StateVec(std::move(c));
}

StateVec DiagonalSemigroup::resolvent(double lambda, const StateVec& h) const {
  require_dim(h);
  if (!(lambda > beta_)) {
    throw DomainError("resolvent: lambda must exceed the growth bound beta = " +
                      std::to_string(beta_));
  }
  std::vector<double> c(h.values());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] /= (lambda + rates_[k]);
  return StateVec(std::move(c));
}

StateVec DiagonalSemigroup::generator(const StateVec& h) const {
  require_dim(h);
  std::vector<double> c(h.values());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= -rates_[k];
  return StateVec(std::move(c));
}

double DiagonalSemigroup::operator_norm(double t) const {
  double n = 0.0;
  for (double m : multipliers(t)) n = std::max(n, m);
  return n;
}

StateVec apply(const DiagonalSemigroup& s, double t, const StateVec& h) { return s.apply(t, h); }

StateVec resolvent(const DiagonalSemigroup& s, double lambda, const StateVec& h) {
  return s.resolvent(lambda, h);
}

bool semigroup_preserves_cone(const DiagonalSemigroup& s, const ConeSpec& cone) {
  if (s.dim() != cone.dim()) throw ShapeError("semigroup_preserves_cone: dimension mismatch");
  // A diagonal operator maps the coordinate cone into itself iff each
  // constrained coordinate is scaled by a nonnegative factor.
  for (double t = 1e-6; t <= 100.0; t *= 10.0) {
    const auto m = s.multipliers(t);
    for (std::size_t k = 0; k < cone.dim(); ++k) {
      if (cone.sign(k) != 0 && !(m[k] >= 0.0)) return false;
    }
  }
  return true;
}

std::vector<double> LiminfGrid::times() const {
  validate();
  std::vector<double> t(points);
  double v = t0;
  for (std::size_t m = 0; m < points; ++m, v *= ratio) t[m] = v;
  return t;
}

void LiminfGrid::validate() const {
  if (!(t0 > 0.0) || !(ratio > 0.0 && ratio < 1.0) || points < 2) {
    throw ConfigError("liminf grid: need t0 > 0, 0 < ratio < 1 and at least 2 points");
  }
}

BoundaryMembership boundary_set_membership(const DiagonalSemigroup& s, const ConeSpec& cone,
                                           const Functional& functional, const StateVec& h,
                                           const LiminfGrid& grid) {
  if (s.dim() != cone.dim()) throw ShapeError("boundary_set_membership: dimension mismatch");
  if (!cone.is_generator(functional)) {
    throw ConfigError("boundary_set_membership: functional (" + std::to_string(functional.theta) +
                      ", " + std::to_string(functional.index) + ") is not in G*");
  }
  if (!cone.contains(h)) throw DomainError("boundary_set_membership: h is not in the cone");

  const std::size_t k = functional.index;
  const double pairing = functional.pair(h);
  BoundaryMembership out;
  out.in_D = pairing == 0.0;
  out.a_value = out.in_D ? 0.0 : std::numeric_limits<double>::infinity();

  const auto times = grid.times();
  double running_min = std::numeric_limits<double>::infinity();
  double prev = 0.0;
  double last = 0.0;
  for (std::size_t m = 0; m < times.size(); ++m) {
    const double t = times[m];
    const double q = pairing * std::exp(-s.rates()[k] * t) / t;
    running_min = std::min(running_min, q);
    prev = last;
    last = q;
  }
  out.grid_estimate = running_min;
  out.grid_tail = last;
  out.grid_infinite = last > grid.infinite_threshold && last > prev;
  return out;
}

void to_json(nlohmann::json& j, const DiagonalSemigroup& s) {
  j = nlohmann::json{{"rates", s.rates()}};
}

void from_json(const nlohmann::json& j, DiagonalSemigroup& s) {
  if (!j.is_object() || !j.contains("rates")) {
    throw ConfigError("semigroup: expected an object with \"rates\"");
  }
  const auto& r = j.at("rates");
  if (r.is_string()) {
    if (r.get<std::string>() != "heat") {
      throw ConfigError("semigroup: unknown rate family \"" + r.get<std::string>() + "\"");
    }
    if (!j.contains("dim")) throw ConfigError("semigroup: \"heat\" rates need \"dim\"");
    s = DiagonalSemigroup::heat(j.at("dim").get<std::size_t>());
    return;
  }
  s = DiagonalSemigroup(r.get<std::vector<double>>());
}

}  // namespace cone_spde
