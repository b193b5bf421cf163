#include "cone_spde/state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "cone_spde/error.hpp"

namespace cone_spde {

namespace {

void require_finite(double v, std::size_t k) {
  if (!std::isfinite(v)) {
    throw NumericError("StateVec: coordinate " + std::to_string(k) + " is not finite");
  }
}

void require_finite(const std::vector<double>& coords) {
  for (std::size_t k = 0; k < coords.size(); ++k) require_finite(coords[k], k);
}

}  // namespace

StateVec::StateVec(std::size_t dim, double fill) : coords_(dim, fill) {
  if (dim > 0) require_finite(fill, 0);
}

StateVec::StateVec(std::vector<double> coords) : coords_(std::move(coords)) {
  require_finite(coords_);
}

StateVec::StateVec(std::initializer_list<double> coords) : coords_(coords) {
  require_finite(coords_);
}

StateVec StateVec::unit(std::size_t dim, std::size_t index, double scale) {
  if (index >= dim) throw RangeError("StateVec::unit: index out of range");
  StateVec e(dim);
  e.set(index, scale);
  return e;
}

void StateVec::set(std::size_t k, double value) {
  if (k >= coords_.size()) throw RangeError("StateVec::set: index out of range");
  require_finite(value, k);
  coords_[k] = value;
}

double StateVec::norm_squared() const {
  double s = 0.0;
  for (double c : coords_) s += c * c;
  return s;
}

double StateVec::norm() const { return std::sqrt(norm_squared()); }

double StateVec::tail_norm_squared(std::size_t n) const {
  double s = 0.0;
  for (std::size_t k = n; k < coords_.size(); ++k) s += coords_[k] * coords_[k];
  return s;
}

StateVec& StateVec::operator+=(const StateVec& other) {
  require_same_dim(*this, other, "StateVec::operator+=");
  auto next = coords_;
  for (std::size_t k = 0; k < next.size(); ++k) next[k] += other.coords_[k];
  require_finite(next);
  coords_.swap(next);
  return *this;
}

StateVec& StateVec::operator-=(const StateVec& other) {
  require_same_dim(*this, other, "StateVec::operator-=");
  auto next = coords_;
  for (std::size_t k = 0; k < next.size(); ++k) next[k] -= other.coords_[k];
  require_finite(next);
  coords_.swap(next);
  return *this;
}

StateVec& StateVec::operator*=(double scale) {
  auto next = coords_;
  for (double& c : next) c *= scale;
  require_finite(next);
  coords_.swap(next);
  return *this;
}

StateVec& StateVec::axpy(double scale, const StateVec& other) {
  require_same_dim(*this, other, "StateVec::axpy");
  auto next = coords_;
  for (std::size_t k = 0; k < next.size(); ++k) next[k] += scale * other.coords_[k];
  require_finite(next);
  coords_.swap(next);
  return *this;
}

void require_same_dim(const StateVec& a, const StateVec& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw ShapeError(std::string(what) + ": dimension mismatch (" + std::to_string(a.dim()) +
                     " vs " + std::to_string(b.dim()) + ")");
  }
}

double distance(const StateVec& a, const StateVec& b) {
  require_same_dim(a, b, "distance");
  double s = 0.0;
  for (std::size_t k = 0; k < a.dim(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

StateVec project(const StateVec& h, std::size_t n) {
  if (n > h.dim()) {
    throw RangeError("project: n = " + std::to_string(n) + " exceeds dim " +
                     std::to_string(h.dim()));
  }
  std::vector<double> c(h.values());
  std::fill(c.begin() + static_cast<std::ptrdiff_t>(n), c.end(), 0.0);
  return StateVec(std::move(c));
}

StateVec retract(const StateVec& h, double radius) {
  if (!(radius > 0.0)) throw DomainError("retract: radius must be positive");
  const double nrm = h.norm();
  if (nrm <= radius) return h;
  return (radius / nrm) * h;
}

void to_json(nlohmann::json& j, const StateVec& h) {
  j = nlohmann::json{{"dim", h.dim()}, {"coords", h.values()}};
}

void from_json(const nlohmann::json& j, StateVec& h) {
  if (!j.is_object() || !j.contains("coords")) {
    throw ConfigError("state: expected an object with a \"coords\" array");
  }
  auto coords = j.at("coords").get<std::vector<double>>();
  if (j.contains("dim") && j.at("dim").get<std::size_t>() != coords.size()) {
    throw ConfigError("state: \"dim\" does not match the length of \"coords\"");
  }
  h = StateVec(std::move(coords));
}

}  // namespace cone_spde
