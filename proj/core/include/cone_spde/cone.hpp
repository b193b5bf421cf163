#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cone_spde/state.hpp"

namespace cone_spde {

/// A generating functional theta * e_k^* of a coordinate cone.
struct Functional {
  int theta = 1;        // +1 or -1
  std::size_t index = 0;  // zero-based coordinate

  double pair(const StateVec& h) const { return theta * h[index]; }
  friend auto operator<=>(const Functional&, const Functional&) = default;
};

/// Closed convex cone cut out by sign constraints on individual coordinates:
/// K = { h : theta_k h_k >= 0 for every constrained k }.
/// A sign of 0 leaves the coordinate free.
class ConeSpec {
 public:
  ConeSpec() = default;
  explicit ConeSpec(std::vector<int> signs);

  static ConeSpec nonnegative(std::size_t dim);
  static ConeSpec unconstrained(std::size_t dim);

  std::size_t dim() const noexcept { return signs_.size(); }
  int sign(std::size_t k) const { return signs_[k]; }
  const std::vector<int>& signs() const noexcept { return signs_; }

  /// The generating system G^*, ordered by coordinate.
  std::vector<Functional> generators() const;
  bool is_generator(const Functional& f) const;

  bool contains(const StateVec& h, double tol = 0.0) const;
  /// Euclidean distance to the cone: norm of the violating coordinates.
  double distance(const StateVec& h) const;
  /// Metric projection onto the cone (violating coordinates clipped to zero).
  StateVec clip(const StateVec& h) const;
  /// Smallest signed margin theta_k h_k over constrained k (+inf if none).
  double min_margin(const StateVec& h) const;

  friend bool operator==(const ConeSpec&, const ConeSpec&) = default;

 private:
  void require_dim(const StateVec& h) const;
  std::vector<int> signs_;
};

bool cone_contains(const ConeSpec& cone, const StateVec& h, double tol = 0.0);
double cone_distance(const ConeSpec& cone, const StateVec& h);
/// g <=_K h iff h - g lies in K.
bool cone_leq(const ConeSpec& cone, const StateVec& g, const StateVec& h);

void to_json(nlohmann::json& j, const ConeSpec& cone);
void from_json(const nlohmann::json& j, ConeSpec& cone);

}  // namespace cone_spde
