#pragma once

#include <cstddef>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cone_spde/cone.hpp"
#include "cone_spde/state.hpp"

namespace cone_spde {

/// Diagonal C0-semigroup S_t h = (exp(-c_k t) h_k)_k on E_N.
///
/// The generator is A h = (-c_k h_k)_k. The growth bound beta = max(0, -min c_k)
/// gives |S_t| <= exp(beta t).
class DiagonalSemigroup {
 public:
  DiagonalSemigroup() = default;
  explicit DiagonalSemigroup(std::vector<double> rates);

  /// c_k = k (one-based), the heat-type example on l^2.
  static DiagonalSemigroup heat(std::size_t dim);

  std::size_t dim() const noexcept { return rates_.size(); }
  const std::vector<double>& rates() const noexcept { return rates_; }
  double beta() const noexcept { return beta_; }

  /// Diagonal factors exp(-c_k t).
  std::vector<double> multipliers(double t) const;
  StateVec apply(double t, const StateVec& h) const;
  /// (lambda - A)^{-1} h, coordinatewise h_k / (lambda + c_k).
  StateVec resolvent(double lambda, const StateVec& h) const;
  StateVec generator(const StateVec& h) const;
  /// max_k exp(-c_k t).
  double operator_norm(double t) const;

  friend bool operator==(const DiagonalSemigroup&, const DiagonalSemigroup&) = default;

 private:
  void require_dim(const StateVec& h) const;
  std::vector<double> rates_;
  double beta_ = 0.0;
};

StateVec apply(const DiagonalSemigroup& s, double t, const StateVec& h);
StateVec resolvent(const DiagonalSemigroup& s, double lambda, const StateVec& h);

/// Explicit check that every multiplier is positive, so each coordinate sign
/// is kept; the probe times are a geometric set in (0, 100].
bool semigroup_preserves_cone(const DiagonalSemigroup& s, const ConeSpec& cone);

/// Geometric grid t_m = t0 * ratio^m, m = 0..points-1, used to estimate
/// liminf_{t -> 0} quantities.
struct LiminfGrid {
  double t0 = 1e-1;
  double ratio = 0.5;
  std::size_t points = 40;
  /// A tail value above this threshold that is still increasing is read as +inf.
  double infinite_threshold = 1e6;

  std::vector<double> times() const;
  void validate() const;
};

/// Membership of a boundary pair (h^*, h) in D and the value a(h^*, h).
struct BoundaryMembership {
  bool in_D = false;
  /// liminf <h^*, S_t h> / t from the analytic rule; +inf when not in D.
  double a_value = 0.0;
  /// min over the grid of theta e^{-c_k t} h_k / t.
  double grid_estimate = 0.0;
  /// Quotient at the smallest grid time.
  double grid_tail = 0.0;
  /// The grid independently reads the liminf as infinite.
  bool grid_infinite = false;
};

/// For diagonal semigroups (h^*, h) is in D iff theta h_k = 0, and then a = 0.
/// Throws ConfigError if the functional is not a generator of the cone and
/// DomainError if h is not in the cone.
BoundaryMembership boundary_set_membership(const DiagonalSemigroup& s, const ConeSpec& cone,
                                           const Functional& functional, const StateVec& h,
                                           const LiminfGrid& grid = {});

void to_json(nlohmann::json& j, const DiagonalSemigroup& s);
/// Accepts {"rates": [...]} or {"rates": "heat", "dim": N}.
void from_json(const nlohmann::json& j, DiagonalSemigroup& s);

}  // namespace cone_spde
