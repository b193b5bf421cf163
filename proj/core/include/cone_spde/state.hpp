#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace cone_spde {

/// Element of the Galerkin space E_N: N coordinates in the orthonormal
/// coordinate basis, with the infinite tail identically zero.
///
/// Coordinates are always finite; every constructor and mutating operator
/// re-establishes that.
class StateVec {
 public:
  StateVec() = default;
  explicit StateVec(std::size_t dim, double fill = 0.0);
  explicit StateVec(std::vector<double> coords);
  StateVec(std::initializer_list<double> coords);

  static StateVec unit(std::size_t dim, std::size_t index, double scale = 1.0);

  std::size_t dim() const noexcept { return coords_.size(); }
  std::span<const double> coords() const noexcept { return coords_; }
  const std::vector<double>& values() const noexcept { return coords_; }

  double operator[](std::size_t k) const { return coords_[k]; }
  /// Checked write access; the written value must be finite.
  void set(std::size_t k, double value);

  double norm() const;
  double norm_squared() const;
  /// Squared norm of coordinates n..N-1 (zero-based), i.e. of h - project(h, n).
  double tail_norm_squared(std::size_t n) const;

  StateVec& operator+=(const StateVec& other);
  StateVec& operator-=(const StateVec& other);
  StateVec& operator*=(double scale);
  /// this += scale * other, without a temporary.
  StateVec& axpy(double scale, const StateVec& other);

  friend StateVec operator+(StateVec lhs, const StateVec& rhs) { return lhs += rhs; }
  friend StateVec operator-(StateVec lhs, const StateVec& rhs) { return lhs -= rhs; }
  friend StateVec operator*(double scale, StateVec v) { return v *= scale; }
  friend StateVec operator*(StateVec v, double scale) { return v *= scale; }
  friend bool operator==(const StateVec&, const StateVec&) = default;

 private:
  std::vector<double> coords_;
};

double distance(const StateVec& a, const StateVec& b);
void require_same_dim(const StateVec& a, const StateVec& b, const char* what);

/// Coordinate projection onto the first n basis vectors.
StateVec project(const StateVec& h, std::size_t n);

/// Metric projection onto the closed centered ball of the given radius,
/// R(h) = min(1, radius / |h|) h.
StateVec retract(const StateVec& h, double radius);

/// Basis and unconditional-basis constants of the coordinate basis.
struct BasisConstants {
  double bc = 1.0;
  double ubc = 1.0;
};

/// The coordinate basis used throughout is orthonormal, so both constants are 1.
constexpr BasisConstants coordinate_basis_constants() noexcept { return {}; }

void to_json(nlohmann::json& j, const StateVec& h);
void from_json(const nlohmann::json& j, StateVec& h);

}  // namespace cone_spde
