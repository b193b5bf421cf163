#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "cone_spde/field.hpp"
#include "cone_spde/state.hpp"

namespace cone_spde {

/// One atom x_i of the finite mark measure: F({x_i}) = weight, kernel gamma(., x_i).
struct JumpAtom {
  double weight = 0.0;
  VectorField kernel;
};

/// Drift alpha, volatility columns sigma^1..sigma^J and a finite-activity jump
/// kernel over atoms of F.
class CoefficientSet {
 public:
  CoefficientSet() = default;
  CoefficientSet(VectorField drift, std::vector<VectorField> vol, std::vector<JumpAtom> jumps,
                 std::optional<double> lipschitz_hint = std::nullopt);

  static CoefficientSet zero(std::size_t dim);

  std::size_t dim() const noexcept { return drift_.dim(); }
  const VectorField& drift() const noexcept { return drift_; }
  const std::vector<VectorField>& vol() const noexcept { return vol_; }
  const std::vector<JumpAtom>& jumps() const noexcept { return jumps_; }
  const std::optional<double>& lipschitz_hint() const noexcept { return lipschitz_hint_; }

  /// Compensator sum_i w_i gamma_i(h).
  StateVec compensator(const StateVec& h) const;
  /// Hilbert-Schmidt norm sqrt(sum_j |sigma^j(h)|^2).
  double hs_norm(const StateVec& h) const;
  /// Total jump intensity sum_i w_i.
  double total_intensity() const;
  /// True if any map was built from a user table.
  bool tabulated() const;

 private:
  VectorField drift_;
  std::vector<VectorField> vol_;
  std::vector<JumpAtom> jumps_;
  std::optional<double> lipschitz_hint_;
};

/// {"drift": field, "vol": [field...], "jumps": [{"weight": w, "kernel": field}], "lipschitz_hint": L?}
/// Missing keys default to a zero drift, no columns and no jumps.
CoefficientSet coefficients_from_json(const nlohmann::json& j, std::size_t dim);
/// Throws ConfigError if some map has no serializable spec (e.g. a composition).
nlohmann::json coefficients_to_json(const CoefficientSet& c);

}  // namespace cone_spde
