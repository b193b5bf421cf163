#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include <nlohmann/json.hpp>

#include "cone_spde/state.hpp"

namespace cone_spde {

/// Real-valued function on E_N.
using ScalarField = std::function<double(const StateVec&)>;

/// Map E_N -> E_N used for drifts, volatility columns and jump kernels.
///
/// Fields built from a JSON family carry their spec so they can be written
/// back out; fields built by composition (projection, retraction, ...) do not.
///
/// Families (all indices zero-based):
///   {"family": "zero"}
///   {"family": "constant", "value": v | [..], "index": k?}
///   {"family": "affine", "diag": d | [..], "offset": o | [..]}     f_k = d_k h_k + o_k
///   {"family": "mean_reversion", "kappa": K, "b": b | [..]}        f = K (b - h)
///   {"family": "proportional", "scale": s, "index": k?}           f = s h, or s h_k e_k
///   {"family": "table", "knots": [..], "values": [..], "index": k?}
///       piecewise-linear g applied coordinatewise, flat outside the knots
///   {"family": "step", "index": k, "gate": g, "threshold": x, "below": a, "above": b}
///       f_k = (h_g > x ? b : a), other coordinates zero
///   {"family": "sum", "terms": [..]}
class VectorField {
 public:
  using Fn = std::function<StateVec(const StateVec&)>;

  VectorField() = default;
  VectorField(std::size_t dim, Fn fn, std::optional<nlohmann::json> spec = std::nullopt,
              bool tabulated = false);

  static VectorField zero(std::size_t dim);
  static VectorField from_spec(const nlohmann::json& spec, std::size_t dim);

  /// Evaluates the map; the argument and result must both have dimension dim().
  StateVec operator()(const StateVec& h) const;

  std::size_t dim() const noexcept { return dim_; }
  const std::optional<nlohmann::json>& spec() const noexcept { return spec_; }
  /// True when built from user tables (looser default checker tolerance).
  bool tabulated() const noexcept { return tabulated_; }

 private:
  std::size_t dim_ = 0;
  Fn fn_;
  std::optional<nlohmann::json> spec_;
  bool tabulated_ = false;
};

}  // namespace cone_spde
