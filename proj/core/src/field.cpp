#include "cone_spde/field.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "cone_spde/error.hpp"

namespace cone_spde {

namespace {

using nlohmann::json;

std::vector<double> broadcast(const json& spec, const char* key, std::size_t dim,
                              double fallback) {
  if (!spec.contains(key)) return std::vector<double>(dim, fallback);
  const auto& v = spec.at(key);
  if (v.is_number()) return std::vector<double>(dim, v.get<double>());
  auto out = v.get<std::vector<double>>();
  if (out.size() != dim) {
    throw ConfigError(std::string("field: \"") + key + "\" has length " +
                      std::to_string(out.size()) + ", expected " + std::to_string(dim));
  }
  return out;
}

std::optional<std::size_t> optional_index(const json& spec, std::size_t dim) {
  if (!spec.contains("index")) return std::nullopt;
  const auto k = spec.at("index").get<std::size_t>();
  if (k >= dim) throw ConfigError("field: \"index\" out of range");
  return k;
}

double interpolate(const std::vector<double>& knots, const std::vector<double>& values,
                   double x) {
  if (x <= knots.front()) return values.front();
  if (x >= knots.back()) return values.back();
  const auto it = std::upper_bound(knots.begin(), knots.end(), x);
  const auto i = static_cast<std::size_t>(it - knots.begin());
  const double w = (x - knots[i - 1]) / (knots[i] - knots[i - 1]);
  return (1.0 - w) * values[i - 1] + w * values[i];
}

}  // namespace

VectorField::VectorField(std::size_t dim, Fn fn, std::optional<json> spec, bool tabulated)
    : dim_(dim), fn_(std::move(fn)), spec_(std::move(spec)), tabulated_(tabulated) {
  if (!fn_) throw ConfigError("field: empty function");
}

VectorField VectorField::zero(std::size_t dim) {
  return VectorField(dim, [dim](const StateVec&) { return StateVec(dim); },
                     json{{"family", "zero"}});
}

StateVec VectorField::operator()(const StateVec& h) const {
  if (h.dim() != dim_) {
    throw ShapeError("field: argument has dim " + std::to_string(h.dim()) + ", expected " +
                     std::to_string(dim_));
  }
  StateVec out = fn_(h);
  if (out.dim() != dim_) throw ShapeError("field: map returned a vector of wrong dimension");
  return out;
}

VectorField VectorField::from_spec(const json& spec, std::size_t dim) {
  if (!spec.is_object() || !spec.contains("family")) {
    throw ConfigError("field: expected an object with a \"family\" key");
  }
  const auto family = spec.at("family").get<std::string>();

  if (family == "zero") return zero(dim);

  if (family == "constant") {
    std::vector<double> value;
    if (auto k = optional_index(spec, dim)) {
      value.assign(dim, 0.0);
      value[*k] = spec.at("value").get<double>();
    } else {
      value = broadcast(spec, "value", dim, 0.0);
    }
    StateVec v(std::move(value));
    return VectorField(dim, [v](const StateVec&) { return v; }, std::optional<json>(spec));
  }

  if (family == "affine") {
    auto diag = broadcast(spec, "diag", dim, 0.0);
    auto offset = broadcast(spec, "offset", dim, 0.0);
    return VectorField(
        dim,
        [diag, offset](const StateVec& h) {
          std::vector<double> c(h.dim());
          for (std::size_t k = 0; k < c.size(); ++k) c[k] = diag[k] * h[k] + offset[k];
          return StateVec(std::move(c));
        },
        std::optional<json>(spec));
  }

  if (family == "mean_reversion") {
    const double kappa = spec.value("kappa", 1.0);
    if (kappa < 0.0) throw ConfigError("field: mean_reversion needs kappa >= 0");
    auto b = broadcast(spec, "b", dim, 0.0);
    return VectorField(
        dim,
        [kappa, b](const StateVec& h) {
          std::vector<double> c(h.dim());
          for (std::size_t k = 0; k < c.size(); ++k) c[k] = kappa * (b[k] - h[k]);
          return StateVec(std::move(c));
        },
        std::optional<json>(spec));
  }

  if (family == "proportional") {
    const double scale = spec.value("scale", 1.0);
    const auto index = optional_index(spec, dim);
    return VectorField(
        dim,
        [scale, index](const StateVec& h) {
          if (index) return StateVec::unit(h.dim(), *index, scale * h[*index]);
          return scale * h;
        },
        std::optional<json>(spec));
  }

  if (family == "table") {
    auto knots = spec.at("knots").get<std::vector<double>>();
    auto values = spec.at("values").get<std::vector<double>>();
    if (knots.size() < 2 || knots.size() != values.size() ||
        !std::is_sorted(knots.begin(), knots.end()) ||
        std::adjacent_find(knots.begin(), knots.end()) != knots.end()) {
      throw ConfigError("field: table needs >= 2 strictly increasing knots and matching values");
    }
    const auto index = optional_index(spec, dim);
    return VectorField(
        dim,
        [knots, values, index](const StateVec& h) {
          std::vector<double> c(h.dim(), 0.0);
          for (std::size_t k = 0; k < c.size(); ++k) {
            if (!index || *index == k) c[k] = interpolate(knots, values, h[k]);
          }
          return StateVec(std::move(c));
        },
        std::optional<json>(spec), /*tabulated=*/true);
  }

  if (family == "step") {
    const auto index = spec.at("index").get<std::size_t>();
    const auto gate = spec.at("gate").get<std::size_t>();
    if (index >= dim || gate >= dim) throw ConfigError("field: step index/gate out of range");
    const double threshold = spec.at("threshold").get<double>();
    const double below = spec.value("below", 0.0);
    const double above = spec.value("above", 0.0);
    return VectorField(
        dim,
        [=](const StateVec& h) {
          return StateVec::unit(h.dim(), index, h[gate] > threshold ? above : below);
        },
        std::optional<json>(spec));
  }

  if (family == "sum") {
    std::vector<VectorField> terms;
    bool tab = false;
    for (const auto& t : spec.at("terms")) {
      terms.push_back(from_spec(t, dim));
      tab = tab || terms.back().tabulated();
    }
    return VectorField(
        dim,
        [terms](const StateVec& h) {
          StateVec out(h.dim());
          for (const auto& t : terms) out += t(h);
          return out;
        },
        std::optional<json>(spec), tab);
  }

  throw ConfigError("field: unknown family \"" + family + "\"");
}

}  // namespace cone_spde
