#include "cone_spde/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "cone_spde/error.hpp"

namespace cone_spde {

VectorField compose_projection(const VectorField& f, std::size_t n) {
  if (n > f.dim()) {
    throw RangeError("compose_projection: n = " + std::to_string(n) + " exceeds dim " +
                     std::to_string(f.dim()));
  }
  return VectorField(f.dim(), [f, n](const StateVec& h) { return project(f(h), n); });
}

VectorField compose_retraction(const VectorField& f, double radius) {
  if (!(radius > 0.0)) throw DomainError("compose_retraction: radius must be positive");
  return VectorField(f.dim(), [f, radius](const StateVec& h) { return f(retract(h, radius)); },
                     std::nullopt, f.tabulated());
}

CoefficientSet compose_retraction(const CoefficientSet& c, double radius) {
  std::vector<VectorField> vol;
  for (const auto& v : c.vol()) vol.push_back(compose_retraction(v, radius));
  std::vector<JumpAtom> jumps;
  for (const auto& a : c.jumps()) jumps.push_back({a.weight, compose_retraction(a.kernel, radius)});
  return CoefficientSet(compose_retraction(c.drift(), radius), std::move(vol), std::move(jumps),
                        c.lipschitz_hint());
}

CoefficientSet truncate_noise(const CoefficientSet& c, std::size_t n) {
  if (n > c.vol().size()) {
    throw RangeError("truncate_noise: n = " + std::to_string(n) + " exceeds the " +
                     std::to_string(c.vol().size()) + " volatility columns");
  }
  std::vector<VectorField> vol;
  for (std::size_t j = 0; j < c.vol().size(); ++j) {
    vol.push_back(j < n ? c.vol()[j] : VectorField::zero(c.dim()));
  }
  return CoefficientSet(c.drift(), std::move(vol), c.jumps(), c.lipschitz_hint());
}

// ---------------------------------------------------------------------------

PhiEps::PhiEps(double eps) : eps_(eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("phi_eps: eps must be positive");
}

double PhiEps::operator()(double x) const noexcept {
  if (x <= -eps_) return x + eps_;
  if (x >= eps_) return x - eps_;
  return 0.0;
}

double phi_eps(const PhiEps& p, double x) { return p(x); }

double dyadic_eps(std::size_t n) { return std::ldexp(1.0, -static_cast<int>(n)); }

StateVec boundary_shift(std::size_t n, const EpsRule& eps_rule, const StateVec& h) {
  if (n > h.dim()) throw RangeError("boundary_shift: n exceeds the dimension");
  const PhiEps phi(eps_rule(n));
  std::vector<double> c(h.dim(), 0.0);
  for (std::size_t k = 0; k < n; ++k) c[k] = phi(h[k]);
  return StateVec(std::move(c));
}

VectorField compose_boundary_shift(const VectorField& f, std::size_t n, const EpsRule& eps_rule) {
  if (n > f.dim()) throw RangeError("compose_boundary_shift: n exceeds the dimension");
  return VectorField(f.dim(), [f, n, eps_rule](const StateVec& h) {
    return f(boundary_shift(n, eps_rule, h));
  });
}

double boundary_shift_lipschitz(const BasisConstants& basis) { return 2.0 * basis.ubc; }

// ---------------------------------------------------------------------------

void SupInfParams::validate() const {
  if (!(lambda > 0.0) || !(mu > 0.0) || !(mu < lambda)) {
    throw DomainError("sup-inf convolution: need 0 < mu < lambda");
  }
}

double SearchSpec::radius_for(double scale) const {
  if (radius) {
    if (!(*radius > 0.0)) throw ConfigError("search: radius must be positive");
    return *radius;
  }
  if (!lipschitz || !sup_bound) {
    throw ConfigError("search: give either a radius or both lipschitz and sup_bound");
  }
  const double L = *lipschitz;
  const double S = *sup_bound;
  const double effective = scale * L + std::sqrt(2.0 * scale * S);
  const double a_priori = std::min(2.0 * scale * L, 2.0 * std::sqrt(scale * S));
  return std::max(padding * std::max(effective, a_priori), 1e-8);
}

namespace {

struct LineMin {
  double arg;
  double value;
  bool at_boundary;
};

/// Golden-section search for a minimum of obj on [a, b].
template <class Objective>
LineMin golden_section(const Objective& obj, double a, double b, std::size_t iterations) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = obj(x1);
  double f2 = obj(x2);
  for (std::size_t it = 0; it < iterations && b - a > 0.0; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = obj(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = obj(x2);
    }
  }
  return f1 <= f2 ? LineMin{x1, f1, false} : LineMin{x2, f2, false};
}

/// Coarse grid over [lo, hi], then golden section around every discrete local
/// minimum of the grid, so near-tied basins are all refined.
template <class Objective>
LineMin line_minimize(const Objective& obj, double lo, double hi, const SearchSpec& s) {
  const std::size_t m = std::max<std::size_t>(s.grid_points, 4);
  const double step = (hi - lo) / static_cast<double>(m);
  std::vector<double> values(m + 1);
  for (std::size_t i = 0; i <= m; ++i) values[i] = obj(lo + step * static_cast<double>(i));

  LineMin out{lo, std::numeric_limits<double>::infinity(), false};
  for (std::size_t i = 0; i <= m; ++i) {
    if (values[i] < out.value) out = {lo + step * static_cast<double>(i), values[i], false};
  }
  for (std::size_t i = 0; i <= m; ++i) {
    const bool left = i == 0 || values[i] <= values[i - 1];
    const bool right = i == m || values[i] <= values[i + 1];
    if (!left || !right) continue;
    const double a = lo + step * static_cast<double>(i == 0 ? 0 : i - 1);
    const double b = lo + step * static_cast<double>(std::min(i + 1, m));
    const auto r = golden_section(obj, a, b, s.golden_iterations);
    if (r.value < out.value) out = r;
  }
  const double edge = step * 1e-3;
  out.at_boundary = (out.arg - lo) < edge || (hi - out.arg) < edge;
  return out;
}

/// Coordinate-wise minimization of obj over the box of half-width radius
/// centred at `center`.
template <class Objective>
double box_minimize(const Objective& obj, const StateVec& center, double radius,
                    const SearchSpec& s, const char* what) {
  std::vector<double> g(center.values());
  double current = obj(StateVec(g));
  const std::size_t sweeps = center.dim() == 1 ? 1 : std::max<std::size_t>(s.sweeps, 1);
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    const double before = current;
    for (std::size_t k = 0; k < center.dim(); ++k) {
      auto along = [&](double t) {
        std::vector<double> trial(g);
        trial[k] = t;
        return obj(StateVec(std::move(trial)));
      };
      const auto r = line_minimize(along, center[k] - radius, center[k] + radius, s);
      if (r.at_boundary) {
        throw ResolutionError(std::string(what) + ": optimum on the search boundary (radius " +
                                  std::to_string(radius) + ")",
                              2.0 * radius);
      }
      if (r.value <= current) {
        g[k] = r.arg;
        current = r.value;
      }
    }
    if (before - current <= 1e-15 * (1.0 + std::abs(current))) break;
  }
  return current;
}

}  // namespace

double inf_convolve(const ScalarField& f, double lambda, const StateVec& h,
                    const SearchSpec& search) {
  if (!(lambda > 0.0)) throw DomainError("inf_convolve: lambda must be positive");
  const double r = search.radius_for(lambda);
  auto obj = [&](const StateVec& g) {
    const double d = distance(h, g);
    return f(g) + d * d / (2.0 * lambda);
  };
  return box_minimize(obj, h, r, search, "inf_convolve");
}

double sup_convolve(const ScalarField& f, double mu, const StateVec& h,
                    const SearchSpec& search) {
  if (!(mu > 0.0)) throw DomainError("sup_convolve: mu must be positive");
  const double r = search.radius_for(mu);
  auto obj = [&](const StateVec& g) {
    const double d = distance(h, g);
    return -(f(g) - d * d / (2.0 * mu));
  };
  return -box_minimize(obj, h, r, search, "sup_convolve");
}

double sup_inf_convolve(const ScalarField& f, const SupInfParams& p, const StateVec& h,
                        const SearchSpec& search) {
  p.validate();
  // f_lambda inherits the Lipschitz constant and sup bound of f, so the same
  // search spec sizes the outer box.
  ScalarField envelope = [&](const StateVec& g) { return inf_convolve(f, p.lambda, g, search); };
  return sup_convolve(envelope, p.mu, h, search);
}

VectorField sup_inf_convolve(const VectorField& f, const SupInfParams& p,
                             const SearchSpec& search) {
  p.validate();
  return VectorField(f.dim(), [f, p, search](const StateVec& h) {
    std::vector<double> out(h.dim());
    for (std::size_t k = 0; k < h.dim(); ++k) {
      ScalarField component = [&f, k](const StateVec& g) { return f(g)[k]; };
      out[k] = sup_inf_convolve(component, p, h, search);
    }
    return StateVec(std::move(out));
  });
}

// ---------------------------------------------------------------------------

double mollifier_bump(double t) {
  const double x = 2.0 * (1.0 - std::abs(t));  // 0 at |t| = 1, 1 at |t| = 1/2
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // Smooth step 1 / (1 + exp(s/x - s/(1-x))); s = 0.61 keeps |phi'| below 3.
  constexpr double s = 0.61;
  const double u = s / x - s / (1.0 - x);
  if (u > 700.0) return 0.0;
  return 1.0 / (1.0 + std::exp(u));
}

void MollifierParams::validate() const {
  if (n == 0) throw RangeError("mollify: n must be at least 1");
  if (n > max_dim) {
    throw UnsupportedDimensionError("mollify: n = " + std::to_string(n) +
                                    " exceeds the supported maximum of 3");
  }
  if (!(a > 0.0)) throw DomainError("mollify: bandwidth a must be positive");
  if (kind == QuadratureKind::gauss_legendre && points_per_axis < 2) {
    throw ConfigError("mollify: need at least 2 quadrature points per axis");
  }
  if (kind == QuadratureKind::monte_carlo && mc_samples < 2) {
    throw ConfigError("mollify: need at least 2 Monte Carlo samples");
  }
}

namespace {

struct WeightedNode {
  std::vector<double> u;  // in [-1, 1]^n
  double weight;          // quadrature weight times phi(|u|)
};

std::vector<WeightedNode> mollifier_nodes(const MollifierParams& p) {
  p.validate();
  std::vector<WeightedNode> out;
  if (p.kind == QuadratureKind::monte_carlo) {
    Engine rng = make_engine(p.seed, 0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const double cell = std::ldexp(1.0, static_cast<int>(p.n)) / static_cast<double>(p.mc_samples);
    for (std::size_t s = 0; s < p.mc_samples; ++s) {
      std::vector<double> u(p.n);
      double r2 = 0.0;
      for (auto& x : u) {
        x = unif(rng);
        r2 += x * x;
      }
      out.push_back({std::move(u), cell * mollifier_bump(std::sqrt(r2))});
    }
    return out;
  }
  const auto rule = gauss_legendre(p.points_per_axis);
  const std::size_t m = rule.nodes.size();
  std::size_t total = 1;
  for (std::size_t d = 0; d < p.n; ++d) total *= m;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::vector<double> u(p.n);
    double w = 1.0;
    double r2 = 0.0;
    std::size_t rem = idx;
    for (std::size_t d = 0; d < p.n; ++d) {
      const std::size_t i = rem % m;
      rem /= m;
      u[d] = rule.nodes[i];
      w *= rule.weights[i];
      r2 += u[d] * u[d];
    }
    const double phi = mollifier_bump(std::sqrt(r2));
    if (phi > 0.0) out.push_back({std::move(u), w * phi});
  }
  return out;
}

}  // namespace

double mollifier_normalizer(const MollifierParams& p) {
  double c = 0.0;
  for (const auto& node : mollifier_nodes(p)) c += node.weight;
  return c;
}

MollifyResult mollify(const VectorField& f, const MollifierParams& p, const StateVec& h) {
  if (p.n > h.dim()) throw RangeError("mollify: n exceeds the state dimension");
  const auto nodes = mollifier_nodes(p);
  // Substituting g = u / a turns a^n / c_n * int f(h - g) phi(a|g|) dg into a
  // phi-weighted average over the unit box.
  double total = 0.0;
  std::vector<double> acc(h.dim(), 0.0);
  std::vector<StateVec> values;
  const bool mc = p.kind == QuadratureKind::monte_carlo;
  if (mc) values.reserve(nodes.size());
  for (const auto& node : nodes) {
    std::vector<double> x(h.values());
    for (std::size_t d = 0; d < p.n; ++d) x[d] -= node.u[d] / p.a;
    StateVec v = f(StateVec(std::move(x)));
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += node.weight * v[k];
    total += node.weight;
    if (mc) values.push_back(std::move(v));
  }
  if (!(total > 0.0)) throw NumericError("mollify: quadrature normalizer vanished");
  for (auto& x : acc) x /= total;
  MollifyResult out{StateVec(std::move(acc)), 0.0};
  if (mc) {
    for (std::size_t k = 0; k < h.dim(); ++k) {
      double var = 0.0;
      for (std::size_t s = 0; s < nodes.size(); ++s) {
        const double d = nodes[s].weight * (values[s][k] - out.value[k]);
        var += d * d;
      }
      out.std_error = std::max(out.std_error, std::sqrt(var) / total);
    }
  }
  return out;
}

VectorField mollify(const VectorField& f, const MollifierParams& p) {
  p.validate();
  return VectorField(f.dim(), [f, p](const StateVec& h) { return mollify(f, p, h).value; });
}

// ---------------------------------------------------------------------------

namespace {

StateVec rho_at_step(const CoefficientSet& c, const StateVec& h, double fd_step) {
  StateVec rho(h.dim());
  for (const auto& column : c.vol()) {
    const StateVec v = column(h);
    const double delta = fd_step / std::max(1.0, v.norm());
    StateVec plus = h;
    plus.axpy(delta, v);
    StateVec minus = h;
    minus.axpy(-delta, v);
    StateVec diff = column(plus) - column(minus);
    rho.axpy(0.5 / (2.0 * delta), diff);
  }
  return rho;
}

}  // namespace

RhoResult stratonovich_correction_checked(const CoefficientSet& c, const StateVec& h,
                                          double fd_step) {
  if (!(fd_step > 0.0)) throw DomainError("stratonovich_correction: fd_step must be positive");
  try {
    StateVec coarse = rho_at_step(c, h, fd_step);
    StateVec fine = rho_at_step(c, h, 0.5 * fd_step);
    const double err = distance(coarse, fine);
    return {std::move(coarse), err};
  } catch (const NumericError& e) {
    throw NumericError(std::string("stratonovich_correction: non-finite difference: ") + e.what());
  }
}

StateVec stratonovich_correction(const CoefficientSet& c, const StateVec& h, double fd_step) {
  return stratonovich_correction_checked(c, h, fd_step).value;
}

VectorField nagumo_field(const CoefficientSet& c, std::vector<double> u, double fd_step) {
  if (u.size() != c.vol().size()) {
    throw ShapeError("nagumo_field: u must have one entry per volatility column");
  }
  return VectorField(c.dim(), [c, u = std::move(u), fd_step](const StateVec& h) {
    StateVec out = c.drift()(h);
    out -= stratonovich_correction(c, h, fd_step);
    for (std::size_t j = 0; j < u.size(); ++j) out.axpy(u[j], c.vol()[j](h));
    return out;
  });
}

// ---------------------------------------------------------------------------

StateVec sample_ball(const BallSpec& domain, Engine& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> x(domain.dim);
  double n2 = 0.0;
  for (auto& v : x) {
    v = normal(rng);
    n2 += v * v;
  }
  const double r =
      domain.radius * std::pow(unif(rng), 1.0 / static_cast<double>(domain.dim)) / std::sqrt(n2);
  for (auto& v : x) v *= r;
  return StateVec(std::move(x));
}

double lipschitz_probe(const VectorField& f, std::size_t pairs, const BallSpec& domain,
                       std::uint64_t seed) {
  if (pairs == 0) throw RangeError("lipschitz_probe: need at least one pair");
  if (domain.dim != f.dim()) throw ShapeError("lipschitz_probe: ball and map dimensions differ");
  Engine rng = make_engine(seed, 0);
  const BallSpec local{domain.dim, domain.radius * 1e-3};
  double best = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const StateVec h = sample_ball(domain, rng);
    const StateVec g = i % 2 == 0 ? sample_ball(domain, rng) : h + sample_ball(local, rng);
    const double d = distance(h, g);
    if (d == 0.0) continue;
    best = std::max(best, distance(f(h), f(g)) / d);
  }
  return best;
}

double sup_norm_probe(const VectorField& f, std::size_t samples, const BallSpec& domain,
                      std::uint64_t seed) {
  if (domain.dim != f.dim()) throw ShapeError("sup_norm_probe: ball and map dimensions differ");
  Engine rng = make_engine(seed, 1);
  double best = 0.0;
  for (std::size_t i = 0; i < samples; ++i) best = std::max(best, f(sample_ball(domain, rng)).norm());
  return best;
}

}  // namespace cone_spde
