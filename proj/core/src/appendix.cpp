#include "cone_spde/appendix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cone_spde/approx.hpp"
#include "cone_spde/error.hpp"
#include "cone_spde/experiment.hpp"
#include "cone_spde/rng.hpp"

namespace cone_spde {

namespace {

/// Accumulates one property: record(value, ok, input) per sample.
class Tally {
 public:
  Tally(std::string suite, std::string property, double bound)
      : result_{std::move(suite), std::move(property), 0, 0, 0.0, bound, {}} {}

  void record(double value, bool ok, const std::string& input) {
    ++result_.checks;
    result_.worst = std::max(result_.worst, value);
    if (!ok) {
      if (result_.failures == 0) result_.counterexample = input;
      ++result_.failures;
    }
  }
  void check_le(double value, double bound, const std::string& input) {
    record(value, value <= bound, input);
  }
  PropertyResult result() const { return result_; }

 private:
  PropertyResult result_;
};

std::string describe(std::initializer_list<std::pair<const char*, double>> fields) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [name, value] : fields) {
    os << (first ? "" : " ") << name << '=' << format_double(value);
    first = false;
  }
  return os.str();
}

std::string describe(const StateVec& h) {
  std::ostringstream os;
  os << '[';
  for (std::size_t k = 0; k < h.dim(); ++k) os << (k ? "," : "") << format_double(h[k]);
  os << ']';
  return os.str();
}

StateVec gaussian(std::size_t dim, Engine& rng, double scale = 1.0) {
  std::normal_distribution<double> normal;
  std::vector<double> v(dim);
  for (auto& x : v) x = scale * normal(rng);
  return StateVec(std::move(v));
}

/// Point of the nonnegative orthant with coordinate k set to zero.
StateVec face_point(std::size_t dim, std::size_t k, Engine& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(dim);
  for (auto& x : v) x = std::abs(normal(rng));
  v[k] = 0.0;
  return StateVec(std::move(v));
}

std::vector<PropertyResult> phi_suite(const AppendixOptions& o) {
  std::vector<PropertyResult> out;
  const std::size_t n = std::max<std::size_t>(o.samples, 2);
  for (double eps : {1e-3, 1e-1, 1.0}) {
    const PhiEps phi(eps);
    const std::string tag = "eps=" + format_double(eps);
    Tally dead("phi", "dead-zone " + tag, 0.0);
    Tally shift("phi", "shift-bound " + tag, eps);
    Tally lip("phi", "1-lipschitz " + tag, 1.0);
    double prev_x = 0.0;
    double prev_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = -10.0 + 20.0 * static_cast<double>(i) / static_cast<double>(n - 1);
      const double y = phi(x);
      const std::string input = describe({{"x", x}});
      if (std::abs(x) <= eps) dead.check_le(std::abs(y), 0.0, input);
      // The outer grid may miss a narrow dead zone; cover it with its own grid.
      const double inner = eps * (-1.0 + 2.0 * static_cast<double>(i % 1001) / 1000.0);
      if (i < 1001) dead.check_le(std::abs(phi(inner)), 0.0, describe({{"x", inner}}));
      // Rounding allowance of a few ulps of x.
      shift.check_le(std::abs(y - x), eps + 1e-14 * std::max(1.0, std::abs(x)), input);
      if (i > 0) {
        const double ratio = std::abs(y - prev_y) / (x - prev_x);
        lip.check_le(ratio, 1.0 + 1e-12, describe({{"x", prev_x}, {"y", x}}));
      }
      prev_x = x;
      prev_y = y;
    }
    out.push_back(dead.result());
    out.push_back(shift.result());
    out.push_back(lip.result());
  }

  Engine rng = make_engine(o.seed, 11);
  const double bound = boundary_shift_lipschitz();
  Tally shift_lip("phi", "boundary-shift-lipschitz", bound);
  for (std::size_t i = 0; i < std::min<std::size_t>(n, 2000); ++i) {
    const std::size_t cutoff = 1 + i % 8;
    const auto h = gaussian(8, rng, 0.5);
    const auto g = gaussian(8, rng, 0.5);
    const double d = distance(h, g);
    if (d == 0.0) continue;
    const double ratio =
        distance(boundary_shift(cutoff, dyadic_eps, h), boundary_shift(cutoff, dyadic_eps, g)) / d;
    shift_lip.check_le(ratio, bound * (1.0 + 1e-12), "h=" + describe(h) + " g=" + describe(g));
  }
  out.push_back(shift_lip.result());
  return out;
}

std::vector<PropertyResult> retraction_suite(const AppendixOptions& o) {
  constexpr std::size_t dim = 32;
  Engine rng = make_engine(o.seed, 12);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](double radius) {
    auto h = gaussian(dim, rng);
    const double target = 3.0 * radius * unit(rng);
    return (target / h.norm()) * h;
  };
  Tally lip("retraction", "1-lipschitz", 1.0);
  Tally ball("retraction", "norm-bound", 1.0);
  for (std::size_t i = 0; i < o.samples; ++i) {
    const double radius = static_cast<double>(1u << (i % 4));
    const auto h = draw(radius);
    const auto g = draw(radius);
    const auto rh = retract(h, radius);
    const auto rg = retract(g, radius);
    const double d = distance(h, g);
    const std::string input =
        "n=" + format_double(radius) + " h=" + describe(h) + " g=" + describe(g);
    if (d > 0.0) lip.check_le(distance(rh, rg) / d, 1.0 + 1e-12, input);
    ball.check_le(rh.norm() / radius, 1.0 + 1e-12, input);
  }
  return {lip.result(), ball.result()};
}

double huber_cap(double x, double lambda) {
  const double a = std::abs(x);
  const double huber = a <= lambda ? x * x / (2.0 * lambda) : a - lambda / 2.0;
  return std::min(huber, 1.0);
}

std::vector<PropertyResult> supinf_suite(const AppendixOptions& o) {
  const ScalarField f = [](const StateVec& h) { return std::min(std::abs(h[0]), 1.0); };
  SearchSpec search;
  search.lipschitz = 1.0;
  search.sup_bound = 1.0;
  const std::size_t n = std::max<std::size_t>(o.supinf_points, 2);
  auto grid = [n](std::size_t i) {
    return -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(n - 1);
  };

  std::vector<PropertyResult> out;
  for (double lambda : {1e-2, 0.25}) {
    Tally moreau("supinf", "moreau-closed-form lambda=" + format_double(lambda), 1e-6);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = grid(i);
      const double err = std::abs(inf_convolve(f, lambda, StateVec{x}, search) - huber_cap(x, lambda));
      moreau.check_le(err, 1e-6, describe({{"x", x}}));
    }
    out.push_back(moreau.result());
  }

  const SupInfParams p{1e-2, 1e-3};
  auto F = [&](double x) { return sup_inf_convolve(f, p, StateVec{x}, search); };
  Tally sup_err("supinf", "sup-error", 0.05);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid(i);
    sup_err.check_le(std::abs(F(x) - f(StateVec{x})), 0.05, describe({{"x", x}}));
  }
  out.push_back(sup_err.result());

  // Second differences bound the Lipschitz constant of the derivative. Centres
  // cover the coarse grid plus dense windows around the kinks of f.
  const double bound = 1.05 / p.mu;
  const double delta = 1e-4;
  std::vector<double> centres;
  for (std::size_t i = 1; i + 1 < n; ++i) centres.push_back(grid(i));
  for (double kink : {-1.0, 0.0, 1.0}) {
    for (int i = -50; i <= 50; ++i) centres.push_back(kink + 2e-4 * i);
  }
  Tally curvature("supinf", "derivative-lipschitz", bound);
  for (double x : centres) {
    const double second = std::abs(F(x + delta) - 2.0 * F(x) + F(x - delta)) / (delta * delta);
    curvature.check_le(second, bound, describe({{"x", x}}));
  }
  out.push_back(curvature.result());
  return out;
}

std::vector<PropertyResult> mollify_suite(const AppendixOptions& o) {
  constexpr std::size_t dim = 4;
  MollifierParams p;
  p.n = 2;
  p.a = 8.0;
  Engine rng = make_engine(o.seed, 13);

  const StateVec v{0.7, -1.3, 2.0, 0.1};
  const VectorField constant(dim, [v](const StateVec&) { return v; });
  const std::vector<std::vector<double>> A{
      {1.0, -0.5, 0.25, 0.0}, {0.3, 2.0, 0.0, -1.0}, {0.0, 0.7, -1.5, 0.2}, {0.4, 0.0, 0.1, 1.0}};
  const StateVec b{0.2, -0.1, 0.0, 0.5};
  auto affine = [A, b](const StateVec& h) {
    std::vector<double> y(b.values());
    for (std::size_t r = 0; r < y.size(); ++r) {
      for (std::size_t c = 0; c < h.dim(); ++c) y[r] += A[r][c] * h[c];
    }
    return StateVec(std::move(y));
  };
  const VectorField linear(dim, affine);
  // Vanishes wherever |h_k| <= 1/a, so it stays parallel under every shift the
  // mollifier averages over.
  const PhiEps dead(1.0 / p.a);
  const VectorField parallel(dim, [dead](const StateVec& h) {
    std::vector<double> y(h.dim());
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = 0.3 * dead(h[k]);
    return StateVec(std::move(y));
  });

  Tally c_tally("mollify", "constant-reproduced", 1e-10);
  Tally l_tally("mollify", "linear-reproduced", 1e-6);
  Tally p_tally("mollify", "locally-parallel-preserved", 1e-12);
  for (std::size_t i = 0; i < o.face_points; ++i) {
    const auto h = gaussian(dim, rng);
    c_tally.check_le(distance(mollify(constant, p, h).value, v), 1e-10, describe(h));
    l_tally.check_le(distance(mollify(linear, p, h).value, affine(h)), 1e-6, describe(h));
    const std::size_t k = i % dim;
    const auto face = face_point(dim, k, rng);
    p_tally.check_le(std::abs(mollify(parallel, p, face).value[k]), 1e-12,
                     "k=" + std::to_string(k) + " h=" + describe(face));
  }
  return {c_tally.result(), l_tally.result(), p_tally.result()};
}

std::vector<PropertyResult> rho_suite(const AppendixOptions& o) {
  const auto doc = preset_document("heat-positive");
  const std::size_t dim = doc.at("space").at("dim").get<std::size_t>();
  const auto c = coefficients_from_json(doc.at("coefficients"), dim);
  Engine rng = make_engine(o.seed, 14);

  // sigma^j(h) = s h_j e_j has D sigma^j sigma^j = s^2 h_j e_j.
  auto analytic = [&](const StateVec& h) {
    std::vector<double> rho(dim, 0.0);
    for (const auto& col : c.vol()) {
      const auto& spec = *col.spec();
      const double s = spec.at("scale").get<double>();
      const auto j = spec.at("index").get<std::size_t>();
      rho[j] += 0.5 * s * s * h[j];
    }
    return StateVec(std::move(rho));
  };

  Tally fd("rho", "analytic-vs-finite-difference", 1e-6);
  Tally rich("rho", "richardson-error", 1e-6);
  Tally face("rho", "face-pairing", 1e-6);
  for (std::size_t i = 0; i < o.face_points; ++i) {
    const std::size_t k = i % dim;
    const auto h = face_point(dim, k, rng);
    const auto r = stratonovich_correction_checked(c, h);
    const std::string input = "k=" + std::to_string(k) + " h=" + describe(h);
    fd.check_le(distance(r.value, analytic(h)), 1e-6, input);
    rich.check_le(r.richardson_error, 1e-6, input);
    face.check_le(std::abs(r.value[k]), 1e-6, input);
  }
  return {fd.result(), rich.result(), face.result()};
}

}  // namespace

std::vector<std::string> appendix_suites() {
  return {"phi", "retraction", "supinf", "mollify", "rho", "all"};
}

std::vector<PropertyResult> run_appendix(const std::string& selector,
                                         const AppendixOptions& options) {
  using Suite = std::vector<PropertyResult> (*)(const AppendixOptions&);
  const std::pair<const char*, Suite> suites[] = {{"phi", phi_suite},
                                                  {"retraction", retraction_suite},
                                                  {"supinf", supinf_suite},
                                                  {"mollify", mollify_suite},
                                                  {"rho", rho_suite}};
  std::vector<PropertyResult> out;
  bool known = selector == "all";
  for (const auto& [name, suite] : suites) {
    if (selector != "all" && selector != name) continue;
    known = true;
    auto r = suite(options);
    out.insert(out.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  }
  if (!known) {
    throw ConfigError("appendix: unknown suite \"" + selector +
                      "\" (expected phi, retraction, supinf, mollify, rho or all)");
  }
  return out;
}

void print_appendix_table(std::ostream& out, const std::vector<PropertyResult>& results) {
  char line[256];
  std::snprintf(line, sizeof line, "%-11s %-40s %8s %8s %12s %12s\n", "suite", "property",
                "checks", "fails", "worst", "bound");
  out << line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-11s %-40s %8zu %8zu %12.4e %12.4e\n", r.suite.c_str(),
                  r.property.c_str(), r.checks, r.failures, r.worst, r.bound);
    out << line;
  }
  for (const auto& r : results) {
    if (!r.passed()) {
      out << "FAILED " << r.suite << '/' << r.property << ": " << r.counterexample << '\n';
    }
  }
}

void to_json(nlohmann::json& j, const PropertyResult& r) {
  j = nlohmann::json{{"suite", r.suite},       {"property", r.property},
                     {"checks", r.checks},     {"failures", r.failures},
                     {"worst", r.worst},       {"bound", r.bound},
                     {"passed", r.passed()},   {"counterexample", r.counterexample}};
}

}  // namespace cone_spde
