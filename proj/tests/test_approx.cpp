#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "cone_spde/approx.hpp"
#include "cone_spde/checker.hpp"
#include "cone_spde/error.hpp"
#include "cone_spde/semigroup.hpp"

using namespace cone_spde;
using nlohmann::json;

namespace {

VectorField field(const json& spec, std::size_t dim) { return VectorField::from_spec(spec, dim); }

VectorField identity(std::size_t dim) {
  return field({{"family", "proportional"}, {"scale", 1.0}}, dim);
}

CoefficientSet compliant(std::size_t dim, std::size_t columns) {
  std::vector<VectorField> vol;
  for (std::size_t j = 0; j < columns; ++j) {
    vol.push_back(field({{"family", "proportional"}, {"scale", 0.3}, {"index", j}}, dim));
  }
  return CoefficientSet(field({{"family", "mean_reversion"}, {"kappa", 1.0}, {"b", 0.5}}, dim),
                        std::move(vol),
                        {{0.2, field({{"family", "constant"}, {"value", 0.1}}, dim)}});
}

StateVec random_vec(std::size_t dim, Engine& rng, double scale = 1.0) {
  std::normal_distribution<double> n;
  std::vector<double> v(dim);
  for (auto& x : v) x = scale * n(rng);
  return StateVec(std::move(v));
}

/// Brute-force Moreau envelope on a fine grid, the oracle for inf_convolve.
double moreau_grid(double (*f)(double), double lambda, double x) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = -200000; i <= 200000; ++i) {
    const double g = x + i * 1e-5;
    best = std::min(best, f(g) + (x - g) * (x - g) / (2.0 * lambda));
  }
  return best;
}

}  // namespace

TEST_CASE("projection of fields") {
  const auto id = identity(4);
  const StateVec h{1.0, 2.0, 3.0, 4.0};
  CHECK(compose_projection(id, 4)(h) == h);
  CHECK(compose_projection(id, 2)(h) == StateVec{1.0, 2.0, 0.0, 0.0});
  CHECK_THROWS_AS(compose_projection(id, 5), RangeError);

  Engine rng(2);
  const auto f = field({{"family", "affine"}, {"diag", {1.0, -2.0, 0.5, 3.0}}, {"offset", 1.0}}, 4);
  for (int i = 0; i < 100; ++i) {
    const auto g = random_vec(4, rng);
    for (std::size_t n = 0; n <= 4; ++n) {
      const double err = distance(compose_projection(f, n)(g), f(g));
      CHECK(err * err == doctest::Approx(f(g).tail_norm_squared(n)));
    }
  }
}

TEST_CASE("retraction of fields") {
  const auto f = field({{"family", "affine"}, {"diag", 2.0}, {"offset", 0.0}}, 3);
  const auto fr = compose_retraction(f, 1.0);
  CHECK(fr(StateVec{0.3, 0.4, 0.0}) == f(StateVec{0.3, 0.4, 0.0}));
  const auto far = fr(StateVec{3.0, 4.0, 0.0});
  CHECK(far.norm() == doctest::Approx(2.0));

  const BallSpec ball{3, 4.0};
  const double lf = lipschitz_probe(f, 10000, ball, 1);
  const double lr = lipschitz_probe(fr, 10000, ball, 1);
  CHECK(lr <= lf + 1e-9);
  // |f o R_1| <= sup of |f| on the unit ball, which is 2.
  CHECK(sup_norm_probe(fr, 4000, {3, 3.0}, 3) <= 2.0 * (1.0 + 1e-12));
}

TEST_CASE("noise truncation") {
  const auto c = compliant(4, 3);
  CHECK_THROWS_AS(truncate_noise(c, 4), RangeError);
  const auto full = truncate_noise(c, 3);
  const auto none = truncate_noise(c, 0);
  Engine rng(6);
  for (int i = 0; i < 100; ++i) {
    const auto h = random_vec(4, rng);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(full.vol()[j](h) == c.vol()[j](h));
      CHECK(none.vol()[j](h) == StateVec(4));
    }
    for (std::size_t n = 0; n <= 3; ++n) CHECK(truncate_noise(c, n).hs_norm(h) <= c.hs_norm(h));
  }
  CHECK(none.vol().size() == 3);
}

TEST_CASE("dead-zone shift") {
  const PhiEps one(1.0);
  CHECK(one(0.0) == 0.0);
  CHECK(one(2.5) == 1.5);
  CHECK(one(-3.0) == -2.0);
  CHECK(one(0.999) == 0.0);
  CHECK_THROWS_AS(PhiEps(0.0), DomainError);

  // phi keeps the sign, shrinks by exactly eps outside the dead zone and
  // x >= 0 implies phi(x) <= x.
  for (double eps : {1e-3, 0.1, 1.0}) {
    const PhiEps phi(eps);
    for (int i = -2000; i <= 2000; ++i) {
      const double x = 5.0 * i / 2000.0;
      const double y = phi(x);
      CHECK(y * x >= 0.0);
      CHECK(std::abs(y) <= std::abs(x));
      if (std::abs(x) > eps) CHECK(std::abs(x - y) == doctest::Approx(eps));
      if (x >= 0.0) CHECK(x - y >= 0.0);
    }
  }
}

TEST_CASE("boundary shift") {
  const std::size_t n = 3;
  const double eps = dyadic_eps(n);
  CHECK(eps == 0.125);
  const StateVec small{0.1, -0.12, 0.05, 9.0};
  CHECK(boundary_shift(n, dyadic_eps, small) == StateVec(4));
  CHECK(boundary_shift_lipschitz() == 2.0);

  Engine rng(3);
  for (int i = 0; i < 500; ++i) {
    const auto h = random_vec(5, rng, 2.0);
    for (std::size_t m = 1; m <= 5; ++m) {
      const auto shifted = boundary_shift(m, dyadic_eps, h);
      const double bound = static_cast<double>(m) * dyadic_eps(m) + std::sqrt(h.tail_norm_squared(m));
      CHECK(distance(shifted, h) <= bound + 1e-12);
    }
  }
}

TEST_CASE("boundary shift localizes parallel fields") {
  // sigma_k(h) = h_k is parallel on every face; after the shift it vanishes on
  // a ball of radius eps / L around face points.
  const std::size_t dim = 4;
  const std::size_t n = 3;
  const auto f = compose_boundary_shift(identity(dim), n);
  const double radius = dyadic_eps(n) / boundary_shift_lipschitz();
  Engine rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const std::size_t k = static_cast<std::size_t>(i) % dim;
    auto h = random_vec(dim, rng);
    h.set(k, 0.0);
    auto g = random_vec(dim, rng);
    g *= radius * std::abs(u(rng)) / g.norm();
    CHECK(f(h - g)[k] == 0.0);
  }
}

TEST_CASE("projection, retraction, truncation and shift keep a passing verdict") {
  const auto s = DiagonalSemigroup::heat(6);
  const auto cone = ConeSpec::nonnegative(6);
  const auto c = compliant(6, 4);
  const SamplerSpec samples{};
  REQUIRE(invariance_verdict(c, s, cone, samples).verdict() == Verdict::no_violation_found);

  auto map_all = [&](auto&& transform) {
    std::vector<VectorField> vol;
    for (const auto& v : c.vol()) vol.push_back(transform(v));
    std::vector<JumpAtom> jumps;
    for (const auto& a : c.jumps()) jumps.push_back({a.weight, transform(a.kernel)});
    return CoefficientSet(transform(c.drift()), vol, jumps);
  };
  for (std::size_t n : {1u, 3u, 6u}) {
    const auto projected = map_all([n](const VectorField& f) { return compose_projection(f, n); });
    CHECK(invariance_verdict(projected, s, cone, samples).verdict() == Verdict::no_violation_found);
    // Shift the argument only for the volatility; drift and jumps stay.
    std::vector<VectorField> vol;
    for (const auto& v : c.vol()) vol.push_back(compose_boundary_shift(v, n));
    const CoefficientSet shifted(c.drift(), vol, c.jumps());
    CHECK(invariance_verdict(shifted, s, cone, samples).verdict() == Verdict::no_violation_found);
  }
  for (std::size_t n = 0; n <= 4; ++n) {
    CHECK(invariance_verdict(truncate_noise(c, n), s, cone, samples).verdict() ==
          Verdict::no_violation_found);
  }
  CHECK(invariance_verdict(compose_retraction(c, 0.7), s, cone, samples).verdict() ==
        Verdict::no_violation_found);
}

TEST_CASE("inf convolution reproduces the Moreau envelope") {
  SearchSpec search;
  search.lipschitz = 1.0;
  search.sup_bound = 3.0;
  auto abs_fn = +[](double x) { return std::abs(x); };
  const ScalarField f = [](const StateVec& h) { return std::abs(h[0]); };
  const double lambda = 0.5;
  for (int i = -12; i <= 12; ++i) {
    const double x = 0.25 * i;
    const double huber = std::abs(x) <= lambda ? x * x / (2 * lambda) : std::abs(x) - lambda / 2;
    const double v = inf_convolve(f, lambda, StateVec{x}, search);
    CHECK(std::abs(v - huber) <= 1e-6);
    CHECK(std::abs(v - moreau_grid(abs_fn, lambda, x)) <= 1e-6);
  }
}

TEST_CASE("sup-inf convolution") {
  SearchSpec search;
  search.lipschitz = 1.0;
  search.sup_bound = 1.0;
  const ScalarField c = [](const StateVec&) { return 0.75; };
  CHECK(sup_inf_convolve(c, {0.1, 0.05}, StateVec{0.3, -0.2}, search) == doctest::Approx(0.75));

  const ScalarField f = [](const StateVec& h) { return std::min(std::abs(h[0]), 1.0); };
  const SupInfParams p{1e-2, 1e-3};
  for (int i = -20; i <= 20; ++i) {
    const StateVec h{0.1 * i};
    const double lo = inf_convolve(f, p.lambda, h, search);
    const double hi = sup_convolve(f, p.mu, h, search);
    CHECK(lo <= f(h) + 1e-15);
    CHECK(f(h) <= hi + 1e-15);
    CHECK(std::abs(sup_inf_convolve(f, p, h, search) - f(h)) <= 0.05);
  }
  CHECK_THROWS_AS((SupInfParams{1e-3, 1e-2}).validate(), DomainError);

  // A tiny box around h cannot contain the optimum of a steep function.
  SearchSpec narrow;
  narrow.radius = 1e-6;
  const ScalarField steep = [](const StateVec& h) { return 100.0 * h[0]; };
  CHECK_THROWS_AS(inf_convolve(steep, 1.0, StateVec{0.0}, narrow), ResolutionError);
  try {
    inf_convolve(steep, 1.0, StateVec{0.0}, narrow);
  } catch (const ResolutionError& e) {
    CHECK(e.suggested_radius() == doctest::Approx(2e-6));
  }
  CHECK_THROWS_AS(inf_convolve(f, 0.1, StateVec{0.0}, SearchSpec{}), ConfigError);
}

TEST_CASE("sup-inf convolution of a vector field acts componentwise") {
  SearchSpec search;
  search.lipschitz = 1.0;
  search.sup_bound = 2.0;
  const auto f = field({{"family", "constant"}, {"value", {0.5, -1.0}}}, 2);
  const auto g = sup_inf_convolve(f, {0.05, 0.01}, search);
  const auto y = g(StateVec{0.2, 0.1});
  CHECK(y[0] == doctest::Approx(0.5));
  CHECK(y[1] == doctest::Approx(-1.0));
}

TEST_CASE("mollifier bump") {
  CHECK(mollifier_bump(0.0) == 1.0);
  CHECK(mollifier_bump(0.49) == 1.0);
  CHECK(mollifier_bump(1.0) == 0.0);
  CHECK(mollifier_bump(-1.5) == 0.0);
  double prev = 1.0;
  double max_slope = 0.0;
  for (int i = 1; i <= 100000; ++i) {
    const double t = 0.5 + 0.5 * i / 100000.0;
    const double v = mollifier_bump(t);
    CHECK(v <= prev);
    max_slope = std::max(max_slope, (prev - v) / (0.5 / 100000.0));
    prev = v;
  }
  CHECK(max_slope <= 3.0);
  CHECK(mollifier_bump(0.75) == doctest::Approx(0.5));
}

TEST_CASE("mollifier reproduces constants and affine maps") {
  MollifierParams p;
  const auto c = field({{"family", "constant"}, {"value", {1.5, -2.0, 0.25}}}, 3);
  const auto a = field({{"family", "affine"}, {"diag", {2.0, -1.0, 0.5}}, {"offset", 0.3}}, 3);
  Engine rng(10);
  for (std::size_t n = 1; n <= 3; ++n) {
    p.n = n;
    for (int i = 0; i < 10; ++i) {
      const auto h = random_vec(3, rng);
      CHECK(distance(mollify(c, p, h).value, c(h)) <= 1e-10);
      CHECK(distance(mollify(a, p, h).value, a(h)) <= 1e-6);
    }
  }
  p.n = 4;
  CHECK_THROWS_AS(p.validate(), UnsupportedDimensionError);
  p.kind = QuadratureKind::monte_carlo;
  CHECK_THROWS_AS(p.validate(), UnsupportedDimensionError);
}

TEST_CASE("mollifier normalizer equals the integral of the bump") {
  // Radial oracle for n = 2: c_2 = 2 pi int_0^1 r phi(r) dr by the midpoint rule.
  double radial = 0.0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double r = (i + 0.5) / m;
    radial += r * mollifier_bump(r) / m;
  }
  radial *= 2.0 * 3.14159265358979323846;
  MollifierParams p;
  p.n = 2;
  p.points_per_axis = 64;
  CHECK(mollifier_normalizer(p) == doctest::Approx(radial).epsilon(1e-4));
}

TEST_CASE("Monte Carlo mollifier reports a standard error") {
  MollifierParams p;
  p.kind = QuadratureKind::monte_carlo;
  p.mc_samples = 20000;
  const auto f = field({{"family", "proportional"}, {"scale", 1.0}}, 2);
  const auto r = mollify(f, p, StateVec{0.4, -0.3});
  CHECK(r.std_error > 0.0);
  CHECK(std::abs(r.value[0] - 0.4) <= 5.0 * r.std_error + 1e-12);
  CHECK(std::abs(r.value[1] + 0.3) <= 5.0 * r.std_error + 1e-12);
}

TEST_CASE("mollifier never increases Lipschitz or sup estimates") {
  MollifierParams p;
  p.n = 2;
  p.points_per_axis = 17;
  const auto f = field({{"family", "table"}, {"knots", {-1.0, 0.0, 1.0}}, {"values", {1.0, 0.0, 1.0}}},
                       2);
  const auto m = mollify(f, p);
  const BallSpec ball{2, 2.0};
  CHECK(lipschitz_probe(m, 400, ball, 5) <= lipschitz_probe(f, 4000, ball, 5) + 1e-9);
  CHECK(sup_norm_probe(m, 400, ball, 6) <= std::sqrt(2.0) + 1e-9);
}

TEST_CASE("Stratonovich correction") {
  const auto zero_drift = VectorField::zero(3);
  const CoefficientSet constant(zero_drift,
                                {field({{"family", "constant"}, {"value", {1.0, 2.0, 0.0}}}, 3)}, {});
  CHECK(stratonovich_correction(constant, StateVec{0.3, 0.1, 2.0}).norm() <= 1e-12);

  const CoefficientSet single(zero_drift,
                              {field({{"family", "proportional"}, {"scale", 1.0}, {"index", 0}}, 3)},
                              {});
  const auto r = stratonovich_correction_checked(single, StateVec{0.8, -1.0, 3.0});
  CHECK(r.value[0] == doctest::Approx(0.4).epsilon(1e-8));
  CHECK(std::abs(r.value[1]) <= 1e-12);
  CHECK(r.richardson_error <= 1e-8);
  CHECK_THROWS_AS(stratonovich_correction(single, StateVec{1.0, 0.0, 0.0}, 0.0), DomainError);

  // Parallel columns give a parallel correction on every sampled face.
  const auto c = compliant(5, 5);
  const auto cone = ConeSpec::nonnegative(5);
  for (const auto& pair : sample_boundary_pairs(cone, SamplerSpec{})) {
    CHECK(std::abs(pair.functional.pair(stratonovich_correction(c, pair.point))) <= 1e-6);
  }
}

TEST_CASE("Nagumo field") {
  const auto c = compliant(3, 2);
  const auto sigma = nagumo_field(c, {1.0, -1.0});
  const StateVec h{1.0, 2.0, 3.0};
  auto expected = c.drift()(h) - stratonovich_correction(c, h);
  expected += c.vol()[0](h);
  expected -= c.vol()[1](h);
  CHECK(distance(sigma(h), expected) <= 1e-12);
  CHECK_THROWS_AS(nagumo_field(c, {1.0}), ShapeError);
}

TEST_CASE("Lipschitz and sup probes") {
  const BallSpec ball{3, 2.0};
  const double l_id = lipschitz_probe(identity(3), 1000, ball, 1);
  CHECK(l_id >= 1.0 - 1e-12);
  CHECK(l_id <= 1.0 + 1e-12);
  const auto doubled = field({{"family", "proportional"}, {"scale", 2.0}}, 3);
  CHECK(lipschitz_probe(doubled, 1000, ball, 1) == doctest::Approx(2.0));
  const VectorField r(3, [](const StateVec& h) { return retract(h, 1.0); });
  CHECK(lipschitz_probe(r, 10000, ball, 2) <= 1.0 + 1e-12);
  CHECK(lipschitz_probe(r, 10, ball, 3) == lipschitz_probe(r, 10, ball, 3));
  CHECK(sup_norm_probe(identity(3), 1000, ball, 4) <= 2.0);
  CHECK_THROWS_AS(lipschitz_probe(identity(3), 0, ball, 1), RangeError);

  Engine rng(1);
  for (int i = 0; i < 1000; ++i) CHECK(sample_ball(ball, rng).norm() <= 2.0 + 1e-12);
}
