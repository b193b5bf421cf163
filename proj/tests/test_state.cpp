#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "cone_spde/cone.hpp"
#include "cone_spde/error.hpp"
#include "cone_spde/rng.hpp"
#include "cone_spde/state.hpp"

using namespace cone_spde;

namespace {

StateVec random_vec(std::size_t dim, Engine& rng, double scale = 1.0) {
  std::normal_distribution<double> n;
  std::vector<double> v(dim);
  for (auto& x : v) x = scale * n(rng);
  return StateVec(std::move(v));
}

StateVec random_in_orthant(std::size_t dim, Engine& rng) {
  std::vector<double> v(random_vec(dim, rng).values());
  for (auto& x : v) x = std::abs(x);
  return StateVec(std::move(v));
}

}  // namespace

TEST_CASE("state vectors keep finite coordinates") {
  StateVec h{1.0, 2.0, 3.0};
  CHECK(h.dim() == 3);
  CHECK(h.norm_squared() == doctest::Approx(14.0));
  CHECK_THROWS_AS(h.set(0, std::numeric_limits<double>::quiet_NaN()), NumericError);
  CHECK_THROWS_AS(StateVec({1.0, std::numeric_limits<double>::infinity()}), NumericError);
  CHECK_THROWS_AS(h *= std::numeric_limits<double>::infinity(), NumericError);
  CHECK(h == StateVec{1.0, 2.0, 3.0});
  CHECK_THROWS_AS(h += StateVec(2), ShapeError);
  CHECK(StateVec::unit(3, 1, 2.0) == StateVec{0.0, 2.0, 0.0});
  CHECK(h.tail_norm_squared(1) == doctest::Approx(13.0));
}

TEST_CASE("state vectors serialize as dim and coords") {
  const StateVec h{0.5, -1.25};
  const nlohmann::json j = h;
  CHECK(j.at("dim") == 2);
  CHECK(j.get<StateVec>() == h);
  CHECK_THROWS_AS(nlohmann::json({{"dim", 3}, {"coords", {1.0}}}).get<StateVec>(), ConfigError);
}

TEST_CASE("coordinate projection") {
  const StateVec h{1.0, 2.0, 3.0};
  CHECK(project(h, 2) == StateVec{1.0, 2.0, 0.0});
  CHECK(project(h, 3) == h);
  CHECK(project(h, 0) == StateVec(3));
  CHECK_THROWS_AS(project(h, 4), RangeError);

  Engine rng(7);
  for (int i = 0; i < 200; ++i) {
    const auto g = random_vec(6, rng);
    CHECK(project(project(g, 2), 1) == project(g, 1));
    for (std::size_t n = 0; n <= 6; ++n) {
      const auto p = project(g, n);
      CHECK(p.norm() <= g.norm());
      CHECK(distance(p, g) * distance(p, g) == doctest::Approx(g.tail_norm_squared(n)));
    }
  }
}

TEST_CASE("cone membership") {
  const auto nonneg = ConeSpec::nonnegative(3);
  CHECK(cone_contains(nonneg, StateVec{0.0, 1.0, 2.0}));
  CHECK_FALSE(cone_contains(nonneg, StateVec{-1e-3, 1.0, 1.0}));
  CHECK(cone_contains(nonneg, StateVec{-1e-3, 1.0, 1.0}, 1e-2));
  CHECK(cone_contains(ConeSpec({1, -1, 0}), StateVec{2.0, -3.0, -7.0}));
  CHECK_THROWS_AS(cone_contains(nonneg, StateVec(2)), ShapeError);
  CHECK_THROWS_AS(cone_contains(nonneg, StateVec(3), -1.0), DomainError);
  CHECK_THROWS_AS(ConeSpec({1, 2}), ConfigError);
  CHECK(cone_contains(nonneg, StateVec(3)));
}

TEST_CASE("generators list the constrained coordinates") {
  const ConeSpec cone({1, 0, -1});
  const auto g = cone.generators();
  REQUIRE(g.size() == 2);
  CHECK(g[0] == Functional{1, 0});
  CHECK(g[1] == Functional{-1, 2});
  CHECK(cone.is_generator({-1, 2}));
  CHECK_FALSE(cone.is_generator({1, 2}));
  CHECK_FALSE(cone.is_generator({1, 1}));
  CHECK(ConeSpec::unconstrained(4).generators().empty());
}

TEST_CASE("cone distance matches a brute-force search") {
  const auto cone = ConeSpec::nonnegative(2);
  CHECK(cone_distance(cone, StateVec{-3.0, 4.0}) == doctest::Approx(3.0));
  CHECK(cone_distance(cone, StateVec{1.0, 4.0}) == 0.0);

  // Oracle: minimum of |h - g| over a grid of g in the orthant.
  Engine rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto h = random_vec(2, rng, 2.0);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 400; ++i) {
      for (int j = 0; j <= 400; ++j) {
        const StateVec g{i * 0.01, j * 0.01};
        best = std::min(best, distance(h, g));
      }
    }
    if (std::abs(h[0]) < 4.0 && std::abs(h[1]) < 4.0) {
      CHECK(cone_distance(cone, h) <= best + 1e-12);
      CHECK(best - cone_distance(cone, h) <= 0.01);
    }
  }
}

TEST_CASE("cone distance properties") {
  const ConeSpec cone({1, -1, 0, 1});
  Engine rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto h = random_vec(4, rng);
    const auto g = random_vec(4, rng);
    CHECK(cone_distance(cone, 2.0 * h) == doctest::Approx(2.0 * cone_distance(cone, h)));
    CHECK(std::abs(cone_distance(cone, h) - cone_distance(cone, g)) <= distance(h, g) + 1e-12);
    const auto k = cone.clip(g);
    CHECK(cone.contains(k));
    CHECK(cone_distance(cone, h + k) <= cone_distance(cone, h) + 1e-12);
    CHECK(distance(h, cone.clip(h)) == doctest::Approx(cone_distance(cone, h)));
  }
}

TEST_CASE("cone is closed under addition and nonnegative scaling") {
  const auto cone = ConeSpec::nonnegative(5);
  Engine rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 500; ++i) {
    const auto h = random_in_orthant(5, rng);
    const auto g = random_in_orthant(5, rng);
    CHECK(cone.contains(h + g));
    CHECK(cone.contains(u(rng) * h));
    for (std::size_t n = 0; n <= 5; ++n) CHECK(cone.contains(project(h, n)));
  }
}

TEST_CASE("cone order") {
  const auto cone = ConeSpec::nonnegative(2);
  const StateVec h{2.0, 1.0};
  CHECK(cone_leq(cone, h, h));
  CHECK(cone_leq(cone, StateVec{1.0, 1.0}, h));
  CHECK_FALSE(cone_leq(cone, h, StateVec{1.0, 1.0}));
  CHECK_THROWS_AS(cone_leq(cone, h, StateVec(3)), ShapeError);

  Engine rng(9);
  std::uniform_int_distribution<int> coin(0, 2);
  for (int i = 0; i < 1000; ++i) {
    const StateVec a{static_cast<double>(coin(rng)), static_cast<double>(coin(rng))};
    const StateVec b{static_cast<double>(coin(rng)), static_cast<double>(coin(rng))};
    if (cone_leq(cone, a, b) && cone_leq(cone, b, a)) CHECK(a == b);
  }
}

TEST_CASE("min margin") {
  const ConeSpec cone({1, -1, 0});
  CHECK(cone.min_margin(StateVec{2.0, -0.5, -9.0}) == doctest::Approx(0.5));
  CHECK(std::isinf(ConeSpec::unconstrained(2).min_margin(StateVec{-1.0, -1.0})));
}

TEST_CASE("cone serializes as signs") {
  const ConeSpec cone({1, 0, -1});
  const nlohmann::json j = cone;
  CHECK(j.at("signs") == nlohmann::json({1, 0, -1}));
  CHECK(j.get<ConeSpec>() == cone);
}

TEST_CASE("retraction onto the ball") {
  CHECK(retract(StateVec{0.3, 0.4}, 1.0) == StateVec{0.3, 0.4});
  const auto r = retract(StateVec{3.0, 4.0}, 1.0);
  CHECK(r[0] == doctest::Approx(0.6));
  CHECK(r[1] == doctest::Approx(0.8));
  CHECK(r.norm() == doctest::Approx(1.0));
  CHECK(retract(StateVec(3), 2.0) == StateVec(3));
  CHECK_THROWS_AS(retract(StateVec{1.0}, 0.0), DomainError);

  Engine rng(13);
  for (int i = 0; i < 2000; ++i) {
    const auto h = random_vec(8, rng, 3.0);
    const auto g = random_vec(8, rng, 3.0);
    const double n = 1.0 + (i % 5);
    CHECK(distance(retract(h, n), retract(g, n)) <= distance(h, g) * (1.0 + 1e-12));
    CHECK(retract(h, n).norm() <= n * (1.0 + 1e-12));
  }
}

TEST_CASE("coordinate basis constants") {
  constexpr auto c = coordinate_basis_constants();
  CHECK(c.bc == 1.0);
  CHECK(c.ubc == 1.0);
}
