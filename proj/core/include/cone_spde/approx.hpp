#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>

#include "cone_spde/coefficients.hpp"
#include "cone_spde/field.hpp"
#include "cone_spde/quadrature.hpp"
#include "cone_spde/rng.hpp"
#include "cone_spde/state.hpp"

namespace cone_spde {

// ---------------------------------------------------------------------------
// Projections, retractions and noise truncation of coefficients.

/// Pi_n o f. Throws RangeError if n > f.dim().
VectorField compose_projection(const VectorField& f, std::size_t n);
/// f o R_radius, with R the retraction onto the ball of that radius.
VectorField compose_retraction(const VectorField& f, double radius);
/// Applies compose_retraction to drift, every column and every jump kernel.
CoefficientSet compose_retraction(const CoefficientSet& c, double radius);
/// Keeps volatility columns 1..n and replaces the rest by zero maps.
CoefficientSet truncate_noise(const CoefficientSet& c, std::size_t n);

// ---------------------------------------------------------------------------
// Boundary shift.

/// Dead-zone shrink toward zero: 0 on [-eps, eps], x -+ eps outside.
class PhiEps {
 public:
  explicit PhiEps(double eps);
  double eps() const noexcept { return eps_; }
  double operator()(double x) const noexcept;

 private:
  double eps_;
};

double phi_eps(const PhiEps& p, double x);

using EpsRule = std::function<double(std::size_t)>;
/// eps(n) = 2^-n.
double dyadic_eps(std::size_t n);

/// Phi_n(h) = sum_{k <= n} phi_{eps(n)}(h_k) e_k; coordinates beyond n are zeroed.
StateVec boundary_shift(std::size_t n, const EpsRule& eps_rule, const StateVec& h);
/// f o Phi_n.
VectorField compose_boundary_shift(const VectorField& f, std::size_t n,
                                   const EpsRule& eps_rule = dyadic_eps);
/// Lipschitz constant of Phi_n: 2 ubc.
double boundary_shift_lipschitz(const BasisConstants& basis = coordinate_basis_constants());

// ---------------------------------------------------------------------------
// Sup-inf convolution.

struct SupInfParams {
  double lambda = 1e-2;
  double mu = 1e-3;
  void validate() const;
};

/// Search box for the inner optimizations. Either `radius` is given, or it is
/// derived from a Lipschitz constant and a sup bound of f as
/// scale * L + sqrt(2 * scale * sup|f|), padded by `padding`.
struct SearchSpec {
  std::optional<double> radius;
  std::optional<double> lipschitz;
  std::optional<double> sup_bound;
  double padding = 1.25;
  std::size_t grid_points = 64;
  std::size_t golden_iterations = 90;
  std::size_t sweeps = 8;

  double radius_for(double scale) const;
};

/// Moreau envelope f_lambda(h) = inf_g f(g) + |h - g|^2 / (2 lambda).
double inf_convolve(const ScalarField& f, double lambda, const StateVec& h,
                    const SearchSpec& search);
/// f^mu(h) = sup_g f(g) - |h - g|^2 / (2 mu).
double sup_convolve(const ScalarField& f, double mu, const StateVec& h, const SearchSpec& search);
/// (f_lambda)^mu(h). Throws ResolutionError when an optimum sits on the
/// search boundary.
double sup_inf_convolve(const ScalarField& f, const SupInfParams& p, const StateVec& h,
                        const SearchSpec& search);
/// Componentwise sup-inf convolution of a vector field.
VectorField sup_inf_convolve(const VectorField& f, const SupInfParams& p,
                             const SearchSpec& search);

// ---------------------------------------------------------------------------
// Finite-dimensional mollification.

/// Smooth even bump: 1 on (-1/2, 1/2), 0 outside (-1, 1), phi' in [-3, 0] on R_+.
double mollifier_bump(double t);

enum class QuadratureKind { gauss_legendre, monte_carlo };

struct MollifierParams {
  std::size_t n = 2;
  double a = 8.0;
  QuadratureKind kind = QuadratureKind::gauss_legendre;
  std::size_t points_per_axis = 33;
  std::size_t mc_samples = 20000;
  std::uint64_t seed = 1;

  /// Largest supported n.
  static constexpr std::size_t max_dim = 3;
  void validate() const;
};

/// Normalizer c_n = integral over E_n of phi(|g|), by the configured quadrature.
double mollifier_normalizer(const MollifierParams& p);

struct MollifyResult {
  StateVec value;
  /// Monte Carlo standard error (max over components); 0 for the tensor rule.
  double std_error = 0.0;
};

/// Sigma_n(h) = a^n / c_n * integral over E_n of f(h - g) phi(a |g|) dg.
/// Requires n <= 3 and n <= f.dim().
MollifyResult mollify(const VectorField& f, const MollifierParams& p, const StateVec& h);
VectorField mollify(const VectorField& f, const MollifierParams& p);

// ---------------------------------------------------------------------------
// Stratonovich correction.

struct RhoResult {
  StateVec value;
  /// |rho(step) - rho(step/2)|.
  double richardson_error = 0.0;
};

/// rho(h) = 1/2 sum_j D sigma^j(h) sigma^j(h), each directional derivative by a
/// central difference with step fd_step / max(1, |sigma^j(h)|).
RhoResult stratonovich_correction_checked(const CoefficientSet& c, const StateVec& h,
                                          double fd_step = 1e-5);
StateVec stratonovich_correction(const CoefficientSet& c, const StateVec& h,
                                 double fd_step = 1e-5);

/// Sigma(h) = alpha(h) - rho(h) + sum_j u_j sigma^j(h).
VectorField nagumo_field(const CoefficientSet& c, std::vector<double> u, double fd_step = 1e-5);

// ---------------------------------------------------------------------------
// Numeric probes.

struct BallSpec {
  std::size_t dim = 1;
  double radius = 1.0;
};

/// Max over sampled pairs of |f(h) - f(g)| / |h - g|. Half of the pairs are
/// independent draws from the ball, half are local perturbations of size
/// radius * 1e-3. Deterministic given the seed; coincident pairs are skipped.
double lipschitz_probe(const VectorField& f, std::size_t pairs, const BallSpec& domain,
                       std::uint64_t seed);
/// Max of |f(h)| over uniform draws from the ball.
double sup_norm_probe(const VectorField& f, std::size_t samples, const BallSpec& domain,
                      std::uint64_t seed);
/// Uniform draw from the ball.
StateVec sample_ball(const BallSpec& domain, Engine& rng);

}  // namespace cone_spde
