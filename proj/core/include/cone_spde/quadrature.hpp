#pragma once

#include <cstddef>
#include <vector>

namespace cone_spde {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]; nodes ascending and symmetric.
QuadratureRule gauss_legendre(std::size_t n);

}  // namespace cone_spde
