#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace cone_spde {

/// Sample sizes of the approximation-operator suites.
struct AppendixOptions {
  /// Grid points (phi) or random pairs (retraction).
  std::size_t samples = 10000;
  /// Sampled face points (mollify, rho).
  std::size_t face_points = 64;
  /// Evaluation points of the sup-inf convolution on [-2, 2].
  std::size_t supinf_points = 401;
  std::uint64_t seed = 1;
};

/// One property checked over many samples.
struct PropertyResult {
  std::string suite;
  std::string property;
  std::size_t checks = 0;
  std::size_t failures = 0;
  /// Largest observed value of the checked quantity, next to its bound.
  double worst = 0.0;
  double bound = 0.0;
  /// First failing input, empty when none.
  std::string counterexample;

  bool passed() const noexcept { return failures == 0; }
};

/// Accepted selectors: phi, retraction, supinf, mollify, rho, all.
std::vector<std::string> appendix_suites();

/// Runs one suite (or all). Throws ConfigError for an unknown selector.
std::vector<PropertyResult> run_appendix(const std::string& selector,
                                         const AppendixOptions& options = {});

void print_appendix_table(std::ostream& out, const std::vector<PropertyResult>& results);

void to_json(nlohmann::json& j, const PropertyResult& r);

}  // namespace cone_spde
