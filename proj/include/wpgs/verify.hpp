#pragma once

// Randomized oracle suites: separable vs dense propagation, exact refresh
// transient vs interpolated mask, closed-form scale optimality, and Hungarian
// vs exhaustive assignment.

#include <cstdint>
#include <string>
#include <vector>

namespace wpgs {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // worst value observed
  double tolerance = 0.0;  // bound it was held to
  std::string detail;
};

CheckResult verify_propagation(int cases = 20, std::uint64_t seed = 1);
CheckResult verify_transient_exactness(int pairs = 20, std::uint64_t seed = 2);
// Fitted log-log slope of ||exact - leading|| against <dphi^2> for excursion scales 0.01-0.3 rad.
CheckResult verify_leading_order_slope(std::uint64_t seed = 3);
CheckResult verify_scale_optimality(int instances = 50, int perturbations = 100, std::uint64_t seed = 4);
CheckResult verify_projective_identity(int instances = 50, std::uint64_t seed = 5);
CheckResult verify_assignment(int instances = 200, std::uint64_t seed = 6);

std::vector<CheckResult> verify_all(std::uint64_t seed = 0);

}  // namespace wpgs
