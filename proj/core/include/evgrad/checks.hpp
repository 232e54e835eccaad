#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace evgrad {

// Finite-difference agreement of one family of analytic gradients.
struct GradCheckResult {
  std::string name;
  std::size_t instances = 0;
  double max_relative_error = 0.0;
};

inline constexpr double gradcheck_tolerance = 1e-5;
inline constexpr double gradcheck_step = 1e-6;

// Random instances of: network backward pass, policy score, and the a2c, evm
// and evv baseline gradients, each against central finite differences.
std::vector<GradCheckResult> run_gradcheck(std::uint64_t seed, std::size_t instances = 100);

struct OracleCheckResult {
  std::string name;
  double max_abs_error = 0.0;
  double tolerance = 0.0;

  bool passed() const { return max_abs_error <= tolerance; }
};

// Exhaustive-enumeration checks on small chain MDPs: probability closure,
// exact zero expectation of the S-baseline term, and the closed-form bandit gradient.
std::vector<OracleCheckResult> run_oracle_checks(std::uint64_t seed, std::size_t pairs = 50);

}  // namespace evgrad
