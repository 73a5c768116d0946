#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "interdyn/sparsify.hpp"

namespace interdyn {

struct VerifyConfig {
  std::size_t n = 8;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  SparsifyConfig sparsify;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Randomised invariant checks for the decomposition, the fast transforms and
// the sparsifier. Each check runs over `trials` random tables of n variables
// (smaller n where the reference implementation is expensive).
std::vector<CheckResult> run_verify(const VerifyConfig& config);

}  // namespace interdyn
