#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "interdyn/interaction.hpp"
#include "interdyn/masking.hpp"

namespace interdyn {

enum class SparsifyMethod {
  // Alternating direction method of multipliers on the split z = I(gamma):
  // soft-thresholding for z and a conjugate-gradient solve for gamma.
  kAdmm,
  // Subgradient descent with step step_size / sqrt(1 + iter).
  kSubgradient,
};

std::string to_string(SparsifyMethod method);
SparsifyMethod parse_sparsify_method(const std::string& name);

struct SparsifyConfig {
  std::size_t max_iters = 5000;
  double step_size = 0.01;
  // Converged once the best objective drops by no more than tol (relative)
  // over kConvergenceWindow iterations.
  double tol = 1e-6;
  // Neither method draws random numbers; kept so runs record a full config.
  std::uint64_t seed = 0;
  SparsifyMethod method = SparsifyMethod::kAdmm;
  // ADMM penalty, in units where the largest |interaction| at gamma = 0 is 1.
  double penalty = 1.0;

  void validate() const;
};

inline constexpr std::size_t kConvergenceWindow = 50;

struct SparsifyResult {
  GammaVector gamma;
  // Best objective seen after each iteration; entry 0 is the gamma = 0 start.
  std::vector<double> objective_trace;
  bool converged = false;
  double final_objective = 0.0;
  std::size_t iterations = 0;
};

// sum_{T≠∅} |I_and[T]| + sum_{T≠∅} |I_or[T]| for the decomposition at gamma.
double objective(const MaskedOutputTable& table, const GammaVector& gamma);

// Minimises objective() over gamma starting from gamma = 0 and returns the
// best iterate. Every gamma reproduces the table exactly, so only sparsity
// changes. Throws NumericError on a non-finite table or objective.
SparsifyResult sparsify(const MaskedOutputTable& table, const SparsifyConfig& config = {});

// Convenience: sparsify then decompose at the optimised gamma.
InteractionDecomposition decompose_sparse(const MaskedOutputTable& table,
                                          const SparsifyConfig& config = {},
                                          SparsifyResult* result = nullptr);

}  // namespace interdyn
