#pragma once

// Literal reference implementations used to check the fast paths. They share
// no code with the transforms in interaction.hpp.

#include <cstddef>
#include <span>
#include <vector>

namespace interdyn::oracle {

// Largest n the O(3^n) double loops accept.
inline constexpr std::size_t kMaxBruteForceVariables = 12;

// Entry T (nonempty) = sum over L ⊆ T of (-1)^{|T|-|L|} o[L]; entry 0 is 0.
// Throws LimitError for n > 12.
std::vector<double> mobius_and_bruteforce(std::span<const double> o_and);

// Entry T (nonempty) = -sum over L ⊆ T of (-1)^{|T|-|L|} o[N \ L]; entry 0 is 0.
std::vector<double> mobius_or_bruteforce(std::span<const double> o_or);

// Surrogate output for every mask, summing triggered terms one by one.
std::vector<double> reconstruct_bruteforce(std::span<const double> i_and,
                                           std::span<const double> i_or, double bias);

}  // namespace interdyn::oracle
