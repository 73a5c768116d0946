#include "interdyn/oracle.hpp"

#include <bit>
#include <string>

#include "interdyn/error.hpp"

namespace interdyn::oracle {

namespace {

std::size_t checked_variables(std::size_t length) {
  if (length == 0 || (length & (length - 1)) != 0) {
    throw DimensionError("length " + std::to_string(length) + " is not a power of two");
  }
  const auto n = static_cast<std::size_t>(std::countr_zero(length));
  if (n > kMaxBruteForceVariables) {
    throw LimitError("brute-force oracle limited to n <= 12, got n = " + std::to_string(n));
  }
  return n;
}

double sign_of_gap(std::uint32_t t, std::uint32_t l) {
  return ((std::popcount(t) - std::popcount(l)) % 2 == 0) ? 1.0 : -1.0;
}

}  // namespace

std::vector<double> mobius_and_bruteforce(std::span<const double> o_and) {
  checked_variables(o_and.size());
  std::vector<double> out(o_and.size(), 0.0);
  for (std::uint32_t t = 1; t < o_and.size(); ++t) {
    double sum = 0.0;
    for (std::uint32_t l = 0; l < o_and.size(); ++l) {
      if ((l & t) == l) sum += sign_of_gap(t, l) * o_and[l];
    }
    out[t] = sum;
  }
  return out;
}

std::vector<double> mobius_or_bruteforce(std::span<const double> o_or) {
  const std::size_t n = checked_variables(o_or.size());
  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  std::vector<double> out(o_or.size(), 0.0);
  for (std::uint32_t t = 1; t < o_or.size(); ++t) {
    double sum = 0.0;
    for (std::uint32_t l = 0; l < o_or.size(); ++l) {
      if ((l & t) == l) sum += sign_of_gap(t, l) * o_or[full & ~l];
    }
    out[t] = -sum;
  }
  return out;
}

std::vector<double> reconstruct_bruteforce(std::span<const double> i_and,
                                           std::span<const double> i_or, double bias) {
  checked_variables(i_and.size());
  if (i_or.size() != i_and.size()) throw DimensionError("I_and/I_or length mismatch");
  std::vector<double> out(i_and.size(), bias);
  for (std::uint32_t s = 0; s < i_and.size(); ++s) {
    for (std::uint32_t t = 1; t < i_and.size(); ++t) {
      const bool all_present = (t & s) == t;
      const bool any_present = (t & s) != 0;
      if (all_present) out[s] += i_and[t];
      if (any_present) out[s] += i_or[t];
    }
  }
  return out;
}

}  // namespace interdyn::oracle
