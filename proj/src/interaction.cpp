#include "interdyn/interaction.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "interdyn/error.hpp"

namespace interdyn {

std::size_t variables_for_length(std::size_t length) {
  if (length == 0 || !std::has_single_bit(length)) {
    throw DimensionError("vector length " + std::to_string(length) + " is not a power of two");
  }
  const auto n = static_cast<std::size_t>(std::countr_zero(length));
  check_variable_count(n);
  return n;
}

void subset_zeta(std::span<double> a) {
  const std::size_t size = a.size();
  for (std::size_t bit = 1; bit < size; bit <<= 1) {
    for (std::size_t m = 0; m < size; ++m) {
      if (m & bit) a[m] += a[m ^ bit];
    }
  }
}

void subset_mobius(std::span<double> a) {
  const std::size_t size = a.size();
  for (std::size_t bit = 1; bit < size; bit <<= 1) {
    for (std::size_t m = 0; m < size; ++m) {
      if (m & bit) a[m] -= a[m ^ bit];
    }
  }
}

void superset_zeta(std::span<double> a) {
  const std::size_t size = a.size();
  for (std::size_t bit = 1; bit < size; bit <<= 1) {
    for (std::size_t m = 0; m < size; ++m) {
      if (!(m & bit)) a[m] += a[m | bit];
    }
  }
}

void superset_mobius(std::span<double> a) {
  const std::size_t size = a.size();
  for (std::size_t bit = 1; bit < size; bit <<= 1) {
    for (std::size_t m = 0; m < size; ++m) {
      if (!(m & bit)) a[m] -= a[m | bit];
    }
  }
}

std::vector<double> complement_permute(std::span<const double> values) {
  // For a full mask of all ones, N \ S is full ^ S, which reverses the order.
  return {values.rbegin(), values.rend()};
}

SplitOutputs split_outputs(const MaskedOutputTable& table, const GammaVector& gamma) {
  if (gamma.size() != table.values.size()) {
    throw DimensionError("gamma has " + std::to_string(gamma.size()) + " entries, table has " +
                         std::to_string(table.values.size()));
  }
  SplitOutputs out;
  out.o_and.resize(table.values.size());
  out.o_or.resize(table.values.size());
  for (std::size_t m = 0; m < table.values.size(); ++m) {
    const double half = 0.5 * table.values[m];
    out.o_and[m] = half + gamma.values[m];
    out.o_or[m] = half - gamma.values[m];
  }
  return out;
}

std::vector<double> mobius_and(std::span<const double> o_and) {
  variables_for_length(o_and.size());
  std::vector<double> out(o_and.begin(), o_and.end());
  subset_mobius(out);
  out[0] = 0.0;
  return out;
}

std::vector<double> mobius_or(std::span<const double> o_or) {
  variables_for_length(o_or.size());
  std::vector<double> out = complement_permute(o_or);
  subset_mobius(out);
  for (double& v : out) v = -v;
  out[0] = 0.0;
  return out;
}

InteractionDecomposition decompose(const MaskedOutputTable& table, const GammaVector& gamma) {
  table.validate();
  const SplitOutputs split = split_outputs(table, gamma);
  InteractionDecomposition d;
  d.n = table.n;
  d.i_and = mobius_and(split.o_and);
  d.i_or = mobius_or(split.o_or);
  d.bias = table.values[0];
  d.gamma = gamma;
  d.source_table_id = table.sample_id;
  return d;
}

double reconstruct(const InteractionDecomposition& decomp, SubsetMask subset) {
  if (subset.n != decomp.n) throw DimensionError("reconstruct: mask n differs from decomposition n");
  const std::uint32_t s = subset.bits;
  double total = decomp.bias;
  for (std::size_t t = 1; t < decomp.i_and.size(); ++t) {
    const auto mask = static_cast<std::uint32_t>(t);
    if ((mask & s) == mask) total += decomp.i_and[t];
    if ((mask & s) != 0) total += decomp.i_or[t];
  }
  return total;
}

std::vector<double> reconstruct_all(const InteractionDecomposition& decomp) {
  std::vector<double> and_part = decomp.i_and;
  and_part[0] = 0.0;
  subset_zeta(and_part);
  std::vector<double> or_absent = decomp.i_or;
  or_absent[0] = 0.0;
  subset_zeta(or_absent);
  // sum over T meeting S = (sum over all T) - (sum over T ⊆ N \ S).
  const double or_total = or_absent.back();
  const std::size_t full = decomp.i_and.size() - 1;
  std::vector<double> out(decomp.i_and.size());
  for (std::size_t s = 0; s < out.size(); ++s) {
    out[s] = decomp.bias + and_part[s] + (or_total - or_absent[full ^ s]);
  }
  return out;
}

double max_reconstruction_error(const InteractionDecomposition& decomp,
                                const MaskedOutputTable& table) {
  if (table.values.size() != decomp.i_and.size()) throw DimensionError("table/decomposition size mismatch");
  const std::vector<double> rebuilt = reconstruct_all(decomp);
  double worst = 0.0;
  for (std::size_t s = 0; s < rebuilt.size(); ++s) {
    worst = std::max(worst, std::abs(rebuilt[s] - table.values[s]));
  }
  return worst;
}

nlohmann::json decomposition_to_json(const InteractionDecomposition& decomp) {
  return {{"sample_id", decomp.source_table_id},
          {"n", decomp.n},
          {"b", decomp.bias},
          {"gamma", decomp.gamma.values},
          {"I_and", decomp.i_and},
          {"I_or", decomp.i_or}};
}

InteractionDecomposition decomposition_from_json(const nlohmann::json& doc) {
  InteractionDecomposition d;
  try {
    d.source_table_id = doc.at("sample_id").get<std::string>();
    d.n = doc.at("n").get<std::size_t>();
    d.bias = doc.at("b").get<double>();
    d.gamma.values = doc.at("gamma").get<std::vector<double>>();
    d.i_and = doc.at("I_and").get<std::vector<double>>();
    d.i_or = doc.at("I_or").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed decomposition: ") + e.what());
  }
  check_variable_count(d.n);
  const std::size_t size = subset_count(d.n);
  if (d.gamma.size() != size || d.i_and.size() != size || d.i_or.size() != size) {
    throw ParseError("decomposition vectors do not have length 2^n");
  }
  return d;
}

}  // namespace interdyn
