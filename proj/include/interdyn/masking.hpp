#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "interdyn/dataset.hpp"
#include "interdyn/model.hpp"

namespace interdyn {

// Masked-output tables and decompositions are Θ(2^n); n is capped here.
inline constexpr std::size_t kMaxVariables = 16;

// Throws LimitError if n > kMaxVariables.
void check_variable_count(std::size_t n);

inline std::size_t subset_count(std::size_t n) { return std::size_t{1} << n; }

// Per-variable value that stands in for an absent (masked) variable.
struct BaselineVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

// Subset S of N = {1..n}; bit i set <=> variable i+1 is in S.
struct SubsetMask {
  std::uint32_t bits = 0;
  std::size_t n = 0;

  SubsetMask() = default;
  // Throws LimitError for n > 16 and InvalidArgument for bits >= 2^n.
  SubsetMask(std::uint32_t bits, std::size_t n);

  static SubsetMask empty(std::size_t n) { return {0, n}; }
  static SubsetMask full(std::size_t n) {
    return {static_cast<std::uint32_t>(subset_count(n) - 1), n};
  }

  bool contains(std::size_t variable) const { return (bits >> variable) & 1U; }
  std::size_t order() const;

  friend bool operator==(const SubsetMask&, const SubsetMask&) = default;
};

// "{1,3}"-style rendering with 1-based variable indices.
std::string format_subset(std::uint32_t bits, std::size_t n);

// values[mask] = v(x_S) for S = mask.
struct MaskedOutputTable {
  std::size_t n = 0;
  std::vector<double> values;
  std::size_t label = 0;
  std::string sample_id;

  // Throws DimensionError / NumericError if the length is not 2^n or an
  // entry is non-finite.
  void validate() const;
};

// Per-coordinate mean over all samples. Throws InvalidArgument when empty.
BaselineVector compute_baseline(const Dataset& data);

// Keeps x_i for i in S and substitutes baseline_i elsewhere.
std::vector<double> mask_input(std::span<const double> x, SubsetMask subset,
                               const BaselineVector& baseline);

// Table of score(model, x_S, label) over every mask in [0, 2^n), n = input_dim.
MaskedOutputTable masked_output_table(const Model& model, std::span<const double> x,
                                      std::size_t label, const BaselineVector& baseline,
                                      std::string sample_id = {});

// Tabulates an arbitrary set function; used for analytic scorers.
MaskedOutputTable tabulate(std::size_t n, const std::function<double(std::uint32_t)>& set_function,
                           std::string sample_id = {});

nlohmann::json table_to_json(const MaskedOutputTable& table);
MaskedOutputTable table_from_json(const nlohmann::json& doc);

}  // namespace interdyn
