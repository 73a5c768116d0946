#include "interdyn/masking.hpp"

#include <bit>
#include <cmath>

#include "interdyn/error.hpp"

namespace interdyn {

void check_variable_count(std::size_t n) {
  if (n > kMaxVariables) {
    throw LimitError("n = " + std::to_string(n) + " exceeds the limit of " +
                     std::to_string(kMaxVariables) + " input variables");
  }
}

SubsetMask::SubsetMask(std::uint32_t bits_in, std::size_t n_in) : bits(bits_in), n(n_in) {
  check_variable_count(n);
  if (bits >= subset_count(n)) {
    throw InvalidArgument("subset mask " + std::to_string(bits) + " out of range for n = " +
                          std::to_string(n));
  }
}

std::size_t SubsetMask::order() const { return static_cast<std::size_t>(std::popcount(bits)); }

std::string format_subset(std::uint32_t bits, std::size_t n) {
  std::string out = "{";
  bool first = true;
  for (std::size_t i = 0; i < n; ++i) {
    if ((bits >> i) & 1U) {
      if (!first) out += ',';
      out += std::to_string(i + 1);
      first = false;
    }
  }
  return out + "}";
}

void MaskedOutputTable::validate() const {
  check_variable_count(n);
  if (values.size() != subset_count(n)) {
    throw DimensionError("masked-output table has " + std::to_string(values.size()) +
                         " entries, expected 2^" + std::to_string(n));
  }
  for (std::size_t m = 0; m < values.size(); ++m) {
    if (!std::isfinite(values[m])) {
      throw NumericError("masked-output table entry " + std::to_string(m) + " is not finite");
    }
  }
}

BaselineVector compute_baseline(const Dataset& data) {
  if (data.empty()) throw InvalidArgument("cannot compute a baseline from an empty dataset");
  const std::size_t dim = data.input_dim();
  BaselineVector baseline{std::vector<double>(dim, 0.0)};
  for (const Sample& s : data.samples) {
    if (s.x.size() != dim) throw DimensionError("ragged dataset");
    for (std::size_t i = 0; i < dim; ++i) baseline.values[i] += s.x[i];
  }
  for (double& v : baseline.values) v /= static_cast<double>(data.size());
  return baseline;
}

std::vector<double> mask_input(std::span<const double> x, SubsetMask subset,
                               const BaselineVector& baseline) {
  if (x.size() != baseline.size() || x.size() != subset.n) {
    throw DimensionError("mask_input: x has " + std::to_string(x.size()) +
                         " entries, baseline " + std::to_string(baseline.size()) +
                         ", mask n = " + std::to_string(subset.n));
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = subset.contains(i) ? x[i] : baseline.values[i];
  }
  return out;
}

MaskedOutputTable masked_output_table(const Model& model, std::span<const double> x,
                                      std::size_t label, const BaselineVector& baseline,
                                      std::string sample_id) {
  const std::size_t n = model.spec.input_dim;
  check_variable_count(n);
  if (x.size() != n || baseline.size() != n) {
    throw DimensionError("masked_output_table: model expects " + std::to_string(n) +
                         " inputs, got x of " + std::to_string(x.size()) +
                         " and baseline of " + std::to_string(baseline.size()));
  }
  MaskedOutputTable table;
  table.n = n;
  table.label = label;
  table.sample_id = std::move(sample_id);
  table.values.resize(subset_count(n));
  std::vector<double> masked(n);
  for (std::size_t m = 0; m < table.values.size(); ++m) {
    for (std::size_t i = 0; i < n; ++i) masked[i] = ((m >> i) & 1U) ? x[i] : baseline.values[i];
    table.values[m] = score(model, masked, label);
  }
  return table;
}

MaskedOutputTable tabulate(std::size_t n, const std::function<double(std::uint32_t)>& set_function,
                           std::string sample_id) {
  check_variable_count(n);
  MaskedOutputTable table;
  table.n = n;
  table.sample_id = std::move(sample_id);
  table.values.resize(subset_count(n));
  for (std::size_t m = 0; m < table.values.size(); ++m) {
    table.values[m] = set_function(static_cast<std::uint32_t>(m));
  }
  return table;
}

nlohmann::json table_to_json(const MaskedOutputTable& table) {
  return {{"sample_id", table.sample_id},
          {"label", table.label},
          {"n", table.n},
          {"values", table.values}};
}

MaskedOutputTable table_from_json(const nlohmann::json& doc) {
  MaskedOutputTable table;
  try {
    table.sample_id = doc.at("sample_id").get<std::string>();
    table.label = doc.at("label").get<std::size_t>();
    table.n = doc.at("n").get<std::size_t>();
    table.values = doc.at("values").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed table: ") + e.what());
  }
  table.validate();
  return table;
}

}  // namespace interdyn
