#include "interdyn/dataset.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>

#include "interdyn/error.hpp"
#include "interdyn/io.hpp"

namespace interdyn {

std::size_t Dataset::input_dim() const {
  return samples.empty() ? 0 : samples.front().x.size();
}

void Dataset::validate(std::size_t num_classes) const {
  if (samples.empty()) throw InvalidArgument("dataset is empty");
  const std::size_t dim = input_dim();
  if (dim == 0) throw InvalidArgument("dataset samples have no features");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    if (s.x.size() != dim) {
      throw DimensionError("sample " + std::to_string(i) + " has " +
                           std::to_string(s.x.size()) + " features, expected " +
                           std::to_string(dim));
    }
    if (s.label >= num_classes) {
      throw InvalidArgument("sample " + std::to_string(i) + " label " +
                            std::to_string(s.label) + " >= num_classes " +
                            std::to_string(num_classes));
    }
    for (double v : s.x) {
      if (!std::isfinite(v)) {
        throw InvalidArgument("sample " + std::to_string(i) + " has a non-finite feature");
      }
    }
  }
}

std::string_view to_string(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::string out;
  const std::size_t dim = data.input_dim();
  for (std::size_t i = 0; i < dim; ++i) out += "x" + std::to_string(i + 1) + ",";
  out += "label\n";
  for (const Sample& s : data.samples) {
    for (double v : s.x) {
      out += format_double(v);
      out += ',';
    }
    out += std::to_string(s.label);
    out += '\n';
  }
  write_file_atomic(path, out);
}

namespace {

bool parse_number(std::string_view field, double& value) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
  if (field.empty()) return false;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  return ec == std::errc{} && ptr == field.data() + field.size();
}

}  // namespace

Dataset read_dataset_csv(const std::filesystem::path& path, Split role) {
  const std::string text = read_file(path);
  Dataset data;
  data.role = role;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!parse_number(fields[i], values[i])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (line_no == 1 && data.samples.empty()) {
        columns = fields.size();
        continue;  // header
      }
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    if (columns == 0) columns = fields.size();
    if (fields.size() != columns || columns < 2) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(columns) + " columns");
    }
    const double label = values.back();
    if (label < 0 || label != std::floor(label)) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad label");
    }
    values.pop_back();
    data.samples.push_back({std::move(values), static_cast<std::size_t>(label)});
  }
  if (data.samples.empty()) throw ParseError(path.string() + ": no samples");
  return data;
}

}  // namespace interdyn
