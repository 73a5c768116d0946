#pragma once

#include <cstddef>
#include <filesystem>
#include <string_view>
#include <vector>

namespace interdyn {

enum class Split { kTrain, kTest };

struct Sample {
  std::vector<double> x;
  std::size_t label = 0;
};

struct Dataset {
  std::vector<Sample> samples;
  Split role = Split::kTrain;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  // Feature count of the first sample; 0 for an empty set.
  std::size_t input_dim() const;

  // Throws InvalidArgument if empty, ragged, non-finite, or any label is
  // >= num_classes.
  void validate(std::size_t num_classes) const;
};

std::string_view to_string(Split split);

// CSV with a header row x1..xn,label. Reading accepts the file with or
// without the header.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path, Split role);

}  // namespace interdyn
