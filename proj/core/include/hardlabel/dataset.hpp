#ifndef HARDLABEL_DATASET_HPP
#define HARDLABEL_DATASET_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hardlabel/types.hpp"

namespace hardlabel {

struct DatasetRecord {
  FeatureVector x;
  Label label;
};

struct DatasetOptions {
  bool skip_header = false;
  /// When set, labels must lie in [0, num_classes).
  std::optional<int> num_classes;
};

struct Dataset {
  std::vector<DatasetRecord> records;
  std::vector<std::string> warnings;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

/// CSV: first column is the integer label, the rest are features; no header
/// unless options.skip_header. Blank lines are ignored. Throws LoadError
/// with "<source>:<line>" on ragged rows, non-numeric fields or bad labels.
Dataset parse_dataset(std::string_view text, const DatasetOptions& options = {},
                      const std::string& source = "<memory>");
Dataset load_dataset(const std::filesystem::path& path,
                     const DatasetOptions& options = {});

std::string dataset_to_csv(const std::vector<DatasetRecord>& records);

}  // namespace hardlabel

#endif  // HARDLABEL_DATASET_HPP
