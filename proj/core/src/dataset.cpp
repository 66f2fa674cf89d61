#include "hardlabel/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hardlabel {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

Dataset parse_dataset(std::string_view text, const DatasetOptions& options,
                      const std::string& source) {
  Dataset out;
  std::size_t width = 0;
  std::size_t line_no = 0;
  bool header_pending = options.skip_header;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    auto where = [&] { return source + ":" + std::to_string(line_no); };

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      fields.push_back(trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() < 2) throw LoadError(where(), "need a label and at least one feature");

    DatasetRecord rec;
    auto lf = fields[0];
    auto lres = std::from_chars(lf.data(), lf.data() + lf.size(), rec.label.value);
    if (lres.ec != std::errc() || lres.ptr != lf.data() + lf.size()) {
      throw LoadError(where(), "label '" + std::string(lf) + "' is not an integer");
    }
    if (rec.label.value < 0) throw LoadError(where(), "negative label");
    if (options.num_classes && rec.label.value >= *options.num_classes) {
      throw LoadError(where(), "label " + std::to_string(rec.label.value) +
                                   " >= class count " +
                                   std::to_string(*options.num_classes));
    }
    rec.x.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto f = fields[i];
      double v = 0.0;
      auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size() ||
          !std::isfinite(v)) {
        throw LoadError(where(), "feature " + std::to_string(i - 1) + " ('" +
                                     std::string(f) + "') is not a finite number");
      }
      rec.x.push_back(v);
    }
    if (width == 0) {
      width = rec.x.size();
    } else if (rec.x.size() != width) {
      throw LoadError(where(), "row has " + std::to_string(rec.x.size()) +
                                   " features, expected " + std::to_string(width));
    }
    out.records.push_back(std::move(rec));
  }
  if (out.records.empty()) out.warnings.push_back(source + ": dataset is empty");
  return out;
}

Dataset load_dataset(const std::filesystem::path& path,
                     const DatasetOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path.string(), "cannot open dataset file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str(), options, path.string());
}

std::string dataset_to_csv(const std::vector<DatasetRecord>& records) {
  std::string out;
  char buf[32];
  for (const auto& r : records) {
    out += std::to_string(r.label.value);
    for (double v : r.x) {
      auto res = std::to_chars(buf, buf + sizeof buf, v);
      out.push_back(',');
      out.append(buf, res.ptr);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace hardlabel
