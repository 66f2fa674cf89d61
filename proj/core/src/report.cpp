#include "hardlabel/report.hpp"

#include <sstream>

#include <json.hpp>

namespace hardlabel {

using ojson = nlohmann::ordered_json;

std::string record_to_json_line(const AttackRecord& r) {
  ojson j;
  j["schema"] = kRecordSchema;
  j["index"] = r.index;
  j["original_label"] = r.original_label;
  j["target_label"] = r.target_label ? ojson(*r.target_label) : ojson();
  j["status"] = status_name(r.status);
  j["success"] = r.success;
  j["distortion"] = r.distortion ? ojson(*r.distortion) : ojson();
  j["queries"] = r.queries;
  j["iterations"] = r.iterations;
  if (r.wall_ms) j["wall_ms"] = *r.wall_ms;
  j["x_star"] = r.x_star;
  ojson trace = ojson::array();
  for (const TracePoint& p : r.trace) trace.push_back({p.queries, p.g_value});
  j["trace"] = std::move(trace);
  return j.dump();
}

AttackRecord record_from_json_line(const std::string& line) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const ojson::parse_error& e) {
    throw LoadError("record", e.what());
  }
  try {
    if (j.at("schema").get<std::string>() != kRecordSchema) {
      throw LoadError("record.schema", "unsupported schema '" +
                                           j.at("schema").get<std::string>() +
                                           "'");
    }
    AttackRecord r;
    r.index = j.at("index").get<std::size_t>();
    r.original_label = j.at("original_label").get<int>();
    if (!j.at("target_label").is_null()) r.target_label = j["target_label"].get<int>();
    r.status = parse_status(j.at("status").get<std::string>());
    r.success = j.at("success").get<bool>();
    if (!j.at("distortion").is_null()) r.distortion = j["distortion"].get<double>();
    r.queries = j.at("queries").get<std::uint64_t>();
    r.iterations = j.at("iterations").get<int>();
    if (j.contains("wall_ms")) r.wall_ms = j["wall_ms"].get<double>();
    r.x_star = j.at("x_star").get<std::vector<double>>();
    for (const auto& p : j.at("trace")) {
      r.trace.push_back({p.at(0).get<std::uint64_t>(), p.at(1).get<double>()});
    }
    return r;
  } catch (const ojson::exception& e) {
    throw LoadError("record", e.what());
  } catch (const InvalidInput& e) {
    throw LoadError("record.status", e.what());
  }
}

std::string summary_to_json(const SummaryReport& s, const ConfigEcho& config) {
  ojson j;
  j["schema"] = kSummarySchema;
  j["n"] = s.n;
  j["avg_l2"] = s.avg_l2 ? ojson(*s.avg_l2) : ojson();
  j["avg_queries"] = s.avg_queries;
  j["success_rate"] = s.success_rate;
  ojson counts = ojson::object();
  for (const auto& [k, v] : s.status_counts) counts[k] = v;
  j["status_counts"] = std::move(counts);
  ojson cfg = ojson::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = std::move(cfg);
  return j.dump(2) + "\n";
}

SummaryReport summary_from_json(const std::string& text) {
  try {
    ojson j = ojson::parse(text);
    if (j.at("schema").get<std::string>() != kSummarySchema) {
      throw LoadError("summary.schema", "unsupported schema");
    }
    SummaryReport s;
    s.n = j.at("n").get<std::size_t>();
    if (!j.at("avg_l2").is_null()) s.avg_l2 = j["avg_l2"].get<double>();
    s.avg_queries = j.at("avg_queries").get<double>();
    s.success_rate = j.at("success_rate").get<double>();
    for (const auto& [k, v] : j.at("status_counts").items()) {
      s.status_counts[k] = v.get<std::size_t>();
    }
    return s;
  } catch (const ojson::exception& e) {
    throw LoadError("summary", e.what());
  }
}

std::vector<AttackRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open record file " + path.string());
  std::vector<AttackRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json_line(line));
    } catch (const LoadError& e) {
      throw LoadError(path.string() + ":" + std::to_string(line_no), e.what());
    }
  }
  return out;
}

std::filesystem::path records_path(const std::filesystem::path& stem) {
  return std::filesystem::path(stem.string() + ".records.jsonl");
}

std::filesystem::path summary_path(const std::filesystem::path& stem) {
  return std::filesystem::path(stem.string() + ".summary.json");
}

RecordWriter::RecordWriter(const std::filesystem::path& path, bool append)
    : path_(path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  out_.open(path, append ? std::ios::app : std::ios::trunc);
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
}

void RecordWriter::write(const AttackRecord& record) {
  out_ << record_to_json_line(record) << '\n';
  out_.flush();
  if (!out_) throw IoError("write to " + path_.string() + " failed");
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

void emit_report(const SummaryReport& summary,
                 const std::vector<AttackRecord>& records,
                 const std::filesystem::path& stem, const ConfigEcho& config) {
  std::string lines;
  for (const AttackRecord& r : records) lines += record_to_json_line(r) + "\n";
  write_text_file(records_path(stem), lines);
  write_text_file(summary_path(stem), summary_to_json(summary, config));
}

}  // namespace hardlabel
