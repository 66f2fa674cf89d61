#ifndef HARDLABEL_REPORT_HPP
#define HARDLABEL_REPORT_HPP

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "hardlabel/harness.hpp"

namespace hardlabel {

inline constexpr const char* kRecordSchema = "hardlabel.record/1";
inline constexpr const char* kSummarySchema = "hardlabel.summary/1";

/// Flat key/value echo of the configuration stored in the summary file.
using ConfigEcho = std::map<std::string, std::string>;

std::string record_to_json_line(const AttackRecord& record);
/// Throws LoadError on malformed lines or a schema mismatch.
AttackRecord record_from_json_line(const std::string& line);

std::string summary_to_json(const SummaryReport& summary,
                            const ConfigEcho& config);
SummaryReport summary_from_json(const std::string& text);

/// Reads every record of a .jsonl file. Blank lines are skipped.
std::vector<AttackRecord> load_records(const std::filesystem::path& path);

std::filesystem::path records_path(const std::filesystem::path& stem);
std::filesystem::path summary_path(const std::filesystem::path& stem);

/// Appends records one line at a time and flushes after each.
class RecordWriter {
 public:
  /// Truncates unless `append`. Throws IoError when the file cannot be
  /// opened.
  RecordWriter(const std::filesystem::path& path, bool append);
  void write(const AttackRecord& record);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

/// Writes the record file and the summary file for `stem`. Re-emitting the
/// same data yields the same bytes.
void emit_report(const SummaryReport& summary,
                 const std::vector<AttackRecord>& records,
                 const std::filesystem::path& stem, const ConfigEcho& config);

void write_text_file(const std::filesystem::path& path,
                     const std::string& text);

}  // namespace hardlabel

#endif  // HARDLABEL_REPORT_HPP
