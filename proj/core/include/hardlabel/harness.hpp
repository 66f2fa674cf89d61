#ifndef HARDLABEL_HARNESS_HPP
#define HARDLABEL_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hardlabel/dataset.hpp"
#include "hardlabel/oracle.hpp"
#include "hardlabel/rgf.hpp"

namespace hardlabel {

struct AttackMode {
  enum class Kind { kUntargeted, kTargetedNext, kTargetedFixed };
  Kind kind = Kind::kUntargeted;
  int fixed_target = 0;

  /// "untargeted", "targeted-next" or "targeted=T".
  static AttackMode parse(std::string_view text);
  std::string to_string() const;
  bool targeted() const { return kind != Kind::kUntargeted; }
};

/// next-class: (y0 + 1) mod K; fixed: the configured target; untargeted:
/// nullopt. Throws ConfigError for K < 2 in targeted modes, for a fixed
/// target equal to y0, or for a target outside [0, K).
std::optional<Label> assign_target(Label original, const AttackMode& mode,
                                   int num_classes);

struct SelectedExample {
  std::size_t index = 0;
  DatasetRecord record;
};

/// Samples n records without replacement, skipping any the oracle already
/// misclassifies. Deterministic in seed. Uses an uncounted clone for the
/// correctness checks. Throws ConfigError naming the shortfall when fewer
/// than n correctly classified records exist.
std::vector<SelectedExample> select_examples(const Dataset& dataset,
                                             const Oracle& oracle,
                                             std::size_t n,
                                             std::uint64_t seed);

/// Mixes a master seed with an example index (splitmix64 finaliser).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

struct AttackRecord {
  std::size_t index = 0;
  int original_label = 0;
  std::optional<int> target_label;
  AttackStatus status = AttackStatus::kInitFailed;
  bool success = false;  // x_star re-verified against the predicate
  std::optional<double> distortion;
  std::uint64_t queries = 0;
  int iterations = 0;
  std::optional<double> wall_ms;
  std::vector<double> x_star;
  std::vector<TracePoint> trace;
};

struct SummaryReport {
  std::size_t n = 0;
  std::optional<double> avg_l2;  // over successful attacks only
  double avg_queries = 0.0;
  double success_rate = 0.0;
  std::map<std::string, std::size_t> status_counts;

  friend bool operator==(const SummaryReport&, const SummaryReport&) = default;
};

/// Throws InvalidInput on an empty record list.
SummaryReport summarize(const std::vector<AttackRecord>& records);

/// Keeps at most `cap` points, evenly spaced, always including the first
/// and last. cap == 0 disables capping.
std::vector<TracePoint> cap_trace(const std::vector<TracePoint>& trace,
                                  std::size_t cap);

struct BatchConfig {
  AttackMode mode;
  std::size_t n_examples = 1;
  RgfConfig rgf;
  std::uint64_t seed = 0;
  int workers = 1;
  std::size_t trace_cap = 256;
  bool record_timing = false;
  /// Indices already present in a previous record file.
  std::vector<std::size_t> skip_indices;
};

/// Called in selection order, from one thread at a time.
using RecordSink = std::function<void(const AttackRecord&)>;

/// Attacks the selected examples of `dataset` with per-example handles on
/// `prototype`'s model. Candidates for initialisation are the other
/// dataset records. Records are delivered to `sink` in selection order
/// regardless of worker count; the returned vector holds the new records.
std::vector<AttackRecord> run_batch(const Oracle& prototype,
                                    const Dataset& dataset,
                                    const BatchConfig& config,
                                    const RecordSink& sink = {});

/// Attacks one example and re-verifies the result with an uncounted clone.
AttackRecord attack_example(const Oracle& prototype, const Dataset& dataset,
                            const SelectedExample& example,
                            const BatchConfig& config);

struct ExperimentConfig {
  std::filesystem::path model_path;
  std::filesystem::path dataset_path;
  bool skip_header = false;
  BatchConfig batch;
  /// Report stem; files are <stem>.records.jsonl and <stem>.summary.json.
  std::filesystem::path report_stem = "report";
  bool resume = false;

  void validate() const;
};

struct ExperimentOutcome {
  SummaryReport summary;
  std::vector<AttackRecord> records;  // all records, including resumed ones
  std::filesystem::path records_path;
  std::filesystem::path summary_path;
};

/// Loads model and dataset, runs the batch streaming records to disk, then
/// writes the summary.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

/// Resolves a report stem against HARDLABEL_REPORT_DIR when the stem is
/// relative and the variable is set.
std::filesystem::path resolve_report_stem(const std::filesystem::path& stem);

}  // namespace hardlabel

#endif  // HARDLABEL_HARNESS_HPP
