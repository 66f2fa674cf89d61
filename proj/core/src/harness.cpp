#include "hardlabel/harness.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "hardlabel/model_io.hpp"
#include "hardlabel/report.hpp"

namespace hardlabel {

AttackMode AttackMode::parse(std::string_view text) {
  AttackMode m;
  if (text == "untargeted") return m;
  if (text == "targeted-next") {
    m.kind = Kind::kTargetedNext;
    return m;
  }
  constexpr std::string_view prefix = "targeted=";
  if (text.substr(0, prefix.size()) == prefix) {
    std::string_view num = text.substr(prefix.size());
    int t = -1;
    auto res = std::from_chars(num.data(), num.data() + num.size(), t);
    if (res.ec != std::errc() || res.ptr != num.data() + num.size() || t < 0) {
      throw ConfigError("mode: bad target in '" + std::string(text) + "'");
    }
    m.kind = Kind::kTargetedFixed;
    m.fixed_target = t;
    return m;
  }
  throw ConfigError("mode: expected untargeted, targeted-next or targeted=T, "
                    "got '" + std::string(text) + "'");
}

std::string AttackMode::to_string() const {
  switch (kind) {
    case Kind::kUntargeted: return "untargeted";
    case Kind::kTargetedNext: return "targeted-next";
    case Kind::kTargetedFixed: return "targeted=" + std::to_string(fixed_target);
  }
  return "untargeted";
}

std::optional<Label> assign_target(Label original, const AttackMode& mode,
                                   int num_classes) {
  if (!mode.targeted()) return std::nullopt;
  if (num_classes < 2) throw ConfigError("targeted attack needs K >= 2");
  if (mode.kind == AttackMode::Kind::kTargetedNext) {
    return Label{(original.value + 1) % num_classes};
  }
  if (mode.fixed_target >= num_classes) {
    throw ConfigError("target " + std::to_string(mode.fixed_target) +
                      " outside [0, " + std::to_string(num_classes) + ")");
  }
  if (mode.fixed_target == original.value) {
    throw ConfigError("target " + std::to_string(mode.fixed_target) +
                      " equals the original label");
  }
  return Label{mode.fixed_target};
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<SelectedExample> select_examples(const Dataset& dataset,
                                             const Oracle& oracle,
                                             std::size_t n,
                                             std::uint64_t seed) {
  if (dataset.empty()) throw ConfigError("select: dataset is empty");
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng() % i]);
  }
  Oracle probe = oracle.uncounted();
  std::vector<SelectedExample> out;
  for (std::size_t idx : order) {
    if (out.size() == n) break;
    const DatasetRecord& r = dataset.records[idx];
    if (probe.classify(r.x) == r.label) out.push_back({idx, r});
  }
  if (out.size() < n) {
    throw ConfigError("select: requested " + std::to_string(n) +
                      " examples but only " + std::to_string(out.size()) +
                      " are correctly classified (shortfall " +
                      std::to_string(n - out.size()) + ")");
  }
  return out;
}

SummaryReport summarize(const std::vector<AttackRecord>& records) {
  if (records.empty()) throw InvalidInput("summarize: no records");
  SummaryReport s;
  s.n = records.size();
  double l2 = 0.0;
  double queries = 0.0;
  std::size_t successes = 0;
  for (const AttackRecord& r : records) {
    queries += static_cast<double>(r.queries);
    ++s.status_counts[std::string(status_name(r.status))];
    if (r.success && r.distortion) {
      l2 += *r.distortion;
      ++successes;
    }
  }
  s.avg_queries = queries / static_cast<double>(s.n);
  s.success_rate = static_cast<double>(successes) / static_cast<double>(s.n);
  if (successes > 0) s.avg_l2 = l2 / static_cast<double>(successes);
  return s;
}

std::vector<TracePoint> cap_trace(const std::vector<TracePoint>& trace,
                                  std::size_t cap) {
  if (cap == 0 || trace.size() <= cap) return trace;
  if (cap == 1) return {trace.back()};
  std::vector<TracePoint> out;
  out.reserve(cap);
  const std::size_t last = trace.size() - 1;
  for (std::size_t i = 0; i < cap; ++i) {
    out.push_back(trace[i * last / (cap - 1)]);
  }
  return out;
}

AttackRecord attack_example(const Oracle& prototype, const Dataset& dataset,
                            const SelectedExample& example,
                            const BatchConfig& config) {
  AttackRecord rec;
  rec.index = example.index;
  rec.original_label = example.record.label.value;
  const auto started = std::chrono::steady_clock::now();

  Oracle oracle = prototype.fresh();
  try {
    std::optional<Label> target = assign_target(example.record.label,
                                                config.mode,
                                                prototype.num_classes());
    if (target) rec.target_label = target->value;
    AdversarialPredicate pred = target
                                    ? AdversarialPredicate::targeted(*target)
                                    : AdversarialPredicate::untargeted(
                                          example.record.label);
    RgfConfig rgf = config.rgf;
    rgf.seed = derive_seed(config.seed, example.index);
    AttackResult result =
        rgf_attack(oracle, example.record.x, pred, dataset.records, rgf);

    rec.status = result.status;
    rec.iterations = result.iterations;
    rec.trace = cap_trace(result.trace, config.trace_cap);
    if (result.has_adversarial()) {
      rec.x_star = result.x_star;
      rec.distortion = result.distortion;
      Oracle verify = prototype.uncounted();
      rec.success = pred.holds(verify.classify(result.x_star));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error&) {
    rec.status = AttackStatus::kInitFailed;
  }
  rec.queries = oracle.query_count();
  if (config.record_timing) {
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - started)
                      .count();
  }
  return rec;
}

std::vector<AttackRecord> run_batch(const Oracle& prototype,
                                    const Dataset& dataset,
                                    const BatchConfig& config,
                                    const RecordSink& sink) {
  if (config.n_examples < 1) throw ConfigError("n_examples must be >= 1");
  if (config.workers < 1) throw ConfigError("workers must be >= 1");
  config.rgf.validate();

  std::vector<SelectedExample> selected =
      select_examples(dataset, prototype, config.n_examples, config.seed);
  if (!config.skip_indices.empty()) {
    std::set<std::size_t> skip(config.skip_indices.begin(),
                               config.skip_indices.end());
    std::erase_if(selected, [&](const SelectedExample& e) {
      return skip.count(e.index) > 0;
    });
  }

  const std::size_t m = selected.size();
  std::vector<std::optional<AttackRecord>> slots(m);
  std::vector<AttackRecord> out;
  out.reserve(m);
  std::mutex mu;
  std::size_t next_emit = 0;
  std::atomic<std::size_t> next_job{0};
  std::atomic<bool> abort{false};
  std::exception_ptr error;

  auto work = [&] {
    while (!abort.load()) {
      std::size_t i = next_job.fetch_add(1);
      if (i >= m) return;
      try {
        AttackRecord rec = attack_example(prototype, dataset, selected[i], config);
        std::lock_guard lock(mu);
        slots[i] = std::move(rec);
        // Emit the completed prefix so output order is selection order.
        while (next_emit < m && slots[next_emit]) {
          if (sink) sink(*slots[next_emit]);
          out.push_back(std::move(*slots[next_emit]));
          slots[next_emit].reset();
          ++next_emit;
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        abort.store(true);
        return;
      }
    }
  };

  const int n_threads = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(config.workers),
                            std::max<std::size_t>(m, 1)));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  return out;
}

void ExperimentConfig::validate() const {
  if (batch.n_examples < 1) throw ConfigError("n must be at least 1");
  if (batch.workers < 1) throw ConfigError("workers must be at least 1");
  if (!std::filesystem::exists(model_path)) {
    throw ConfigError("model file not found: " + model_path.string());
  }
  if (!std::filesystem::exists(dataset_path)) {
    throw ConfigError("dataset file not found: " + dataset_path.string());
  }
  batch.rgf.validate();
}

std::filesystem::path resolve_report_stem(const std::filesystem::path& stem) {
  const char* dir = std::getenv("HARDLABEL_REPORT_DIR");
  if (dir && *dir && stem.is_relative()) return std::filesystem::path(dir) / stem;
  return stem;
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ConfigEcho echo(const ExperimentConfig& c) {
  const RgfConfig& r = c.batch.rgf;
  return {
      {"model", c.model_path.string()},
      {"dataset", c.dataset_path.string()},
      {"mode", c.batch.mode.to_string()},
      {"n", std::to_string(c.batch.n_examples)},
      {"budget", std::to_string(r.query_budget)},
      {"beta", fmt_double(r.beta)},
      {"q", std::to_string(r.q)},
      {"tolerance", fmt_double(r.distance_params.tolerance)},
      {"tolerance_mode", r.distance_params.tolerance_mode == ToleranceMode::kRelative
                             ? "relative"
                             : "absolute"},
      {"max_iterations", std::to_string(r.max_iterations)},
      {"seed", std::to_string(c.batch.seed)},
  };
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
  config.validate();
  Oracle oracle = load_model(config.model_path);
  DatasetOptions opts;
  opts.skip_header = config.skip_header;
  opts.num_classes = oracle.num_classes();
  Dataset dataset = load_dataset(config.dataset_path, opts);
  if (dataset.empty()) throw ConfigError("dataset has no records");

  ExperimentOutcome outcome;
  const std::filesystem::path stem = resolve_report_stem(config.report_stem);
  outcome.records_path = records_path(stem);
  outcome.summary_path = summary_path(stem);

  BatchConfig batch = config.batch;
  std::vector<AttackRecord> previous;
  const bool resuming = config.resume && std::filesystem::exists(outcome.records_path);
  if (resuming) {
    previous = load_records(outcome.records_path);
    for (const AttackRecord& r : previous) batch.skip_indices.push_back(r.index);
  }

  RecordWriter writer(outcome.records_path, resuming);
  std::vector<AttackRecord> fresh = run_batch(
      oracle, dataset, batch, [&](const AttackRecord& r) { writer.write(r); });

  outcome.records = std::move(previous);
  for (auto& r : fresh) outcome.records.push_back(std::move(r));
  outcome.summary = summarize(outcome.records);
  write_text_file(outcome.summary_path,
                  summary_to_json(outcome.summary, echo(config)));
  return outcome;
}

}  // namespace hardlabel
