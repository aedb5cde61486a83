#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptbench/cache.hpp"
#include "promptbench/datasets.hpp"
#include "promptbench/metrics.hpp"
#include "promptbench/probes.hpp"
#include "promptbench/prompts.hpp"
#include "promptbench/providers.hpp"

namespace promptbench {

inline constexpr std::string_view kHarnessVersion = "1.0.0";

struct DatasetSource {
  DatasetName name;
  std::filesystem::path path;
  LoadOptions options;
};

struct ProbeSettings {
  bool enabled = true;
  std::size_t words = kDefaultProbeWords;
  double gap_threshold = kDefaultGapThreshold;
  double degeneracy_threshold = kDefaultDegeneracyThreshold;
};

struct RunConfig {
  std::vector<ProviderModel> models;
  std::vector<PromptCondition> conditions;
  std::vector<DatasetSource> datasets;
  std::filesystem::path cache_dir;
  std::filesystem::path output_dir;
  RequestPolicy policy;
  std::uint64_t seed = 0;
  ProbeSettings probe;
  bool report_delta = true;
  bool offline = false;

  /// Throws ConfigInvalid.
  void validate() const;
};

/// JSON config; relative paths resolve against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
/// Snapshot for the manifest. Contains no credentials, only variable names.
nlohmann::json config_snapshot(const RunConfig& config);

/// Restricts the config to the named models (label or model_id), datasets
/// and conditions. Empty lists leave that axis untouched.
void apply_filters(RunConfig& config, const std::vector<std::string>& models,
                   const std::vector<std::string>& datasets,
                   const std::vector<std::string>& conditions);

struct PlanKey {
  std::string model_key;
  DatasetName dataset;
  std::string condition_id;
  auto operator<=>(const PlanKey&) const = default;
};

struct InputPlan {
  /// Rendered strings per cell, in vocabulary order.
  std::map<PlanKey, std::vector<std::string>> cells;
  /// Per model key: every distinct rendered string across datasets and
  /// conditions, in first-planned order.
  std::map<std::string, std::vector<std::string>> unique_inputs;
};

std::map<DatasetName, Benchmark> load_datasets(const RunConfig& config);
InputPlan plan_inputs(const RunConfig& config, const std::map<DatasetName, Benchmark>& datasets);
InputPlan plan_inputs(const RunConfig& config);

nlohmann::json cell_to_json(const RunCell& cell);
RunCell cell_from_json(const nlohmann::json& j);
nlohmann::json sensitivity_to_json(const SensitivityReport& report);

struct RunResult {
  std::vector<RunCell> cells;
  std::vector<SensitivityReport> probes;
  nlohmann::json manifest;
  bool all_ok() const;
};

struct RunnerOptions {
  ClientOptions client;
  std::function<void(const std::string&)> log;
};

class Runner {
 public:
  explicit Runner(RunConfig config, RunnerOptions options = {});

  /// Every (model, condition, dataset) cell. Provider failures become error
  /// cells. Writes cells.jsonl, timings.jsonl and manifest.json to
  /// output_dir. Throws only for invalid config, unloadable datasets or an
  /// unwritable output_dir.
  RunResult execute();

  /// Sensitivity probes only (no grid).
  std::vector<SensitivityReport> probe();

  EmbeddingClient& client() { return client_; }
  const RunConfig& config() const { return config_; }

 private:
  SensitivityReport probe_model(const ProviderModel& model,
                                const std::map<DatasetName, Benchmark>& datasets,
                                std::span<const RunCell> cells);
  void log(const std::string& line) const;

  RunConfig config_;
  RunnerOptions options_;
  EmbeddingClient client_;
  EmbeddingCache cache_;
  CachedEmbedder embedder_;
};

/// Persisted output of one run.
struct RunOutput {
  std::vector<RunCell> cells;
  nlohmann::json manifest;
};

RunOutput read_run_output(const std::filesystem::path& output_dir);

}  // namespace promptbench
