#include "promptbench/runner.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "promptbench/error.hpp"

namespace promptbench {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::ConfigInvalid, why); }

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
  for (const auto& [k, v] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      invalid("unknown key '" + k + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    invalid("bad value for '" + std::string(key) + "' in " + where);
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

ProviderModel parse_model(const json& m, std::size_t index) {
  const std::string where = "models[" + std::to_string(index) + "]";
  if (!m.is_object()) invalid(where + " must be an object");
  reject_unknown_keys(m, {"label", "provider", "model", "endpoint", "auth_env", "expected_dim",
                          "extra_params", "wire"},
                      where);
  ProviderModel model;
  const auto kind = get_or<std::string>(m, "provider", "", where);
  auto parsed = provider_kind_from_string(kind);
  if (!parsed) invalid(where + ": unknown provider '" + kind + "'");
  model.kind = *parsed;
  model.model_id = get_or<std::string>(m, "model", "", where);
  if (model.model_id.empty()) invalid(where + ": model must be non-empty");
  model.label = get_or<std::string>(m, "label", "", where);
  model.endpoint_url = get_or<std::string>(m, "endpoint", "", where);
  model.auth_env_var = get_or<std::string>(m, "auth_env", "", where);
  if (m.contains("expected_dim")) {
    const auto dim = get_or<long long>(m, "expected_dim", 0, where);
    if (dim <= 0) invalid(where + ": expected_dim must be positive");
    model.expected_dim = static_cast<std::size_t>(dim);
  }
  if (m.contains("extra_params")) {
    if (!m["extra_params"].is_object()) invalid(where + ": extra_params must be an object");
    model.extra_params = m["extra_params"];
  }
  if (m.contains("wire")) {
    const auto& w = m["wire"];
    if (!w.is_object()) invalid(where + ".wire must be an object");
    reject_unknown_keys(w, {"model_field", "input_field", "embeddings_pointer", "vector_pointer"},
                        where + ".wire");
    model.wire.model_field = get_or<std::string>(w, "model_field", model.wire.model_field, where);
    model.wire.input_field = get_or<std::string>(w, "input_field", model.wire.input_field, where);
    model.wire.embeddings_pointer =
        get_or<std::string>(w, "embeddings_pointer", model.wire.embeddings_pointer, where);
    model.wire.vector_pointer =
        get_or<std::string>(w, "vector_pointer", model.wire.vector_pointer, where);
  }
  if (model.kind == ProviderKind::generic_json && model.endpoint_url.empty()) {
    invalid(where + ": generic_json needs an endpoint");
  }
  return model;
}

std::string iso_time(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

}  // namespace

void RunConfig::validate() const {
  if (models.empty()) invalid("no models configured");
  if (conditions.empty()) invalid("no conditions configured");
  if (datasets.empty()) invalid("no datasets configured");
  std::set<std::string> keys;
  std::set<std::string> labels;
  for (const auto& m : models) {
    if (m.model_id.empty()) invalid("model_id must be non-empty");
    if (!keys.insert(m.model_key()).second) invalid("duplicate model " + m.model_key());
    if (!labels.insert(m.display_name()).second) invalid("duplicate label " + m.display_name());
  }
  std::set<std::string> ids;
  for (const auto& c : conditions) {
    if (!ids.insert(c.id).second) invalid("duplicate condition " + c.id);
  }
  std::set<DatasetName> names;
  for (const auto& d : datasets) {
    if (!names.insert(d.name).second) invalid("duplicate dataset " + std::string(to_string(d.name)));
  }
  if (report_delta && !ids.contains(std::string(condition_id::bare))) {
    invalid("the bare condition is required for delta reporting");
  }
  if (probe.words == 0) invalid("probe.words must be >= 1");
  policy.validate();
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) invalid("config must be a JSON object");
  reject_unknown_keys(doc, {"models", "conditions", "extra_conditions", "datasets", "cache_dir",
                            "output_dir", "policy", "seed", "probe", "report_delta"},
                      "config");
  RunConfig config;

  if (!doc.contains("models") || !doc["models"].is_array()) invalid("models must be an array");
  for (std::size_t i = 0; i < doc["models"].size(); ++i) {
    config.models.push_back(parse_model(doc["models"][i], i));
  }

  std::vector<PromptCondition> extras;
  if (doc.contains("extra_conditions")) {
    if (!doc["extra_conditions"].is_array()) invalid("extra_conditions must be an array");
    for (const auto& e : doc["extra_conditions"]) {
      if (!e.is_object()) invalid("extra_conditions entries must be objects");
      reject_unknown_keys(e, {"id", "template"}, "extra_conditions");
      extras.push_back(make_condition(get_or<std::string>(e, "id", "", "extra_conditions"),
                                      get_or<std::string>(e, "template", "", "extra_conditions")));
    }
  }
  if (doc.contains("conditions")) {
    const auto ids = get_or<std::vector<std::string>>(doc, "conditions", {}, "config");
    for (const auto& id : ids) {
      if (auto c = find_condition(id)) {
        config.conditions.push_back(*c);
        continue;
      }
      auto it = std::find_if(extras.begin(), extras.end(), [&](const auto& e) { return e.id == id; });
      if (it == extras.end()) {
        throw Error(ErrorCode::UnknownCondition, "unknown condition '" + id + "'");
      }
      config.conditions.push_back(*it);
    }
  } else {
    config.conditions = all_conditions();
    config.conditions.insert(config.conditions.end(), extras.begin(), extras.end());
  }

  if (!doc.contains("datasets") || !doc["datasets"].is_object()) {
    invalid("datasets must be an object of name -> path");
  }
  for (auto name : kAllDatasets) {
    const std::string key{to_string(name)};
    if (!doc["datasets"].contains(key)) continue;
    const auto& entry = doc["datasets"][key];
    DatasetSource source{name, {}, {}};
    if (entry.is_string()) {
      source.path = resolve(base_dir, entry.get<std::string>());
    } else if (entry.is_object()) {
      reject_unknown_keys(entry, {"path", "enforce_pair_count"}, "datasets." + key);
      source.path = resolve(base_dir, get_or<std::string>(entry, "path", "", key));
      source.options.enforce_pair_count = get_or<bool>(entry, "enforce_pair_count", true, key);
    } else {
      invalid("datasets." + key + " must be a path or an object");
    }
    config.datasets.push_back(std::move(source));
  }
  for (const auto& [k, v] : doc["datasets"].items()) {
    if (!dataset_from_string(k)) throw Error(ErrorCode::UnknownDataset, "unknown dataset '" + k + "'");
  }

  config.cache_dir = resolve(base_dir, get_or<std::string>(doc, "cache_dir", "cache", "config"));
  config.output_dir =
      resolve(base_dir, get_or<std::string>(doc, "output_dir", "results", "config"));
  config.seed = get_or<std::uint64_t>(doc, "seed", 0, "config");
  config.report_delta = get_or<bool>(doc, "report_delta", true, "config");

  if (doc.contains("policy")) {
    const auto& p = doc["policy"];
    if (!p.is_object()) invalid("policy must be an object");
    reject_unknown_keys(p, {"max_in_flight", "batch_size", "max_retries", "backoff_base_ms",
                            "backoff_cap_ms", "timeout_ms"},
                        "policy");
    auto& pol = config.policy;
    pol.max_in_flight = get_or<std::size_t>(p, "max_in_flight", pol.max_in_flight, "policy");
    pol.batch_size = get_or<std::size_t>(p, "batch_size", pol.batch_size, "policy");
    pol.max_retries = get_or<std::size_t>(p, "max_retries", pol.max_retries, "policy");
    pol.backoff_base = std::chrono::milliseconds(
        get_or<long long>(p, "backoff_base_ms", pol.backoff_base.count(), "policy"));
    pol.backoff_cap = std::chrono::milliseconds(
        get_or<long long>(p, "backoff_cap_ms", pol.backoff_cap.count(), "policy"));
    pol.timeout = std::chrono::milliseconds(
        get_or<long long>(p, "timeout_ms", pol.timeout.count(), "policy"));
  }
  if (doc.contains("probe")) {
    const auto& p = doc["probe"];
    if (!p.is_object()) invalid("probe must be an object");
    reject_unknown_keys(p, {"enabled", "words", "gap_threshold", "degeneracy_threshold"}, "probe");
    config.probe.enabled = get_or<bool>(p, "enabled", true, "probe");
    config.probe.words = get_or<std::size_t>(p, "words", config.probe.words, "probe");
    config.probe.gap_threshold =
        get_or<double>(p, "gap_threshold", config.probe.gap_threshold, "probe");
    config.probe.degeneracy_threshold =
        get_or<double>(p, "degeneracy_threshold", config.probe.degeneracy_threshold, "probe");
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open config " + path.string());
  json doc = json::parse(in, nullptr, false, true);
  if (doc.is_discarded()) invalid("config " + path.string() + " is not valid JSON");
  return parse_run_config(doc, std::filesystem::absolute(path).parent_path());
}

json config_snapshot(const RunConfig& config) {
  json models = json::array();
  for (const auto& m : config.models) {
    json wire = {{"model_field", m.wire.model_field},
                 {"input_field", m.wire.input_field},
                 {"embeddings_pointer", m.wire.embeddings_pointer},
                 {"vector_pointer", m.wire.vector_pointer}};
    models.push_back({{"label", m.display_name()},
                      {"model_key", m.model_key()},
                      {"provider", to_string(m.kind)},
                      {"model", m.model_id},
                      {"endpoint", m.resolved_endpoint()},
                      {"auth_env", m.resolved_auth_env_var()},
                      {"expected_dim", m.expected_dim ? json(*m.expected_dim) : json(nullptr)},
                      {"extra_params", m.extra_params},
                      {"wire", std::move(wire)}});
  }
  json conditions = json::array();
  for (const auto& c : config.conditions) {
    conditions.push_back(
        {{"id", c.id}, {"category", to_string(c.category)}, {"template", c.template_text()}});
  }
  json datasets = json::array();
  for (const auto& d : config.datasets) {
    datasets.push_back({{"name", to_string(d.name)},
                        {"path", d.path.string()},
                        {"enforce_pair_count", d.options.enforce_pair_count}});
  }
  return {{"models", std::move(models)},
          {"conditions", std::move(conditions)},
          {"datasets", std::move(datasets)},
          {"cache_dir", config.cache_dir.string()},
          {"output_dir", config.output_dir.string()},
          {"seed", config.seed},
          {"offline", config.offline},
          {"report_delta", config.report_delta},
          {"policy",
           {{"max_in_flight", config.policy.max_in_flight},
            {"batch_size", config.policy.batch_size},
            {"max_retries", config.policy.max_retries},
            {"backoff_base_ms", config.policy.backoff_base.count()},
            {"backoff_cap_ms", config.policy.backoff_cap.count()},
            {"timeout_ms", config.policy.timeout.count()}}},
          {"probe",
           {{"enabled", config.probe.enabled},
            {"words", config.probe.words},
            {"gap_threshold", config.probe.gap_threshold},
            {"degeneracy_threshold", config.probe.degeneracy_threshold}}}};
}

void apply_filters(RunConfig& config, const std::vector<std::string>& models,
                   const std::vector<std::string>& datasets,
                   const std::vector<std::string>& conditions) {
  auto wanted = [](const std::vector<std::string>& list, const std::string& a,
                   const std::string& b = {}) {
    return std::find(list.begin(), list.end(), a) != list.end() ||
           (!b.empty() && std::find(list.begin(), list.end(), b) != list.end());
  };
  if (!models.empty()) {
    for (const auto& name : models) {
      if (std::none_of(config.models.begin(), config.models.end(), [&](const auto& m) {
            return m.display_name() == name || m.model_id == name;
          })) {
        invalid("--models: no configured model named '" + name + "'");
      }
    }
    std::erase_if(config.models, [&](const ProviderModel& m) {
      return !wanted(models, m.display_name(), m.model_id);
    });
  }
  if (!datasets.empty()) {
    for (const auto& name : datasets) {
      if (!dataset_from_string(name)) throw Error(ErrorCode::UnknownDataset, "unknown dataset '" + name + "'");
    }
    std::erase_if(config.datasets, [&](const DatasetSource& d) {
      return !wanted(datasets, std::string(to_string(d.name)));
    });
  }
  if (!conditions.empty()) {
    for (const auto& id : conditions) {
      if (std::none_of(config.conditions.begin(), config.conditions.end(),
                       [&](const auto& c) { return c.id == id; })) {
        throw Error(ErrorCode::UnknownCondition, "unknown condition '" + id + "'");
      }
    }
    std::erase_if(config.conditions,
                  [&](const PromptCondition& c) { return !wanted(conditions, c.id); });
  }
  config.validate();
}

std::map<DatasetName, Benchmark> load_datasets(const RunConfig& config) {
  std::map<DatasetName, Benchmark> out;
  for (const auto& source : config.datasets) {
    out.emplace(source.name, load_benchmark(source.name, source.path, source.options));
  }
  return out;
}

InputPlan plan_inputs(const RunConfig& config, const std::map<DatasetName, Benchmark>& datasets) {
  InputPlan plan;
  for (const auto& model : config.models) {
    const auto key = model.model_key();
    auto& unique = plan.unique_inputs[key];
    std::set<std::string> seen;
    for (const auto& [name, benchmark] : datasets) {
      const auto vocab = vocabulary(benchmark);
      for (const auto& condition : config.conditions) {
        std::vector<std::string> rendered;
        rendered.reserve(vocab.size());
        for (const auto& word : vocab) {
          rendered.push_back(render(condition, word));
          if (seen.insert(rendered.back()).second) unique.push_back(rendered.back());
        }
        plan.cells.emplace(PlanKey{key, name, condition.id}, std::move(rendered));
      }
    }
  }
  return plan;
}

InputPlan plan_inputs(const RunConfig& config) { return plan_inputs(config, load_datasets(config)); }

json cell_to_json(const RunCell& cell) {
  json j = {{"model_key", cell.model_key},
            {"model_label", cell.model_label},
            {"condition", cell.condition_id},
            {"dataset", to_string(cell.dataset)}};
  if (cell.correlation) {
    j["rho"] = cell.correlation->rho;
    j["n_pairs"] = cell.correlation->n_pairs;
    j["n_tied_groups_model"] = cell.correlation->n_tied_groups_model;
    j["n_tied_groups_gold"] = cell.correlation->n_tied_groups_gold;
    j["error"] = nullptr;
  } else {
    const auto& e = cell.error.value_or(CellError{ErrorCode::ProviderError, "unknown failure"});
    j["rho"] = nullptr;
    j["error"] = {{"code", to_string(e.code)}, {"message", e.message}};
  }
  return j;
}

RunCell cell_from_json(const json& j) {
  try {
    RunCell cell;
    cell.model_key = j.at("model_key").get<std::string>();
    cell.model_label = j.value("model_label", cell.model_key);
    cell.condition_id = j.at("condition").get<std::string>();
    const auto ds = j.at("dataset").get<std::string>();
    auto name = dataset_from_string(ds);
    if (!name) throw Error(ErrorCode::UnknownDataset, "unknown dataset '" + ds + "' in cells");
    cell.dataset = *name;
    if (!j.at("rho").is_null()) {
      cell.correlation = CorrelationResult{j.at("rho").get<double>(), j.at("n_pairs").get<std::size_t>(),
                                           j.value("n_tied_groups_model", std::size_t{0}),
                                           j.value("n_tied_groups_gold", std::size_t{0})};
    } else {
      const auto& e = j.at("error");
      auto code = error_code_from_string(e.at("code").get<std::string>());
      cell.error = CellError{code.value_or(ErrorCode::ProviderError), e.value("message", "")};
    }
    return cell;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("malformed cell record: ") + e.what());
  }
}

json sensitivity_to_json(const SensitivityReport& report) {
  json j = {{"model_key", report.model_key}, {"errors", report.errors}};
  if (report.whitespace) {
    j["whitespace_sensitive"] = report.whitespace->sensitive;
    j["max_whitespace_cosine_gap"] = report.whitespace->max_gap;
    j["worst_word"] = report.whitespace->worst_word;
    j["worst_condition"] = report.whitespace->worst_condition;
  } else {
    j["whitespace_sensitive"] = nullptr;
  }
  j["bare_word_degenerate"] =
      report.bare_word_degenerate ? json(*report.bare_word_degenerate) : json(nullptr);
  json bare = json::object();
  for (const auto& [name, rho] : report.bare_rho_by_dataset) bare[std::string(to_string(name))] = rho;
  j["bare_rho_by_dataset"] = std::move(bare);
  return j;
}

bool RunResult::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const RunCell& c) { return c.ok(); });
}

Runner::Runner(RunConfig config, RunnerOptions options)
    : config_(std::move(config)),
      options_(std::move(options)),
      client_((config_.validate(), config_.policy), options_.client),
      cache_(config_.cache_dir),
      embedder_(cache_, client_, AcquireOptions{config_.offline}) {}

void Runner::log(const std::string& line) const {
  if (options_.log) options_.log(line);
}

SensitivityReport Runner::probe_model(const ProviderModel& model,
                                      const std::map<DatasetName, Benchmark>& datasets,
                                      std::span<const RunCell> cells) {
  SensitivityReport report;
  report.model_key = model.model_key();

  auto source = datasets.find(DatasetName::simlex999);
  if (source == datasets.end()) source = datasets.begin();
  if (source != datasets.end()) {
    const auto words = sample_probe_words(vocabulary(source->second), config_.probe.words, config_.seed);
    try {
      report.whitespace = probe_whitespace(embedder_, model, words, config_.probe.gap_threshold);
    } catch (const std::exception& e) {
      report.errors.push_back(std::string("whitespace probe: ") + e.what());
    }
  }

  for (const auto& cell : cells) {
    if (cell.model_key == report.model_key && cell.condition_id == condition_id::bare && cell.ok()) {
      report.bare_rho_by_dataset[cell.dataset] = cell.correlation->rho;
    }
  }
  if (!report.bare_rho_by_dataset.empty()) {
    report.bare_word_degenerate =
        probe_bare_degeneracy(report.bare_rho_by_dataset, config_.probe.degeneracy_threshold);
  }
  return report;
}

RunResult Runner::execute() {
  const auto started = std::chrono::system_clock::now();
  std::error_code ec;
  std::filesystem::create_directories(config_.output_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output_dir " + config_.output_dir.string() + ": " + ec.message());

  const auto datasets = load_datasets(config_);
  const auto plan = plan_inputs(config_, datasets);
  std::map<DatasetName, Vocabulary> vocabularies;
  for (const auto& [name, b] : datasets) vocabularies.emplace(name, vocabulary(b));

  RunResult result;
  json timings = json::array();
  for (const auto& model : config_.models) {
    const auto key = model.model_key();
    std::optional<CellError> model_error;
    if (!config_.offline) {
      try {
        client_.check_credentials(model);
      } catch (const Error& e) {
        model_error = CellError{e.code(), e.what()};
        log("model " + model.display_name() + ": " + e.what());
      }
    }

    for (const auto& [name, benchmark] : datasets) {
      for (const auto& condition : config_.conditions) {
        RunCell cell;
        cell.model_key = key;
        cell.model_label = model.display_name();
        cell.condition_id = condition.id;
        cell.dataset = name;
        const auto t0 = std::chrono::steady_clock::now();
        if (model_error) {
          cell.error = model_error;
        } else {
          try {
            const auto& inputs = plan.cells.at(PlanKey{key, name, condition.id});
            AcquireStats stats;
            auto vectors = embedder_.embed(model, inputs, &stats);
            cell.cache_hits = stats.cache_hits;
            cell.provider_calls = stats.provider_calls;
            EmbeddingMap embeddings;
            const auto& vocab = vocabularies.at(name);
            for (std::size_t i = 0; i < vocab.size(); ++i) {
              embeddings.emplace(vocab[i], std::move(vectors[i]));
            }
            auto evaluated = evaluate_cell(benchmark, condition, model, embeddings);
            cell.correlation = evaluated.correlation;
          } catch (const Error& e) {
            cell.error = CellError{e.code(), e.what()};
          } catch (const std::exception& e) {
            cell.error = CellError{ErrorCode::ProviderError, e.what()};
          }
        }
        cell.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream line;
        line << model.display_name() << " " << to_string(name) << " " << condition.id << ": ";
        if (cell.ok()) {
          line << "rho=" << cell.correlation->rho;
        } else {
          line << cell.error->message;
        }
        log(line.str());
        timings.push_back({{"model_key", key},
                           {"condition", condition.id},
                           {"dataset", to_string(name)},
                           {"wall_time_ms", cell.wall_time_ms},
                           {"cache_hits", cell.cache_hits},
                           {"provider_calls", cell.provider_calls}});
        result.cells.push_back(std::move(cell));
      }
    }
  }

  json models_meta = json::array();
  json violations = json::array();
  for (const auto& model : config_.models) {
    if (config_.probe.enabled) {
      auto report = probe_model(model, datasets, result.cells);
      for (auto& v : check_whitespace_consistency(report, result.cells)) violations.push_back(v);
      result.probes.push_back(std::move(report));
    }
    const auto key = model.model_key();
    models_meta.push_back({{"model_key", key},
                           {"label", model.display_name()},
                           {"provider_reported", client_.provider_meta(key).value_or("")},
                           {"extra_params", model.extra_params}});
  }

  json probes = json::array();
  for (const auto& p : result.probes) probes.push_back(sensitivity_to_json(p));
  const auto finished = std::chrono::system_clock::now();
  std::size_t failed = 0;
  for (const auto& c : result.cells) failed += c.ok() ? 0 : 1;

  result.manifest = {{"harness_version", kHarnessVersion},
                     {"config", config_snapshot(config_)},
                     {"started_at", iso_time(started)},
                     {"finished_at", iso_time(finished)},
                     {"models", std::move(models_meta)},
                     {"probes", std::move(probes)},
                     {"whitespace_consistency_violations", std::move(violations)},
                     {"cells_total", result.cells.size()},
                     {"cells_failed", failed},
                     {"provider_calls", client_.provider_calls()}};

  std::string cells_text;
  for (const auto& c : result.cells) cells_text += cell_to_json(c).dump() + "\n";
  std::string timings_text;
  for (const auto& t : timings) timings_text += t.dump() + "\n";
  write_text(config_.output_dir / "cells.jsonl", cells_text);
  write_text(config_.output_dir / "timings.jsonl", timings_text);
  write_text(config_.output_dir / "manifest.json", result.manifest.dump(2) + "\n");
  return result;
}

std::vector<SensitivityReport> Runner::probe() {
  const auto datasets = load_datasets(config_);
  std::vector<SensitivityReport> reports;
  for (const auto& model : config_.models) reports.push_back(probe_model(model, datasets, {}));
  return reports;
}

RunOutput read_run_output(const std::filesystem::path& output_dir) {
  RunOutput out;
  std::ifstream cells(output_dir / "cells.jsonl");
  if (!cells) throw Error(ErrorCode::MissingFile, "no cells.jsonl in " + output_dir.string());
  std::string line;
  while (std::getline(cells, line)) {
    if (line.empty()) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::ConfigInvalid, "malformed line in cells.jsonl");
    out.cells.push_back(cell_from_json(j));
  }
  std::ifstream manifest(output_dir / "manifest.json");
  if (manifest) {
    out.manifest = json::parse(manifest, nullptr, false);
    if (out.manifest.is_discarded()) throw Error(ErrorCode::ConfigInvalid, "malformed manifest.json");
  }
  std::ifstream timings(output_dir / "timings.jsonl");
  while (timings && std::getline(timings, line)) {
    auto t = json::parse(line, nullptr, false);
    if (t.is_discarded() || !t.is_object()) continue;
    for (auto& c : out.cells) {
      if (c.model_key == t.value("model_key", "") && c.condition_id == t.value("condition", "") &&
          to_string(c.dataset) == t.value("dataset", "")) {
        c.wall_time_ms = t.value("wall_time_ms", 0.0);
        c.cache_hits = t.value("cache_hits", std::size_t{0});
        c.provider_calls = t.value("provider_calls", std::uint64_t{0});
      }
    }
  }
  return out;
}

}  // namespace promptbench
