#include "promptbench/probes.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "promptbench/error.hpp"
#include "promptbench/prompts.hpp"

namespace promptbench {

std::vector<std::string> sample_probe_words(const Vocabulary& vocabulary, std::size_t count,
                                            std::uint64_t seed) {
  std::vector<std::string> pool(vocabulary.begin(), vocabulary.end());
  std::sort(pool.begin(), pool.end());
  count = std::min(count, pool.size());
  std::mt19937_64 engine(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(engine() % (pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

WhitespaceProbe probe_whitespace(Embedder& embedder, const ProviderModel& model,
                                 std::span<const std::string> probe_words, double gap_threshold) {
  if (probe_words.empty()) throw Error(ErrorCode::EmptyInput, "no probe words");
  const auto variants = formatting_conditions();

  std::vector<std::string> inputs;
  inputs.reserve(probe_words.size() * variants.size());
  for (const auto& condition : variants) {
    for (const auto& word : probe_words) inputs.push_back(render(condition, word));
  }
  const auto vectors = embedder.embed(model, inputs);

  WhitespaceProbe probe;
  const std::size_t n = probe_words.size();
  for (std::size_t c = 1; c < variants.size(); ++c) {
    for (std::size_t w = 0; w < n; ++w) {
      const double gap = 1.0 - cosine(vectors[w], vectors[c * n + w]);
      if (gap > probe.max_gap || probe.worst_word.empty()) {
        probe.max_gap = std::max(gap, 0.0);
        probe.worst_word = probe_words[w];
        probe.worst_condition = variants[c].id;
      }
    }
  }
  probe.sensitive = probe.max_gap > gap_threshold;
  return probe;
}

bool probe_bare_degeneracy(const std::map<DatasetName, double>& bare_rho,
                           double degeneracy_threshold) {
  if (bare_rho.empty()) throw Error(ErrorCode::NoCells, "no bare cells to judge");
  return std::all_of(bare_rho.begin(), bare_rho.end(),
                     [&](const auto& kv) { return kv.second < degeneracy_threshold; });
}

std::vector<std::string> check_whitespace_consistency(const SensitivityReport& report,
                                                      std::span<const RunCell> cells) {
  std::vector<std::string> violations;
  if (!report.whitespace || report.whitespace->sensitive) return violations;

  for (auto dataset : kAllDatasets) {
    std::optional<double> reference;
    std::string reference_condition;
    for (const auto& condition : formatting_conditions()) {
      auto it = std::find_if(cells.begin(), cells.end(), [&](const RunCell& cell) {
        return cell.model_key == report.model_key && cell.dataset == dataset &&
               cell.condition_id == condition.id && cell.ok();
      });
      if (it == cells.end()) continue;
      const double rho = it->correlation->rho;
      if (!reference) {
        reference = rho;
        reference_condition = condition.id;
      } else if (rho != *reference) {
        std::ostringstream msg;
        msg.precision(17);
        msg << report.model_key << " probed whitespace-insensitive but " << to_string(dataset)
            << " " << condition.id << " rho " << rho << " != " << reference_condition << " rho "
            << *reference;
        violations.push_back(msg.str());
      }
    }
  }
  return violations;
}

}  // namespace promptbench
