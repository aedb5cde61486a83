#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "promptbench/datasets.hpp"
#include "promptbench/metrics.hpp"
#include "promptbench/providers.hpp"

namespace promptbench {

inline constexpr double kDefaultGapThreshold = 1e-9;
inline constexpr double kDefaultDegeneracyThreshold = 0.15;
inline constexpr std::size_t kDefaultProbeWords = 32;

struct WhitespaceProbe {
  /// 1 - min cosine between any space variant and the bare embedding.
  double max_gap = 0.0;
  bool sensitive = false;
  std::string worst_word;
  std::string worst_condition;
};

struct SensitivityReport {
  std::string model_key;
  std::optional<WhitespaceProbe> whitespace;
  std::optional<bool> bare_word_degenerate;
  std::map<DatasetName, double> bare_rho_by_dataset;
  /// Populated when a probe could not run (provider failure etc.).
  std::vector<std::string> errors;
};

/// Deterministic sample of up to `count` words (mt19937_64 partial
/// Fisher-Yates over the sorted vocabulary).
std::vector<std::string> sample_probe_words(const Vocabulary& vocabulary, std::size_t count,
                                            std::uint64_t seed);

/// Embeds every probe word under the four formatting conditions and compares
/// each space variant to bare. Sensitive iff max_gap > gap_threshold.
WhitespaceProbe probe_whitespace(Embedder& embedder, const ProviderModel& model,
                                 std::span<const std::string> probe_words,
                                 double gap_threshold = kDefaultGapThreshold);

/// True iff every available bare rho is strictly below the threshold.
/// Throws NoCells for an empty map.
bool probe_bare_degeneracy(const std::map<DatasetName, double>& bare_rho,
                           double degeneracy_threshold = kDefaultDegeneracyThreshold);

/// For a model classified whitespace-insensitive, the formatting-condition
/// cells on each dataset must agree to full precision. Returns one message
/// per violation.
std::vector<std::string> check_whitespace_consistency(const SensitivityReport& report,
                                                      std::span<const RunCell> cells);

}  // namespace promptbench
