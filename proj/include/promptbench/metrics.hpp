#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "promptbench/datasets.hpp"
#include "promptbench/error.hpp"
#include "promptbench/prompts.hpp"
#include "promptbench/providers.hpp"

namespace promptbench {

struct CorrelationResult {
  double rho = 0.0;
  std::size_t n_pairs = 0;
  std::size_t n_tied_groups_model = 0;
  std::size_t n_tied_groups_gold = 0;

  friend bool operator==(const CorrelationResult&, const CorrelationResult&) = default;
};

struct SimilarityRecord {
  WordPair pair;
  double model_similarity = 0.0;
  double gold_score = 0.0;
};

/// dot(a, b) / (|a| |b|) in double precision, clamped to [-1, 1].
double cosine(std::span<const double> a, std::span<const double> b);
inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  return cosine(a.values, b.values);
}

/// Average ranks (1-based); tied values share the mean of their positions.
/// `tied_groups`, when given, receives the number of groups of size > 1.
std::vector<double> fractional_ranks(std::span<const double> values,
                                     std::size_t* tied_groups = nullptr);

/// Pearson correlation of fractional ranks.
/// Throws LengthMismatch, DegenerateInput (n < 2, or a constant side) and
/// NonFiniteVector for non-finite scores.
CorrelationResult spearman(std::span<const double> model_scores,
                           std::span<const double> gold_scores);

struct CellError {
  ErrorCode code;
  std::string message;
};

/// One (model, condition, dataset) result. Exactly one of correlation and
/// error is set.
struct RunCell {
  std::string model_key;
  std::string model_label;
  std::string condition_id;
  DatasetName dataset = DatasetName::simlex999;
  std::optional<CorrelationResult> correlation;
  std::optional<CellError> error;
  double wall_time_ms = 0.0;
  std::size_t cache_hits = 0;
  std::uint64_t provider_calls = 0;

  bool ok() const { return correlation.has_value(); }
};

/// word -> embedding of that word rendered under one condition.
using EmbeddingMap = std::unordered_map<std::string, EmbeddingVector>;

std::vector<SimilarityRecord> similarity_records(const Benchmark& benchmark,
                                                 const PromptCondition& condition,
                                                 const EmbeddingMap& embeddings);

/// Spearman rho between pair cosines and gold scores, pairs in file order.
/// Throws MissingEmbedding naming the first absent word.
RunCell evaluate_cell(const Benchmark& benchmark, const PromptCondition& condition,
                      const ProviderModel& model, const EmbeddingMap& embeddings);

struct ConditionScore {
  std::string condition_id;
  double rho = 0.0;
};

struct DeltaSummary {
  std::string best_condition;
  double best_rho = 0.0;
  double bare_rho = 0.0;
  double delta = 0.0;
  /// Other conditions whose rho equals best_rho exactly (later in order).
  std::vector<std::string> tied_with_best;
};

/// Best over all conditions (bare included) and its gain over bare. Ties go
/// to the condition that comes first in the canonical order.
DeltaSummary delta_vs_bare(std::span<const ConditionScore> scores);

}  // namespace promptbench
