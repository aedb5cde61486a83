#include "promptbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace promptbench {

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "cosine of vectors with dimensions " +
                                                  std::to_string(a.size()) + " and " +
                                                  std::to_string(b.size()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine with a zero vector");
  // sqrt(x * x) == x exactly, so cosine(v, v) is exactly 1
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

std::vector<double> fractional_ranks(std::span<const double> values, std::size_t* tied_groups) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });

  std::vector<double> ranks(n);
  std::size_t groups = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i+1 .. j share their mean
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    if (j - i > 1) ++groups;
    i = j;
  }
  if (tied_groups) *tied_groups = groups;
  return ranks;
}

CorrelationResult spearman(std::span<const double> model_scores,
                           std::span<const double> gold_scores) {
  if (model_scores.size() != gold_scores.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(model_scores.size()) +
                                               " model scores vs " +
                                               std::to_string(gold_scores.size()) + " gold scores");
  }
  const std::size_t n = model_scores.size();
  if (n < 2) throw Error(ErrorCode::DegenerateInput, "need at least two pairs");
  for (auto side : {model_scores, gold_scores}) {
    for (double v : side) {
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteVector, "non-finite score");
    }
  }

  CorrelationResult result;
  result.n_pairs = n;
  const auto rx = fractional_ranks(model_scores, &result.n_tied_groups_model);
  const auto ry = fractional_ranks(gold_scores, &result.n_tied_groups_gold);

  const double mean = 0.5 * static_cast<double>(n + 1);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw Error(ErrorCode::DegenerateInput, "model scores are constant");
  if (syy == 0.0) throw Error(ErrorCode::DegenerateInput, "gold scores are constant");
  result.rho = std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
  return result;
}

std::vector<SimilarityRecord> similarity_records(const Benchmark& benchmark,
                                                 const PromptCondition& condition,
                                                 const EmbeddingMap& embeddings) {
  auto lookup = [&](const std::string& word) -> const EmbeddingVector& {
    auto it = embeddings.find(word);
    if (it == embeddings.end()) {
      throw Error(ErrorCode::MissingEmbedding, "no embedding for '" + word + "' under " +
                                                   condition.id + " on " +
                                                   std::string(to_string(benchmark.name)));
    }
    if (it->second.input_text != render(condition, word)) {
      throw Error(ErrorCode::MissingEmbedding,
                  "embedding for '" + word + "' was computed from '" + it->second.input_text +
                      "', expected '" + render(condition, word) + "'");
    }
    return it->second;
  };

  std::vector<SimilarityRecord> records;
  records.reserve(benchmark.pairs.size());
  for (const auto& pair : benchmark.pairs) {
    const auto& a = lookup(pair.word_a);
    const auto& b = lookup(pair.word_b);
    records.push_back({pair, cosine(a, b), pair.gold_score});
  }
  return records;
}

RunCell evaluate_cell(const Benchmark& benchmark, const PromptCondition& condition,
                      const ProviderModel& model, const EmbeddingMap& embeddings) {
  const auto records = similarity_records(benchmark, condition, embeddings);
  std::vector<double> sims;
  std::vector<double> gold;
  sims.reserve(records.size());
  gold.reserve(records.size());
  for (const auto& r : records) {
    sims.push_back(r.model_similarity);
    gold.push_back(r.gold_score);
  }
  RunCell cell;
  cell.model_key = model.model_key();
  cell.model_label = model.display_name();
  cell.condition_id = condition.id;
  cell.dataset = benchmark.name;
  cell.correlation = spearman(sims, gold);
  return cell;
}

DeltaSummary delta_vs_bare(std::span<const ConditionScore> scores) {
  std::vector<const ConditionScore*> ordered;
  ordered.reserve(scores.size());
  for (const auto& s : scores) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto* l, const auto* r) {
    return canonical_rank(l->condition_id) < canonical_rank(r->condition_id);
  });

  auto bare = std::find_if(ordered.begin(), ordered.end(),
                           [](const auto* s) { return s->condition_id == condition_id::bare; });
  if (bare == ordered.end()) throw Error(ErrorCode::MissingBareCell, "no bare condition score");

  DeltaSummary out;
  const ConditionScore* best = ordered.front();
  for (const auto* s : ordered) {
    if (s->rho > best->rho) best = s;
  }
  for (const auto* s : ordered) {
    if (s != best && s->rho == best->rho) {
      out.tied_with_best.push_back(s->condition_id);
    }
  }
  out.best_condition = best->condition_id;
  out.best_rho = best->rho;
  out.bare_rho = (*bare)->rho;
  out.delta = out.best_rho - out.bare_rho;
  return out;
}

}  // namespace promptbench
