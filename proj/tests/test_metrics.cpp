#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "reference_tables.hpp"
#include "promptbench/error.hpp"
#include "promptbench/metrics.hpp"

using namespace promptbench;
namespace t = promptbench::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no promptbench::Error thrown";
  return ErrorCode::IoError;
}

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, bool ties) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<double> v(n);
  for (auto& x : v) x = ties ? std::round(u(rng)) : u(rng);
  return v;
}

ProviderModel mock_model() {
  ProviderModel m;
  m.model_id = "m";
  return m;
}

EmbeddingVector vec(std::vector<double> v, const std::string& input) {
  return EmbeddingVector{std::move(v), input, "mock:m"};
}

}  // namespace

TEST(Cosine, HandCases) {
  const std::vector<double> a{1, 2, 2}, b{2, 1, 2};
  EXPECT_NEAR(cosine(a, b), 8.0 / 9.0, 1e-12);
  EXPECT_NEAR(cosine(a, b), t::oracle_cosine(a, b), 1e-12);
  EXPECT_EQ(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_EQ(cosine(std::vector<double>{1, 0}, std::vector<double>{-3, 0}), -1.0);
}

TEST(Cosine, SelfSimilarityAndScaleInvariance) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> a(2 + rng() % 64), b(a.size());
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    ASSERT_NEAR(cosine(a, a), 1.0, 1e-12);
    const double alpha = scale(rng), beta = scale(rng);
    std::vector<double> sa(a), sb(b);
    for (auto& x : sa) x *= alpha;
    for (auto& x : sb) x *= beta;
    ASSERT_NEAR(cosine(sa, sb), cosine(a, b), 1e-12);
    ASSERT_NEAR(cosine(a, b), t::oracle_cosine(a, b), 1e-12);
  }
}

TEST(Cosine, Errors) {
  EXPECT_EQ(code_of([] { cosine(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}); }),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([] { cosine(std::vector<double>{0, 0}, std::vector<double>{1, 2}); }),
            ErrorCode::ZeroVector);
}

TEST(Ranks, MatchBruteForce) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 500; ++i) {
    const auto v = random_values(rng, 1 + rng() % 60, i % 2 == 0);
    const auto got = fractional_ranks(v);
    const auto want = t::brute_force_ranks(v);
    for (std::size_t k = 0; k < v.size(); ++k) ASSERT_DOUBLE_EQ(got[k], want[k]);
  }
  std::size_t groups = 0;
  EXPECT_EQ(fractional_ranks(std::vector<double>{1, 2, 2, 4}, &groups),
            (std::vector<double>{1, 2.5, 2.5, 4}));
  EXPECT_EQ(groups, 1u);
}

TEST(Spearman, TrivialRankings) {
  std::vector<double> gold{0.1, 0.5, 0.9, 2.0, 3.5};
  EXPECT_NEAR(spearman(gold, gold).rho, 1.0, 1e-12);
  std::vector<double> rev(gold.rbegin(), gold.rend());
  EXPECT_NEAR(spearman(rev, gold).rho, -1.0, 1e-12);
  std::vector<double> monotone{-3, -1, 0, 10, 1000};
  EXPECT_NEAR(spearman(monotone, gold).rho, 1.0, 1e-12);
}

TEST(Spearman, TiedHandCase) {
  const std::vector<double> model{1, 2, 2, 4}, gold{1, 2, 3, 4};
  const auto r = spearman(model, gold);
  EXPECT_NEAR(r.rho, t::textbook_pearson(t::brute_force_ranks(model), t::brute_force_ranks(gold)), 1e-12);
  EXPECT_EQ(r.n_pairs, 4u);
  EXPECT_EQ(r.n_tied_groups_model, 1u);
  EXPECT_EQ(r.n_tied_groups_gold, 0u);
}

TEST(Spearman, OracleEquivalenceOnRandomInstances) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 2 + rng() % 499;
    const bool ties = rng() % 10 < 3;
    auto x = random_values(rng, n, ties);
    auto y = random_values(rng, n, ties);
    if (std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end() ||
        std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) == y.end()) {
      continue;  // constant side
    }
    const double oracle = t::textbook_pearson(t::brute_force_ranks(x), t::brute_force_ranks(y));
    ASSERT_NEAR(spearman(x, y).rho, oracle, 1e-12) << "instance " << i << " n=" << n;
  }
}

TEST(Spearman, Errors) {
  EXPECT_EQ(code_of([] { spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}); }),
            ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([] { spearman(std::vector<double>{1}, std::vector<double>{1}); }),
            ErrorCode::DegenerateInput);
  EXPECT_EQ(code_of([] { spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}); }),
            ErrorCode::DegenerateInput);
  EXPECT_EQ(code_of([] { spearman(std::vector<double>{1, 2, 3}, std::vector<double>{5, 5, 5}); }),
            ErrorCode::DegenerateInput);
  EXPECT_EQ(code_of([] { spearman(std::vector<double>{1, NAN}, std::vector<double>{1, 2}); }),
            ErrorCode::NonFiniteVector);
}

TEST(EvaluateCell, PerfectRankConstruction) {
  // Pair i: word_a at angle 0, word_b at an angle that shrinks as gold grows,
  // so cosine is strictly increasing in gold.
  Benchmark b{DatasetName::simlex999, {}, native_scale(DatasetName::simlex999)};
  EmbeddingMap map;
  const auto& bare = *find_condition("bare");
  for (int i = 0; i < 50; ++i) {
    const std::string a = "a" + std::to_string(i), w = "b" + std::to_string(i);
    const double gold = 0.2 * i;
    b.pairs.push_back({a, w, gold, static_cast<std::size_t>(i + 2)});
    const double theta = (std::numbers::pi / 2) * (1.0 - gold / 10.0);
    map[a] = vec({1.0, 0.0}, a);
    map[w] = vec({std::cos(theta), std::sin(theta)}, w);
  }
  const auto cell = evaluate_cell(b, bare, mock_model(), map);
  ASSERT_TRUE(cell.ok());
  EXPECT_NEAR(cell.correlation->rho, 1.0, 1e-9);
  EXPECT_EQ(cell.correlation->n_pairs, 50u);

  const auto records = similarity_records(b, bare, map);
  std::vector<double> sims, gold;
  for (const auto& r : records) {
    sims.push_back(r.model_similarity);
    gold.push_back(r.gold_score);
  }
  EXPECT_NEAR(t::oracle_spearman(sims, gold), 1.0, 1e-9);
}

TEST(EvaluateCell, MissingEmbeddingNamesTheWord) {
  Benchmark b{DatasetName::men3000, {{"dog", "cat", 10, 1}, {"sun", "moon", 20, 2}}, {0, 50}};
  EmbeddingMap map{{"dog", vec({1, 0}, "dog")}, {"cat", vec({0, 1}, "cat")}};
  try {
    evaluate_cell(b, *find_condition("bare"), mock_model(), map);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingEmbedding);
    EXPECT_NE(std::string(e.what()).find("'sun'"), std::string::npos);
  }
}

TEST(EvaluateCell, EmbeddingMustMatchRenderedInput) {
  Benchmark b{DatasetName::men3000, {{"dog", "cat", 10, 1}, {"sun", "moon", 20, 2}}, {0, 50}};
  EmbeddingMap map;
  for (const auto* w : {"dog", "cat", "sun", "moon"}) map[w] = vec({1, double(std::string(w).size())}, w);
  EXPECT_EQ(code_of([&] { evaluate_cell(b, *find_condition("meaning_colon"), mock_model(), map); }),
            ErrorCode::MissingEmbedding);
}

TEST(Delta, ReferenceRowsAtThreeDecimals) {
  for (auto d : kAllDatasets) {
    for (const auto& row : t::reference_grid(d)) {
      std::vector<ConditionScore> scores;
      for (std::size_t i = 0; i < 8; ++i) scores.push_back({all_conditions()[i].id, row.rho[i]});
      const auto s = delta_vs_bare(scores);
      const auto& summary = t::reference_summary(d);
      const auto it = std::find_if(summary.begin(), summary.end(), [&](const auto& r) { return r.label == row.label; });
      ASSERT_NE(it, summary.end());
      EXPECT_NEAR(s.bare_rho, it->bare, 5e-4) << row.label;
      EXPECT_NEAR(s.best_rho, it->best, 5e-4) << row.label;
      EXPECT_NEAR(s.delta, it->delta, 5e-4) << row.label << " " << to_string(d);
      EXPECT_EQ(s.best_condition, all_conditions()[row.bold].id) << row.label;
    }
  }
}

TEST(Delta, NamedExamples) {
  auto row = [](const std::string& label, DatasetName d) {
    for (const auto& r : t::reference_grid(d)) {
      if (r.label == label) {
        std::vector<ConditionScore> s;
        for (std::size_t i = 0; i < 8; ++i) s.push_back({all_conditions()[i].id, r.rho[i]});
        return delta_vs_bare(s);
      }
    }
    throw std::runtime_error("no row");
  };
  const auto voyage = row("voyage-3", DatasetName::simlex999);
  EXPECT_NEAR(voyage.delta, 0.658, 1e-9);
  const auto small = row("text-embed-3-small", DatasetName::simlex999);
  EXPECT_EQ(small.best_condition, "meaning_colon");
  EXPECT_NEAR(small.delta, 0.169, 1e-9);
}

TEST(Delta, ConstantAndTies) {
  std::vector<ConditionScore> same;
  for (const auto& c : all_conditions()) same.push_back({c.id, 0.5});
  const auto s = delta_vs_bare(same);
  EXPECT_EQ(s.best_condition, "bare");
  EXPECT_EQ(s.delta, 0.0);
  EXPECT_EQ(s.tied_with_best.size(), 7u);

  std::vector<ConditionScore> tied{{"meaning_colon", 0.7}, {"bare", 0.1}, {"word_colon", 0.7}};
  const auto t2 = delta_vs_bare(tied);
  EXPECT_EQ(t2.best_condition, "word_colon");
  EXPECT_EQ(t2.tied_with_best, std::vector<std::string>{"meaning_colon"});
}

TEST(Delta, MissingBare) {
  std::vector<ConditionScore> s{{"word_colon", 0.5}};
  EXPECT_EQ(code_of([&] { delta_vs_bare(s); }), ErrorCode::MissingBareCell);
}
