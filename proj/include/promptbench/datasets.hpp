#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace promptbench {

enum class DatasetName { simlex999, wordsim353, men3000 };

std::string_view to_string(DatasetName name);
std::optional<DatasetName> dataset_from_string(std::string_view name);

/// Canonical dataset order used for tables.
inline constexpr DatasetName kAllDatasets[] = {DatasetName::simlex999, DatasetName::wordsim353,
                                               DatasetName::men3000};

struct NativeScale {
  double low;
  double high;
  bool contains(double v) const { return v >= low && v <= high; }
};

NativeScale native_scale(DatasetName name);
std::size_t canonical_pair_count(DatasetName name);

struct WordPair {
  std::string word_a;
  std::string word_b;
  double gold_score = 0.0;
  std::size_t source_line = 0;

  /// Content equality; source_line is provenance only.
  friend bool operator==(const WordPair& a, const WordPair& b) {
    return a.word_a == b.word_a && a.word_b == b.word_b && a.gold_score == b.gold_score;
  }
};

struct Benchmark {
  DatasetName name;
  std::vector<WordPair> pairs;
  NativeScale native_scale;

  friend bool operator==(const Benchmark& a, const Benchmark& b) {
    return a.name == b.name && a.pairs == b.pairs;
  }
};

struct LoadOptions {
  /// When false, the canonical pair count is not enforced (small fixtures).
  bool enforce_pair_count = true;
};

Benchmark load_simlex(const std::filesystem::path& path, LoadOptions options = {});
Benchmark load_wordsim(const std::filesystem::path& path, LoadOptions options = {});
Benchmark load_men(const std::filesystem::path& path, LoadOptions options = {});
Benchmark load_benchmark(DatasetName name, const std::filesystem::path& path,
                         LoadOptions options = {});

/// Distinct words of a benchmark, verbatim, in sorted byte order.
using Vocabulary = std::vector<std::string>;

Vocabulary vocabulary(const Benchmark& benchmark);

}  // namespace promptbench
