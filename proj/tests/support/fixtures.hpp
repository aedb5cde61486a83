#pragma once

#include <stdlib.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace promptbench::testing {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "promptbench-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Deterministic pseudo-words built from syllables, all distinct.
inline std::vector<std::string> synthetic_words(std::size_t count, std::uint64_t seed) {
  static const char* syllables[] = {"ka", "lo", "mi", "ru", "ten", "sa", "vo", "ni", "pe", "dra",
                                    "qu", "bel", "or", "fi", "gan", "hu", "jo", "wex", "zi", "yar"};
  std::mt19937_64 rng(seed);
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < count) {
    std::string w;
    const auto parts = 2 + rng() % 3;
    for (std::size_t i = 0; i < parts; ++i) w += syllables[rng() % 20];
    if (seen.insert(w).second) out.push_back(w);
  }
  return out;
}

struct SyntheticPair {
  std::string a;
  std::string b;
  double score;
};

/// Pairs drawn from a shared vocabulary so words repeat across pairs, with
/// scores quantized to `step` on [0, high] (coarse steps produce ties).
inline std::vector<SyntheticPair> synthetic_pairs(std::size_t count, std::size_t vocab,
                                                  double high, double step, std::uint64_t seed) {
  auto words = synthetic_words(vocab, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<SyntheticPair> out;
  const auto levels = static_cast<std::uint64_t>(high / step);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& a = words[rng() % words.size()];
    const auto& b = words[rng() % words.size()];
    out.push_back({a, b, static_cast<double>(rng() % (levels + 1)) * step});
  }
  return out;
}

inline std::string fmt2(double v) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(2);
  ss << v;
  return ss.str();
}

/// SimLex-999 distribution layout: ten tab-separated columns with a header.
inline std::string simlex_text(const std::vector<SyntheticPair>& pairs) {
  std::string out =
      "word1\tword2\tPOS\tSimLex999\tconc(w1)\tconc(w2)\tconcQ\tAssoc(USF)\tSimAssoc333\tSD(SimLex)\n";
  for (const auto& p : pairs) {
    out += p.a + "\t" + p.b + "\tN\t" + fmt2(p.score) + "\t4.1\t3.9\t4\t0.5\t0\t1.2\n";
  }
  return out;
}

/// Combined WordSim-353 csv layout, with or without its header row.
inline std::string wordsim_text(const std::vector<SyntheticPair>& pairs, bool header = true) {
  std::string out = header ? "Word 1,Word 2,Human (mean)\n" : "";
  for (const auto& p : pairs) out += p.a + "," + p.b + "," + fmt2(p.score) + "\n";
  return out;
}

/// MEN natural-form layout: space-separated, 0-50 scale.
inline std::string men_text(const std::vector<SyntheticPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) out += p.a + " " + p.b + " " + fmt2(p.score) + "\n";
  return out;
}

struct SyntheticDatasets {
  std::filesystem::path simlex;
  std::filesystem::path wordsim;
  std::filesystem::path men;
};

/// Canonical-format files with the canonical pair counts (999/353/3000).
inline SyntheticDatasets write_canonical_fixtures(const std::filesystem::path& dir,
                                                  std::uint64_t seed = 7) {
  SyntheticDatasets out{dir / "SimLex-999.txt", dir / "combined.csv", dir / "MEN_dataset_natural_form_full"};
  write_file(out.simlex, simlex_text(synthetic_pairs(999, 700, 10.0, 0.01, seed)));
  write_file(out.wordsim, wordsim_text(synthetic_pairs(353, 300, 10.0, 0.01, seed + 1)));
  write_file(out.men, men_text(synthetic_pairs(3000, 600, 50.0, 1.0, seed + 2)));
  return out;
}

/// Config for one deterministic mock model over the three fixture files.
inline std::string mock_config_json(const SyntheticDatasets& data, const std::filesystem::path& cache,
                                    const std::filesystem::path& output,
                                    const std::string& extra_models = "") {
  std::ostringstream ss;
  ss << R"({
  "models": [
    {"label": "mock-a", "provider": "mock", "model": "mock-a", "extra_params": {"dim": 32}})"
     << extra_models << R"(
  ],
  "datasets": {
    "simlex999": ")" << data.simlex.string() << R"(",
    "wordsim353": ")" << data.wordsim.string() << R"(",
    "men3000": ")" << data.men.string() << R"("
  },
  "cache_dir": ")" << cache.string() << R"(",
  "output_dir": ")" << output.string() << R"(",
  "policy": {"batch_size": 64, "max_in_flight": 4, "max_retries": 2, "backoff_base_ms": 1, "backoff_cap_ms": 4},
  "seed": 11
})";
  return ss.str();
}

}  // namespace promptbench::testing
