#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "promptbench/providers.hpp"

namespace promptbench {

struct CacheKey {
  std::string model_key;
  std::string input_text;
  std::string digest;

  static CacheKey make(std::string model_key, std::string input_text);
  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

struct CacheEntry {
  CacheKey key;
  EmbeddingVector vector;
  std::int64_t stored_at_ms = 0;  // Unix epoch milliseconds
  std::string provider_meta;

  friend bool operator==(const CacheEntry&, const CacheEntry&) = default;
};

/// Self-describing text record: length-prefixed key fields, hex-float
/// components (bit-exact), and a trailing SHA-256 checksum line.
std::string encode_entry(const CacheEntry& entry);
/// Throws CorruptEntry on any structural or checksum problem.
CacheEntry decode_entry(std::string_view record);

/// One file per entry under <dir>/<d0d1>/<d2d3>/<digest>.entry, written to a
/// temporary name and renamed into place. A read-through memory layer sits
/// in front of the directory.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path dir);

  const std::filesystem::path& directory() const { return dir_; }

  /// Throws CorruptEntry after moving a damaged file aside; the next get
  /// for the same key returns nullopt.
  std::optional<CacheEntry> get(const CacheKey& key);
  void put(const CacheEntry& entry);

  std::filesystem::path entry_path(const CacheKey& key) const;

 private:
  std::filesystem::path dir_;
  std::shared_mutex mutex_;
  std::unordered_map<std::string, CacheEntry> memory_;
};

struct AcquireOptions {
  /// Forbid provider calls; a miss raises OfflineMiss.
  bool offline = false;
};

/// Serves hits from the cache and sends only the (deduplicated) misses to the
/// client. Every successful batch is stored before the call returns; a failed
/// batch stores nothing.
std::vector<EmbeddingVector> get_or_embed(EmbeddingCache& cache, EmbeddingClient& client,
                                          const ProviderModel& model,
                                          std::span<const std::string> inputs,
                                          AcquireOptions options = {},
                                          AcquireStats* stats = nullptr);

/// Embedder facade over a cache and a client.
class CachedEmbedder : public Embedder {
 public:
  CachedEmbedder(EmbeddingCache& cache, EmbeddingClient& client, AcquireOptions options = {})
      : cache_(cache), client_(client), options_(options) {}

  std::vector<EmbeddingVector> embed(const ProviderModel& model,
                                     std::span<const std::string> inputs,
                                     AcquireStats* stats = nullptr) override {
    return get_or_embed(cache_, client_, model, inputs, options_, stats);
  }

  EmbeddingClient& client() { return client_; }
  const AcquireOptions& options() const { return options_; }

 private:
  EmbeddingCache& cache_;
  EmbeddingClient& client_;
  AcquireOptions options_;
};

}  // namespace promptbench
