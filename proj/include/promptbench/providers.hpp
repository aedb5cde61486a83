#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptbench/transport.hpp"

namespace promptbench {

enum class ProviderKind { openai_compatible, cohere_compatible, voyage_compatible, generic_json, mock };

std::string_view to_string(ProviderKind kind);
std::optional<ProviderKind> provider_kind_from_string(std::string_view name);

/// Field layout for generic_json endpoints. Pointers are RFC 6901 JSON
/// pointers; an empty vector_pointer means each list item is the vector.
struct GenericWireFormat {
  std::string model_field = "model";
  std::string input_field = "input";
  std::string embeddings_pointer = "/data";
  std::string vector_pointer = "/embedding";
};

struct ProviderModel {
  ProviderKind kind = ProviderKind::mock;
  std::string model_id;
  std::string label;
  std::string endpoint_url;
  std::string auth_env_var;
  std::optional<std::size_t> expected_dim;
  /// Merged into every request body; part of model_key.
  nlohmann::json extra_params = nlohmann::json::object();
  GenericWireFormat wire;

  /// provider_kind + model_id + extra_params sorted by key.
  std::string model_key() const;
  std::string display_name() const { return label.empty() ? model_id : label; }
  std::string resolved_endpoint() const;
  /// Empty when the model needs no credential.
  std::string resolved_auth_env_var() const;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::string input_text;
  std::string model_key;

  std::size_t dim() const { return values.size(); }
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

struct RequestPolicy {
  std::size_t max_in_flight = 4;
  std::size_t batch_size = 64;
  std::size_t max_retries = 5;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_cap{30000};
  std::chrono::milliseconds timeout{60000};

  /// base * 2^attempt, capped.
  std::chrono::milliseconds backoff_delay(std::size_t attempt) const;
  void validate() const;
};

/// Deterministic vector from SHA-256 of (salt, input), components in [-1, 1).
EmbeddingVector mock_embed(std::string_view input, std::size_t dim, std::string_view seed_salt);

/// mock_embed of the input with surrounding whitespace stripped, under a
/// fixed salt. Emulates models whose tokenizer drops surrounding spaces.
EmbeddingVector whitespace_insensitive_mock(std::string_view input, std::size_t dim);

inline constexpr std::string_view kWhitespaceInsensitiveSalt = "whitespace-insensitive";

struct AcquireStats {
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
  std::size_t corrupt_entries = 0;
  std::uint64_t provider_calls = 0;
};

/// Anything that turns exact input strings into vectors for one model.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<EmbeddingVector> embed(const ProviderModel& model,
                                             std::span<const std::string> inputs,
                                             AcquireStats* stats = nullptr) = 0;
};

struct ClientOptions {
  std::shared_ptr<Transport> http;
  std::shared_ptr<Transport> mock;
  std::function<void(std::chrono::milliseconds)> sleep;
  std::function<std::optional<std::string>(const std::string&)> getenv;
};

/// Calls `work(begin, end)` for consecutive chunks of [0, count) on up to
/// `workers` threads. Stops handing out chunks after the first exception,
/// which is rethrown once all workers have joined.
void for_each_chunk(std::size_t count, std::size_t chunk_size, std::size_t workers,
                    const std::function<void(std::size_t, std::size_t)>& work);

class EmbeddingClient : public Embedder {
 public:
  explicit EmbeddingClient(RequestPolicy policy = {}, ClientOptions options = {});

  const RequestPolicy& policy() const { return policy_; }

  /// One provider request, retried on transient failures.
  std::vector<EmbeddingVector> request_batch(const ProviderModel& model,
                                             std::span<const std::string> inputs);

  /// All inputs, split into batch_size requests, at most max_in_flight
  /// outstanding at once. Output order matches input order.
  std::vector<EmbeddingVector> embed_batch(const ProviderModel& model,
                                           std::span<const std::string> inputs);

  std::vector<EmbeddingVector> embed(const ProviderModel& model,
                                     std::span<const std::string> inputs,
                                     AcquireStats* stats = nullptr) override;

  /// Throws AuthMissing when a required credential is not set.
  void check_credentials(const ProviderModel& model) const;

  std::uint64_t provider_calls() const { return calls_.load(); }
  std::size_t peak_in_flight() const { return peak_in_flight_.load(); }
  /// Provider-reported model/version string from the latest response.
  std::optional<std::string> provider_meta(const std::string& model_key) const;

 private:
  class Slot;
  std::string credential(const ProviderModel& model) const;
  HttpRequest build_request(const ProviderModel& model, std::span<const std::string> inputs) const;
  std::vector<EmbeddingVector> parse_response(const ProviderModel& model,
                                              std::span<const std::string> inputs,
                                              const std::string& body);

  RequestPolicy policy_;
  ClientOptions options_;

  std::mutex slot_mutex_;
  std::condition_variable slot_cv_;
  std::size_t in_flight_ = 0;
  std::atomic<std::size_t> peak_in_flight_{0};
  std::atomic<std::uint64_t> calls_{0};

  mutable std::mutex meta_mutex_;
  std::map<std::string, std::string> meta_;
};

}  // namespace promptbench
