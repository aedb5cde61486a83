#include "promptbench/providers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <thread>

#include "promptbench/error.hpp"
#include "promptbench/hashing.hpp"

namespace promptbench {

using nlohmann::json;

std::string_view to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::openai_compatible: return "openai_compatible";
    case ProviderKind::cohere_compatible: return "cohere_compatible";
    case ProviderKind::voyage_compatible: return "voyage_compatible";
    case ProviderKind::generic_json: return "generic_json";
    case ProviderKind::mock: return "mock";
  }
  return "unknown";
}

std::optional<ProviderKind> provider_kind_from_string(std::string_view name) {
  for (auto k : {ProviderKind::openai_compatible, ProviderKind::cohere_compatible,
                 ProviderKind::voyage_compatible, ProviderKind::generic_json,
                 ProviderKind::mock}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string ProviderModel::model_key() const {
  std::string key{to_string(kind)};
  key += ':';
  key += model_id;
  if (extra_params.is_object() && !extra_params.empty()) {
    // json objects iterate in key order
    char sep = '?';
    for (const auto& [k, v] : extra_params.items()) {
      key += sep;
      key += k;
      key += '=';
      key += v.dump();
      sep = '&';
    }
  }
  return key;
}

std::string ProviderModel::resolved_endpoint() const {
  if (!endpoint_url.empty()) return endpoint_url;
  switch (kind) {
    case ProviderKind::openai_compatible: return "https://api.openai.com/v1/embeddings";
    case ProviderKind::cohere_compatible: return "https://api.cohere.com/v1/embed";
    case ProviderKind::voyage_compatible: return "https://api.voyageai.com/v1/embeddings";
    case ProviderKind::mock: return "mock://local/embeddings";
    case ProviderKind::generic_json: break;
  }
  return {};
}

std::string ProviderModel::resolved_auth_env_var() const {
  if (!auth_env_var.empty()) return auth_env_var;
  switch (kind) {
    case ProviderKind::openai_compatible: return "OPENAI_API_KEY";
    case ProviderKind::cohere_compatible: return "CO_API_KEY";
    case ProviderKind::voyage_compatible: return "VOYAGE_API_KEY";
    case ProviderKind::generic_json:
    case ProviderKind::mock: break;
  }
  return {};
}

std::chrono::milliseconds RequestPolicy::backoff_delay(std::size_t attempt) const {
  auto delay = backoff_base;
  for (std::size_t i = 0; i < attempt && delay < backoff_cap; ++i) delay *= 2;
  return std::min(delay, backoff_cap);
}

void RequestPolicy::validate() const {
  if (max_in_flight == 0) throw Error(ErrorCode::ConfigInvalid, "max_in_flight must be >= 1");
  if (batch_size == 0) throw Error(ErrorCode::ConfigInvalid, "batch_size must be >= 1");
  if (backoff_base.count() < 0 || backoff_cap < backoff_base) {
    throw Error(ErrorCode::ConfigInvalid, "backoff_cap must be >= backoff_base >= 0");
  }
  if (timeout.count() <= 0) throw Error(ErrorCode::ConfigInvalid, "timeout must be positive");
}

EmbeddingVector mock_embed(std::string_view input, std::size_t dim, std::string_view seed_salt) {
  if (dim < 2) throw Error(ErrorCode::ConfigInvalid, "mock dimension must be >= 2");
  std::string seed;
  append_field(seed, seed_salt);
  append_field(seed, input);

  EmbeddingVector out;
  out.input_text = std::string(input);
  out.values.reserve(dim);
  Sha256Digest block{};
  for (std::size_t i = 0; i < dim; ++i) {
    const std::size_t word = i % 4;
    if (word == 0) {
      std::string material = seed;
      append_field(material, std::to_string(i / 4));
      block = sha256(material);
    }
    std::uint64_t bits = 0;
    for (std::size_t b = 0; b < 8; ++b) bits = (bits << 8) | block[word * 8 + b];
    // top 53 bits -> [0, 1) -> [-1, 1)
    const double unit = static_cast<double>(bits >> 11) * 0x1.0p-53;
    out.values.push_back(2.0 * unit - 1.0);
  }
  return out;
}

EmbeddingVector whitespace_insensitive_mock(std::string_view input, std::size_t dim) {
  constexpr std::string_view ws = " \t\n\r\f\v";
  auto b = input.find_first_not_of(ws);
  std::string_view trimmed;
  if (b != std::string_view::npos) {
    auto e = input.find_last_not_of(ws);
    trimmed = input.substr(b, e - b + 1);
  }
  auto out = mock_embed(trimmed, dim, kWhitespaceInsensitiveSalt);
  out.input_text = std::string(input);
  return out;
}

void for_each_chunk(std::size_t count, std::size_t chunk_size, std::size_t workers,
                    const std::function<void(std::size_t, std::size_t)>& work) {
  if (count == 0) return;
  chunk_size = std::max<std::size_t>(chunk_size, 1);
  const std::size_t chunks = (count + chunk_size - 1) / chunk_size;
  workers = std::clamp<std::size_t>(workers, 1, chunks);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto loop = [&] {
    while (!failed.load()) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      const std::size_t begin = c * chunk_size;
      const std::size_t end = std::min(count, begin + chunk_size);
      try {
        work(begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
      }
    }
  };

  if (workers == 1) {
    loop();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(loop);
  }
  if (first_error) std::rethrow_exception(first_error);
}

class EmbeddingClient::Slot {
 public:
  explicit Slot(EmbeddingClient& client) : client_(client) {
    std::unique_lock lock(client_.slot_mutex_);
    client_.slot_cv_.wait(lock,
                          [&] { return client_.in_flight_ < client_.policy_.max_in_flight; });
    ++client_.in_flight_;
    auto peak = client_.peak_in_flight_.load();
    while (client_.in_flight_ > peak &&
           !client_.peak_in_flight_.compare_exchange_weak(peak, client_.in_flight_)) {
    }
  }
  ~Slot() {
    {
      std::lock_guard lock(client_.slot_mutex_);
      --client_.in_flight_;
    }
    client_.slot_cv_.notify_one();
  }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  EmbeddingClient& client_;
};

EmbeddingClient::EmbeddingClient(RequestPolicy policy, ClientOptions options)
    : policy_(policy), options_(std::move(options)) {
  policy_.validate();
  if (!options_.http) options_.http = make_http_transport();
  if (!options_.mock) options_.mock = make_mock_transport();
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
  if (!options_.getenv) {
    options_.getenv = [](const std::string& name) -> std::optional<std::string> {
      const char* v = std::getenv(name.c_str());
      if (v == nullptr || *v == '\0') return std::nullopt;
      return std::string(v);
    };
  }
}

std::string EmbeddingClient::credential(const ProviderModel& model) const {
  const auto var = model.resolved_auth_env_var();
  if (var.empty()) return {};
  auto value = options_.getenv(var);
  if (!value) {
    throw Error(ErrorCode::AuthMissing,
                "environment variable " + var + " is not set for " + model.model_key());
  }
  return *value;
}

void EmbeddingClient::check_credentials(const ProviderModel& model) const { credential(model); }

std::optional<std::string> EmbeddingClient::provider_meta(const std::string& model_key) const {
  std::lock_guard lock(meta_mutex_);
  auto it = meta_.find(model_key);
  if (it == meta_.end()) return std::nullopt;
  return it->second;
}

HttpRequest EmbeddingClient::build_request(const ProviderModel& model,
                                           std::span<const std::string> inputs) const {
  json body = json::object();
  json input_list = json::array();
  for (const auto& s : inputs) input_list.push_back(s);

  switch (model.kind) {
    case ProviderKind::openai_compatible:
      body["model"] = model.model_id;
      body["input"] = std::move(input_list);
      body["encoding_format"] = "float";
      break;
    case ProviderKind::voyage_compatible:
    case ProviderKind::mock:
      body["model"] = model.model_id;
      body["input"] = std::move(input_list);
      break;
    case ProviderKind::cohere_compatible:
      body["model"] = model.model_id;
      body["texts"] = std::move(input_list);
      break;
    case ProviderKind::generic_json:
      if (!model.wire.model_field.empty()) body[model.wire.model_field] = model.model_id;
      body[model.wire.input_field] = std::move(input_list);
      break;
  }
  if (model.extra_params.is_object()) {
    for (const auto& [k, v] : model.extra_params.items()) body[k] = v;
  }

  HttpRequest req;
  req.url = model.resolved_endpoint();
  if (req.url.empty()) {
    throw Error(ErrorCode::ConfigInvalid, model.model_key() + " has no endpoint_url");
  }
  req.body = body.dump();
  req.timeout = policy_.timeout;
  req.headers.emplace_back("Content-Type", "application/json");
  if (auto key = credential(model); !key.empty()) {
    req.headers.emplace_back("Authorization", "Bearer " + key);
  }
  return req;
}

namespace {

std::string provider_message(const std::string& body) {
  auto parsed = json::parse(body, nullptr, false);
  if (!parsed.is_discarded() && parsed.is_object()) {
    if (parsed.contains("error")) {
      const auto& e = parsed["error"];
      if (e.is_object() && e.contains("message") && e["message"].is_string()) {
        return e["message"].get<std::string>();
      }
      if (e.is_string()) return e.get<std::string>();
    }
    for (const char* k : {"message", "detail"}) {
      if (parsed.contains(k) && parsed[k].is_string()) return parsed[k].get<std::string>();
    }
  }
  return body.size() > 300 ? body.substr(0, 300) + "..." : body;
}

bool is_retryable(int status) {
  return status == 408 || status == 409 || status == 425 || status == 429 || status >= 500;
}

std::vector<double> to_vector(const json& item, std::size_t index) {
  if (!item.is_array() || item.empty()) {
    throw Error(ErrorCode::ProviderError,
                "embedding " + std::to_string(index) + " is not a non-empty array");
  }
  std::vector<double> out;
  out.reserve(item.size());
  for (const auto& v : item) {
    if (!v.is_number()) {
      throw Error(ErrorCode::ProviderError,
                  "embedding " + std::to_string(index) + " has a non-numeric component");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      throw Error(ErrorCode::ProviderError,
                  "embedding " + std::to_string(index) + " has a non-finite component");
    }
    out.push_back(d);
  }
  return out;
}

}  // namespace

std::vector<EmbeddingVector> EmbeddingClient::parse_response(const ProviderModel& model,
                                                             std::span<const std::string> inputs,
                                                             const std::string& body) {
  auto parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw Error(ErrorCode::ProviderError, "response is not a JSON object");
  }

  std::vector<std::vector<double>> raw(inputs.size());
  std::vector<bool> seen(inputs.size(), false);
  auto place = [&](std::size_t index, std::vector<double> values) {
    if (index >= raw.size() || seen[index]) {
      throw Error(ErrorCode::ProviderError, "response index " + std::to_string(index) +
                                                " is out of range or repeated");
    }
    seen[index] = true;
    raw[index] = std::move(values);
  };
  auto check_count = [&](std::size_t n) {
    if (n != inputs.size()) {
      throw Error(ErrorCode::ProviderError, "provider returned " + std::to_string(n) +
                                                " embeddings for " +
                                                std::to_string(inputs.size()) + " inputs");
    }
  };

  std::string meta;
  switch (model.kind) {
    case ProviderKind::openai_compatible:
    case ProviderKind::voyage_compatible:
    case ProviderKind::mock: {
      if (!parsed.contains("data") || !parsed["data"].is_array()) {
        throw Error(ErrorCode::ProviderError, "response has no data array");
      }
      const auto& data = parsed["data"];
      check_count(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& item = data[i];
        if (!item.is_object() || !item.contains("embedding")) {
          throw Error(ErrorCode::ProviderError, "data item without embedding");
        }
        const std::size_t index =
            item.contains("index") && item["index"].is_number_unsigned() ? item["index"].get<std::size_t>() : i;
        place(index, to_vector(item["embedding"], index));
      }
      if (parsed.contains("model") && parsed["model"].is_string()) meta = parsed["model"];
      break;
    }
    case ProviderKind::cohere_compatible: {
      if (!parsed.contains("embeddings")) {
        throw Error(ErrorCode::ProviderError, "response has no embeddings field");
      }
      const json* list = &parsed["embeddings"];
      if (list->is_object() && list->contains("float")) list = &(*list)["float"];
      if (!list->is_array()) throw Error(ErrorCode::ProviderError, "embeddings is not an array");
      check_count(list->size());
      for (std::size_t i = 0; i < list->size(); ++i) place(i, to_vector((*list)[i], i));
      if (parsed.contains("meta")) meta = parsed["meta"].dump();
      break;
    }
    case ProviderKind::generic_json: {
      const json* list = nullptr;
      try {
        list = &parsed.at(json::json_pointer(model.wire.embeddings_pointer));
      } catch (const json::exception&) {
        throw Error(ErrorCode::ProviderError,
                    "response has nothing at " + model.wire.embeddings_pointer);
      }
      if (!list->is_array()) throw Error(ErrorCode::ProviderError, "embeddings is not an array");
      check_count(list->size());
      for (std::size_t i = 0; i < list->size(); ++i) {
        const json* vec = &(*list)[i];
        if (!model.wire.vector_pointer.empty()) {
          try {
            vec = &vec->at(json::json_pointer(model.wire.vector_pointer));
          } catch (const json::exception&) {
            throw Error(ErrorCode::ProviderError,
                        "item has nothing at " + model.wire.vector_pointer);
          }
        }
        place(i, to_vector(*vec, i));
      }
      if (parsed.contains("model") && parsed["model"].is_string()) meta = parsed["model"];
      break;
    }
  }

  const std::string key = model.model_key();
  const std::size_t dim = raw.front().size();
  std::vector<EmbeddingVector> out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "batch mixes dimensions " + std::to_string(dim) +
                                                    " and " + std::to_string(raw[i].size()));
    }
    if (model.expected_dim && raw[i].size() != *model.expected_dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  key + " returned dimension " + std::to_string(raw[i].size()) + ", expected " +
                      std::to_string(*model.expected_dim));
    }
    out.push_back(EmbeddingVector{std::move(raw[i]), inputs[i], key});
  }
  if (!meta.empty()) {
    std::lock_guard lock(meta_mutex_);
    meta_[key] = meta;
  }
  return out;
}

std::vector<EmbeddingVector> EmbeddingClient::request_batch(const ProviderModel& model,
                                                            std::span<const std::string> inputs) {
  if (inputs.empty()) throw Error(ErrorCode::EmptyInput, "no inputs to embed");
  for (const auto& s : inputs) {
    if (s.empty()) throw Error(ErrorCode::EmptyInput, "empty input string");
  }
  const HttpRequest request = build_request(model, inputs);
  Transport& transport = model.kind == ProviderKind::mock ? *options_.mock : *options_.http;

  std::string last_error;
  for (std::size_t attempt = 0;; ++attempt) {
    std::optional<std::chrono::seconds> retry_after;
    {
      Slot slot(*this);
      calls_.fetch_add(1);
      try {
        HttpResponse response = transport.post(request);
        if (response.status >= 200 && response.status < 300) {
          return parse_response(model, inputs, response.body);
        }
        last_error = "HTTP " + std::to_string(response.status) + ": " +
                     provider_message(response.body);
        if (!is_retryable(response.status)) {
          throw Error(ErrorCode::ProviderError, model.model_key() + " " + last_error);
        }
        retry_after = response.retry_after;
      } catch (const TransportFailure& e) {
        last_error = e.what();
      }
    }
    if (attempt >= policy_.max_retries) break;
    auto delay = policy_.backoff_delay(attempt);
    if (retry_after) {
      delay = std::min(std::max(delay, std::chrono::milliseconds(*retry_after)),
                       policy_.backoff_cap);
    }
    options_.sleep(delay);
  }
  throw Error(ErrorCode::RetriesExhausted,
              model.model_key() + " failed after " + std::to_string(policy_.max_retries + 1) +
                  " attempts; last error: " + last_error);
}

std::vector<EmbeddingVector> EmbeddingClient::embed_batch(const ProviderModel& model,
                                                          std::span<const std::string> inputs) {
  if (inputs.empty()) throw Error(ErrorCode::EmptyInput, "no inputs to embed");
  check_credentials(model);
  std::vector<EmbeddingVector> out(inputs.size());
  for_each_chunk(inputs.size(), policy_.batch_size, policy_.max_in_flight,
                 [&](std::size_t begin, std::size_t end) {
                   auto part = request_batch(model, inputs.subspan(begin, end - begin));
                   std::move(part.begin(), part.end(), out.begin() + static_cast<long>(begin));
                 });
  const std::size_t dim = out.front().dim();
  for (const auto& v : out) {
    if (v.dim() != dim) {
      throw Error(ErrorCode::DimensionMismatch, model.model_key() + " changed dimension between batches");
    }
  }
  return out;
}

std::vector<EmbeddingVector> EmbeddingClient::embed(const ProviderModel& model,
                                                    std::span<const std::string> inputs,
                                                    AcquireStats* stats) {
  const auto before = provider_calls();
  auto out = embed_batch(model, inputs);
  if (stats) {
    stats->cache_misses += inputs.size();
    stats->provider_calls += provider_calls() - before;
  }
  return out;
}

}  // namespace promptbench
