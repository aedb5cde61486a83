#include "promptbench/cache.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "promptbench/error.hpp"
#include "promptbench/hashing.hpp"

namespace promptbench {

namespace {

constexpr std::string_view kMagic = "promptbench-cache-entry 1";

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

[[noreturn]] void corrupt(const std::string& why) { throw Error(ErrorCode::CorruptEntry, why); }

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == text_.size(); }

  std::string_view line() {
    auto end = text_.find('\n', pos_);
    if (end == std::string_view::npos) corrupt("truncated record");
    auto out = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    return out;
  }

  std::string_view tagged(std::string_view tag) {
    auto l = line();
    if (!l.starts_with(tag) || l.size() < tag.size() + 1 || l[tag.size()] != ' ') {
      corrupt("expected field '" + std::string(tag) + "'");
    }
    return l.substr(tag.size() + 1);
  }

  template <typename Int>
  Int tagged_int(std::string_view tag) {
    auto v = tagged(tag);
    Int out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) corrupt("bad integer in '" + std::string(tag) + "'");
    return out;
  }

  std::string bytes(std::string_view tag) {
    const auto n = tagged_int<std::size_t>(tag);
    if (text_.size() - pos_ < n + 1 || text_[pos_ + n] != '\n') corrupt("truncated field '" + std::string(tag) + "'");
    std::string out(text_.substr(pos_, n));
    pos_ += n + 1;
    return out;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

void append_bytes(std::string& out, std::string_view tag, std::string_view bytes) {
  out += tag;
  out += ' ';
  out += std::to_string(bytes.size());
  out += '\n';
  out += bytes;
  out += '\n';
}

void check_finite(const EmbeddingVector& v) {
  if (v.values.empty()) throw Error(ErrorCode::NonFiniteVector, "empty vector");
  for (double d : v.values) {
    if (!std::isfinite(d)) {
      throw Error(ErrorCode::NonFiniteVector, "non-finite component for '" + v.input_text + "'");
    }
  }
}

[[noreturn]] void throw_errno(const std::string& what) {
  const int err = errno;
  const auto code = (err == ENOSPC || err == EDQUOT) ? ErrorCode::StorageFull : ErrorCode::IoError;
  throw Error(code, what + ": " + std::strerror(err));
}

void write_atomically(const std::filesystem::path& target, const std::string& data) {
  static std::atomic<std::uint64_t> counter{0};
  std::error_code ec;
  std::filesystem::create_directories(target.parent_path(), ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + target.parent_path().string() + ": " + ec.message());

  auto tmp = target;
  tmp += ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "." +
         std::to_string(counter.fetch_add(1));

  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
  if (fd < 0) throw_errno("cannot create " + tmp.string());
  std::size_t written = 0;
  while (written < data.size()) {
    const auto n = ::write(fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int saved = errno;
      ::close(fd);
      ::unlink(tmp.c_str());
      errno = saved;
      throw_errno("cannot write " + tmp.string());
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    const int saved = errno;
    ::unlink(tmp.c_str());
    errno = saved;
    throw_errno("cannot flush " + tmp.string());
  }
  if (::rename(tmp.c_str(), target.c_str()) != 0) {
    const int saved = errno;
    ::unlink(tmp.c_str());
    errno = saved;
    throw_errno("cannot rename into " + target.string());
  }
}

}  // namespace

CacheKey CacheKey::make(std::string model_key, std::string input_text) {
  std::string material;
  append_field(material, model_key);
  append_field(material, input_text);
  auto digest = sha256_hex(material);
  return CacheKey{std::move(model_key), std::move(input_text), std::move(digest)};
}

std::string encode_entry(const CacheEntry& entry) {
  std::string out;
  out.reserve(64 + entry.key.model_key.size() + entry.key.input_text.size() +
              entry.vector.values.size() * 24);
  out += kMagic;
  out += '\n';
  out += "digest " + entry.key.digest + '\n';
  append_bytes(out, "model_key", entry.key.model_key);
  append_bytes(out, "input_text", entry.key.input_text);
  append_bytes(out, "provider_meta", entry.provider_meta);
  out += "stored_at " + std::to_string(entry.stored_at_ms) + '\n';
  out += "dim " + std::to_string(entry.vector.values.size()) + '\n';
  char buf[64];
  for (double d : entry.vector.values) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), d, std::chars_format::hex);
    out.append(buf, ptr);
    out += '\n';
  }
  out += "checksum " + sha256_hex(out) + '\n';
  return out;
}

CacheEntry decode_entry(std::string_view record) {
  Reader in(record);
  if (in.line() != kMagic) corrupt("bad magic line");
  CacheEntry entry;
  const auto digest = std::string(in.tagged("digest"));
  auto model_key = in.bytes("model_key");
  auto input_text = in.bytes("input_text");
  entry.provider_meta = in.bytes("provider_meta");
  entry.stored_at_ms = in.tagged_int<std::int64_t>("stored_at");
  const auto dim = in.tagged_int<std::size_t>("dim");
  if (dim == 0 || dim > record.size()) corrupt("implausible dimension");
  entry.vector.values.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    auto l = in.line();
    double d = 0.0;
    auto [ptr, ec] = std::from_chars(l.data(), l.data() + l.size(), d, std::chars_format::hex);
    if (ec != std::errc{} || ptr != l.data() + l.size() || !std::isfinite(d)) {
      corrupt("bad component " + std::to_string(i));
    }
    entry.vector.values.push_back(d);
  }
  const auto body_size = in.offset();
  const auto checksum = in.tagged("checksum");
  if (!in.at_end()) corrupt("trailing bytes after checksum");
  if (checksum != sha256_hex(record.substr(0, body_size))) corrupt("checksum mismatch");

  entry.key = CacheKey::make(std::move(model_key), std::move(input_text));
  if (entry.key.digest != digest) corrupt("digest does not match key fields");
  entry.vector.model_key = entry.key.model_key;
  entry.vector.input_text = entry.key.input_text;
  return entry;
}

EmbeddingCache::EmbeddingCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path EmbeddingCache::entry_path(const CacheKey& key) const {
  return dir_ / key.digest.substr(0, 2) / key.digest.substr(2, 2) / (key.digest + ".entry");
}

std::optional<CacheEntry> EmbeddingCache::get(const CacheKey& key) {
  {
    std::shared_lock lock(mutex_);
    if (auto it = memory_.find(key.digest); it != memory_.end()) return it->second;
  }
  const auto path = entry_path(key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string record{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  in.close();

  try {
    auto entry = decode_entry(record);
    if (entry.key != key) corrupt("entry belongs to a different key");
    std::unique_lock lock(mutex_);
    memory_.emplace(key.digest, entry);
    return entry;
  } catch (const Error& e) {
    auto quarantine = path;
    quarantine += ".corrupt." + std::to_string(now_ms());
    std::error_code ec;
    std::filesystem::rename(path, quarantine, ec);
    throw Error(ErrorCode::CorruptEntry,
                path.string() + " moved to " + quarantine.filename().string() + " (" + e.what() + ")");
  }
}

void EmbeddingCache::put(const CacheEntry& entry) {
  check_finite(entry.vector);
  if (entry.vector.input_text != entry.key.input_text ||
      entry.vector.model_key != entry.key.model_key) {
    throw Error(ErrorCode::IoError, "vector does not belong to its cache key");
  }
  write_atomically(entry_path(entry.key), encode_entry(entry));
  std::unique_lock lock(mutex_);
  memory_.insert_or_assign(entry.key.digest, entry);
}

std::vector<EmbeddingVector> get_or_embed(EmbeddingCache& cache, EmbeddingClient& client,
                                          const ProviderModel& model,
                                          std::span<const std::string> inputs,
                                          AcquireOptions options, AcquireStats* stats) {
  if (inputs.empty()) throw Error(ErrorCode::EmptyInput, "no inputs to embed");
  const auto model_key = model.model_key();

  AcquireStats local;
  std::vector<std::optional<EmbeddingVector>> found(inputs.size());
  std::vector<std::string> misses;
  std::unordered_map<std::string, std::size_t> miss_slot;
  std::vector<std::size_t> slot_of(inputs.size(), 0);

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].empty()) throw Error(ErrorCode::EmptyInput, "empty input string");
    std::optional<CacheEntry> hit;
    try {
      hit = cache.get(CacheKey::make(model_key, inputs[i]));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CorruptEntry) throw;
      ++local.corrupt_entries;
    }
    if (hit) {
      found[i] = std::move(hit->vector);
      ++local.cache_hits;
      continue;
    }
    ++local.cache_misses;
    auto [it, inserted] = miss_slot.try_emplace(inputs[i], misses.size());
    if (inserted) misses.push_back(inputs[i]);
    slot_of[i] = it->second;
  }

  std::vector<EmbeddingVector> fresh(misses.size());
  if (!misses.empty()) {
    if (options.offline) {
      throw Error(ErrorCode::OfflineMiss, std::to_string(misses.size()) + " inputs for " +
                                              model_key + " are not cached, first: '" +
                                              misses.front() + "'");
    }
    client.check_credentials(model);
    const auto calls_before = client.provider_calls();
    try {
      for_each_chunk(misses.size(), client.policy().batch_size, client.policy().max_in_flight,
                     [&](std::size_t begin, std::size_t end) {
                       std::span<const std::string> part(misses.data() + begin, end - begin);
                       auto vectors = client.request_batch(model, part);
                       const auto meta = client.provider_meta(model_key).value_or("");
                       for (std::size_t j = 0; j < vectors.size(); ++j) {
                         cache.put(CacheEntry{CacheKey::make(model_key, part[j]), vectors[j],
                                              now_ms(), meta});
                         fresh[begin + j] = std::move(vectors[j]);
                       }
                     });
    } catch (...) {
      local.provider_calls += client.provider_calls() - calls_before;
      if (stats) {
        stats->cache_hits += local.cache_hits;
        stats->cache_misses += local.cache_misses;
        stats->corrupt_entries += local.corrupt_entries;
        stats->provider_calls += local.provider_calls;
      }
      throw;
    }
    local.provider_calls += client.provider_calls() - calls_before;
  }

  std::vector<EmbeddingVector> out;
  out.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    out.push_back(found[i] ? std::move(*found[i]) : fresh[slot_of[i]]);
  }
  if (stats) {
    stats->cache_hits += local.cache_hits;
    stats->cache_misses += local.cache_misses;
    stats->corrupt_entries += local.corrupt_entries;
    stats->provider_calls += local.provider_calls;
  }
  return out;
}

}  // namespace promptbench
