#include "promptbench/transport.hpp"

#include <httplib.h>

#include <charconv>

#include <nlohmann/json.hpp>

#include "promptbench/providers.hpp"

namespace promptbench {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw TransportFailure("malformed URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public Transport {
 public:
  HttpResponse post(const HttpRequest& request) override {
    const auto [origin, path] = split_url(request.url);
    httplib::Client client(origin);
    client.set_connection_timeout(request.timeout);
    client.set_read_timeout(request.timeout);
    client.set_write_timeout(request.timeout);

    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [k, v] : request.headers) {
      if (k == "Content-Type") {
        content_type = v;
      } else {
        headers.emplace(k, v);
      }
    }
    auto result = client.Post(path, headers, request.body, content_type);
    if (!result) {
      throw TransportFailure("request to " + origin + " failed: " +
                             httplib::to_string(result.error()));
    }
    HttpResponse response{result->status, result->body, std::nullopt};
    if (result->has_header("Retry-After")) {
      const auto value = result->get_header_value("Retry-After");
      long seconds = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seconds);
      if (ec == std::errc{} && seconds >= 0) response.retry_after = std::chrono::seconds(seconds);
    }
    return response;
  }
};

class MockTransport final : public Transport {
 public:
  HttpResponse post(const HttpRequest& request) override {
    using nlohmann::json;
    auto body = json::parse(request.body, nullptr, false);
    if (body.is_discarded() || !body.contains("input") || !body["input"].is_array()) {
      return {400, R"({"error":{"message":"mock: request needs an input array"}})", std::nullopt};
    }
    const std::string model = body.value("model", std::string{});
    const std::size_t dim = body.value("dim", std::size_t{64});
    const std::string salt = body.value("salt", model);
    const bool insensitive = body.value("whitespace", std::string{"sensitive"}) == "insensitive";
    if (dim < 2) {
      return {400, R"({"error":{"message":"mock: dim must be >= 2"}})", std::nullopt};
    }

    json data = json::array();
    std::size_t index = 0;
    for (const auto& item : body["input"]) {
      if (!item.is_string()) {
        return {400, R"({"error":{"message":"mock: inputs must be strings"}})", std::nullopt};
      }
      const auto text = item.get<std::string>();
      auto vec = insensitive ? whitespace_insensitive_mock(text, dim) : mock_embed(text, dim, salt);
      data.push_back({{"object", "embedding"}, {"index", index++}, {"embedding", vec.values}});
    }
    json response = {{"object", "list"}, {"data", std::move(data)}, {"model", "mock/" + model}};
    return {200, response.dump(), std::nullopt};
  }
};

}  // namespace

std::shared_ptr<Transport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

std::shared_ptr<Transport> make_mock_transport() { return std::make_shared<MockTransport>(); }

}  // namespace promptbench
