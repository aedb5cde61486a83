#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace promptbench {

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::chrono::milliseconds timeout{60000};
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::optional<std::chrono::seconds> retry_after;
};

/// Connection-level failure (refused, reset, timed out). Always retryable.
class TransportFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// HTTP(S) transport backed by cpp-httplib.
std::shared_ptr<Transport> make_http_transport();

/// In-process embedding server for provider_kind=mock. Speaks the
/// OpenAI-compatible wire format; reads `dim`, `salt` and `whitespace`
/// from the request body.
std::shared_ptr<Transport> make_mock_transport();

}  // namespace promptbench
