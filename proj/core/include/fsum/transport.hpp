#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace fsum {

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

// Minimal HTTP abstraction so remote backends can be exercised with an
// in-memory double (request counting, canned replies) in tests.
class Transport {
 public:
  virtual ~Transport() = default;

  // POSTs `body` as application/json to `path` (relative to the transport's
  // base URL) and returns the raw response.  Throws BackendError on
  // connection-level failure.
  virtual HttpResponse post_json(const std::string& path, const std::string& body,
                                 const HttpHeaders& headers) = 0;
};

// Real HTTPS/HTTP client.  base_url is scheme://host[:port]; paths passed to
// post_json are appended verbatim.
std::unique_ptr<Transport> make_http_transport(const std::string& base_url,
                                               double timeout_seconds = 60.0);

using Sleeper = std::function<void(std::chrono::milliseconds)>;

// Default sleeper backed by std::this_thread::sleep_for.
Sleeper real_sleeper();

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{250};
  double backoff_multiplier = 2.0;
};

// Retries transient failures (connection errors, HTTP 429 and 5xx) with
// exponential backoff.  After max_attempts the last failure is rethrown as a
// BackendError carrying the cause.  The sleeper is injectable so tests run
// without real delays.
class RetryingTransport : public Transport {
 public:
  RetryingTransport(std::shared_ptr<Transport> inner, RetryPolicy policy = {},
                    Sleeper sleeper = real_sleeper());

  HttpResponse post_json(const std::string& path, const std::string& body,
                         const HttpHeaders& headers) override;

 private:
  std::shared_ptr<Transport> inner_;
  RetryPolicy policy_;
  Sleeper sleeper_;
};

// Enforces a minimum wall-clock interval between consecutive requests
// (a simple per-backend rate limit).  Thread-safe; the clock and sleeper are
// injectable for deterministic tests.
class RateLimitedTransport : public Transport {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  RateLimitedTransport(std::shared_ptr<Transport> inner,
                       std::chrono::milliseconds min_interval,
                       Sleeper sleeper = real_sleeper(), Clock clock = nullptr);

  HttpResponse post_json(const std::string& path, const std::string& body,
                         const HttpHeaders& headers) override;

 private:
  std::shared_ptr<Transport> inner_;
  std::chrono::milliseconds min_interval_;
  Sleeper sleeper_;
  Clock clock_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point next_allowed_{};
  bool primed_ = false;
};

}  // namespace fsum
