#include "fsum/transport.hpp"

#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "fsum/errors.hpp"

namespace fsum {
namespace {

class HttpTransport : public Transport {
 public:
  HttpTransport(std::string base_url, double timeout_seconds)
      : client_(base_url) {
    const auto timeout = std::chrono::milliseconds(
        static_cast<long long>(timeout_seconds * 1000.0));
    client_.set_connection_timeout(timeout);
    client_.set_read_timeout(timeout);
    client_.set_write_timeout(timeout);
    client_.set_follow_location(true);
  }

  HttpResponse post_json(const std::string& path, const std::string& body,
                         const HttpHeaders& headers) override {
    httplib::Headers hdrs;
    for (const auto& [k, v] : headers) hdrs.emplace(k, v);
    auto result = client_.Post(path, hdrs, body, "application/json");
    if (!result) {
      throw BackendError("http: request to " + path + " failed: " +
                         httplib::to_string(result.error()));
    }
    return HttpResponse{result->status, result->body};
  }

 private:
  httplib::Client client_;
};

bool is_transient_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

std::unique_ptr<Transport> make_http_transport(const std::string& base_url,
                                               double timeout_seconds) {
  return std::make_unique<HttpTransport>(base_url, timeout_seconds);
}

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

RetryingTransport::RetryingTransport(std::shared_ptr<Transport> inner,
                                     RetryPolicy policy, Sleeper sleeper)
    : inner_(std::move(inner)), policy_(policy), sleeper_(std::move(sleeper)) {
  if (!inner_) throw ConfigError("RetryingTransport: null inner transport");
  if (policy_.max_attempts < 1) throw ConfigError("RetryingTransport: max_attempts < 1");
}

HttpResponse RetryingTransport::post_json(const std::string& path,
                                          const std::string& body,
                                          const HttpHeaders& headers) {
  std::string last_error;
  auto backoff = policy_.initial_backoff;
  for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
    try {
      HttpResponse response = inner_->post_json(path, body, headers);
      if (!is_transient_status(response.status)) return response;
      last_error = "transient HTTP status " + std::to_string(response.status);
    } catch (const BackendError& e) {
      last_error = e.what();
    }
    if (attempt < policy_.max_attempts) {
      sleeper_(backoff);
      backoff = std::chrono::milliseconds(static_cast<long long>(
          static_cast<double>(backoff.count()) * policy_.backoff_multiplier));
    }
  }
  throw BackendError("transport: giving up after " +
                     std::to_string(policy_.max_attempts) +
                     " attempts; last error: " + last_error);
}

RateLimitedTransport::RateLimitedTransport(std::shared_ptr<Transport> inner,
                                           std::chrono::milliseconds min_interval,
                                           Sleeper sleeper, Clock clock)
    : inner_(std::move(inner)),
      min_interval_(min_interval),
      sleeper_(std::move(sleeper)),
      clock_(std::move(clock)) {
  if (!inner_) throw ConfigError("RateLimitedTransport: null inner transport");
  if (!clock_) clock_ = [] { return std::chrono::steady_clock::now(); };
}

HttpResponse RateLimitedTransport::post_json(const std::string& path,
                                             const std::string& body,
                                             const HttpHeaders& headers) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto now = clock_();
    if (primed_ && now < next_allowed_) {
      sleeper_(std::chrono::duration_cast<std::chrono::milliseconds>(next_allowed_ - now));
      next_allowed_ += min_interval_;
    } else {
      next_allowed_ = now + min_interval_;
      primed_ = true;
    }
  }
  return inner_->post_json(path, body, headers);
}

}  // namespace fsum
