#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fsum/backends.hpp"
#include "fsum/cache.hpp"
#include "fsum/config.hpp"
#include "fsum/errors.hpp"
#include "fsum/remote.hpp"
#include "fsum/transport.hpp"
#include "test_util.hpp"

using namespace fsum;
using fsum::test::TempDir;
using fsum::test::noise_image;
using nlohmann::json;

namespace {

EmbeddingVector vec(std::vector<double> values) {
  EmbeddingVector v;
  v.values = std::move(values);
  return v;
}

// Caption backend that counts how often the expensive path runs.
class CountingCaptionBackend : public CaptionBackend {
 public:
  std::string id() const override { return "counting-caption"; }
  bool provides_loglik() const override { return true; }
  CaptionSample describe_one(const ImageBuffer& image, const std::string& prompt,
                             double temperature, int sample_index) override {
    ++calls;
    return inner_.describe_one(image, prompt, temperature, sample_index);
  }

  std::atomic<int> calls{0};

 private:
  StubCaptionBackend inner_{0};
};

// Embedding backend that records every batch it is asked for.
class RecordingEmbeddingBackend : public EmbeddingBackend {
 public:
  std::string id() const override { return "recording-embedding"; }
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
    batches.push_back(texts);
    return inner_.embed(texts);
  }

  std::vector<std::vector<std::string>> batches;

 private:
  StubEmbeddingBackend inner_{16};
};

// Transport double driven by a queue of canned responses / throwers.
class ScriptedTransport : public Transport {
 public:
  struct Call {
    std::string path;
    std::string body;
    HttpHeaders headers;
  };

  HttpResponse post_json(const std::string& path, const std::string& body,
                         const HttpHeaders& headers) override {
    calls.push_back(Call{path, body, headers});
    REQUIRE_FALSE(script.empty());
    auto step = script.front();
    script.erase(script.begin());
    return step();
  }

  void push_response(int status, std::string body) {
    script.push_back([status, body = std::move(body)] {
      return HttpResponse{status, body};
    });
  }

  void push_failure(std::string message) {
    script.push_back([message = std::move(message)]() -> HttpResponse {
      throw BackendError(message);
    });
  }

  std::vector<Call> calls;
  std::vector<std::function<HttpResponse()>> script;
};

std::string chat_reply(const std::string& text, const std::vector<double>& logliks = {}) {
  json choice;
  choice["message"] = json{{"role", "assistant"}, {"content", text}};
  if (!logliks.empty()) {
    json toks = json::array();
    for (double l : logliks) toks.push_back(json{{"logprob", l}});
    choice["logprobs"] = json{{"content", toks}};
  }
  json reply;
  reply["choices"] = json::array({choice});
  return reply.dump();
}

std::string embeddings_reply(const std::vector<std::vector<double>>& vectors) {
  json data = json::array();
  for (const auto& v : vectors) data.push_back(json{{"embedding", v}});
  return json{{"data", data}}.dump();
}

struct EnvGuard {
  explicit EnvGuard(const char* name, const char* value) : name_(name) {
    ::setenv(name, value, 1);
  }
  ~EnvGuard() { ::unsetenv(name_); }
  const char* name_;
};

RemoteBackendConfig caption_config() {
  RemoteBackendConfig c;
  c.base_url = "https://api.example.test";
  c.caption_model = "cap-model";
  c.api_key_env = "FSUM_TEST_KEY";
  c.request_logprobs = true;
  return c;
}

RemoteBackendConfig embedding_config() {
  RemoteBackendConfig c;
  c.base_url = "https://api.example.test";
  c.embedding_model = "emb-model";
  c.api_key_env = "FSUM_TEST_KEY";
  return c;
}

}  // namespace

TEST_CASE("stub caption backend is deterministic and self-consistent") {
  StubCaptionBackend backend(0);
  const ImageBuffer image = noise_image(64, 64, 3);

  const CaptionSample a = backend.describe_one(image, std::string(kDescribePrompt), 1.0, 0);
  const CaptionSample b = backend.describe_one(image, std::string(kDescribePrompt), 1.0, 0);
  CHECK(a.text == b.text);
  REQUIRE(a.sequence_loglik.has_value());
  CHECK(*a.sequence_loglik == *b.sequence_loglik);
  CHECK_NOTHROW(a.validate());

  // Distinct sample indices draw distinct captions from the pool.
  std::set<std::string> texts;
  for (int i = 0; i < 5; ++i) {
    texts.insert(backend.describe_one(image, std::string(kDescribePrompt), 1.0, i).text);
  }
  CHECK(texts.size() >= 2);

  // A different image changes the captions.
  const ImageBuffer other = noise_image(64, 64, 4);
  CHECK(backend.describe_one(other, std::string(kDescribePrompt), 1.0, 0).text != a.text);

  // Salt separates otherwise identical backends.
  StubCaptionBackend salted(99);
  bool any_difference = false;
  for (int i = 0; i < 5 && !any_difference; ++i) {
    any_difference = salted.describe_one(image, std::string(kDescribePrompt), 1.0, i).text !=
                     backend.describe_one(image, std::string(kDescribePrompt), 1.0, i).text;
  }
  CHECK(any_difference);

  const DescriptionSet set = backend.describe(image, std::string(kDescribePrompt), 4, 0.7);
  CHECK(set.n_samples == 4);
  CHECK(set.samples.size() == 4);
  CHECK(set.temperature == 0.7);
  CHECK_FALSE(set.prompt_id.empty());
  CHECK_NOTHROW(set.validate());
}

TEST_CASE("caption sample validation") {
  CaptionSample s;
  s.text = "";
  CHECK_THROWS_AS(s.validate(), MalformedResponseError);
  s.text = "ok";
  s.sequence_loglik = 0.25;
  CHECK_THROWS_AS(s.validate(), DataError);
  s.sequence_loglik = -2.0;
  s.token_logliks = std::vector<double>{-0.5, -0.5};  // sums to -1, not -2
  CHECK_THROWS_AS(s.validate(), DataError);
  s.token_logliks = std::vector<double>{-0.5, -1.5};
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("stub embedding backend emits unit vectors deterministically") {
  StubEmbeddingBackend backend(48);
  const std::vector<std::string> texts = {"a cat", "a dog", "a cat"};
  const auto vectors = backend.embed(texts);
  REQUIRE(vectors.size() == 3);
  for (const auto& v : vectors) {
    CHECK(v.dim() == 48);
    CHECK(std::abs(v.norm() - 1.0) < 1e-9);
  }
  CHECK(vectors[0].values == vectors[2].values);  // same text, same vector
  CHECK(vectors[0].values != vectors[1].values);

  const auto again = backend.embed(texts);
  CHECK(again[1].values == vectors[1].values);

  CHECK_THROWS_AS(backend.embed({}), DataError);
  CHECK_THROWS_AS(backend.embed({""}), DataError);
}

TEST_CASE("cosine similarity basics") {
  CHECK(cosine(vec({1, 0}), vec({1, 0})) == 1.0);
  CHECK(cosine(vec({1, 0}), vec({0, 1})) == 0.0);
  CHECK(cosine(vec({1, 0}), vec({-1, 0})) == -1.0);
  CHECK(cosine(vec({1, 1}), vec({1, 0})) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(cosine(vec({1, 0}), vec({1, 0, 0})), ShapeError);
  CHECK_THROWS_AS(cosine(vec({0, 0}), vec({1, 0})), DegenerateInputError);
  CHECK_THROWS_AS(cosine(vec({}), vec({})), DegenerateInputError);
}

TEST_CASE("disk cache stores, misses and deduplicates") {
  TempDir dir;
  DiskCache cache(dir / "cache");

  CHECK_FALSE(cache.get("0123456789abcdef").has_value());
  cache.put("0123456789abcdef", "payload-1");
  REQUIRE(cache.get("0123456789abcdef").has_value());
  CHECK(*cache.get("0123456789abcdef") == "payload-1");
  cache.put("0123456789abcdef", "payload-2");  // overwrite
  CHECK(*cache.get("0123456789abcdef") == "payload-2");
  CHECK(cache.size() == 1);
  CHECK_THROWS_AS(cache.get("ab"), DataError);  // key too short to shard

  std::atomic<int> computed{0};
  const auto compute = [&] {
    ++computed;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    return std::string("expensive");
  };
  CHECK(cache.get_or_compute("fedcba9876543210", compute) == "expensive");
  CHECK(cache.get_or_compute("fedcba9876543210", compute) == "expensive");
  CHECK(computed.load() == 1);

  // Concurrent callers for one key collapse to a single computation.
  std::atomic<int> parallel_computed{0};
  const std::string key = "aaaa000011112222";
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&] {
      cache.get_or_compute(key, [&] {
        ++parallel_computed;
        std::this_thread::sleep_for(std::chrono::milliseconds(30));
        return std::string("shared");
      });
    });
  }
  for (auto& t : threads) t.join();
  CHECK(parallel_computed.load() == 1);
  CHECK(cache.size() == 3);
}

TEST_CASE("cached caption backend hits disk instead of the provider") {
  TempDir dir;
  auto cache = std::make_shared<DiskCache>(dir / "cache");
  auto inner = std::make_shared<CountingCaptionBackend>();
  CachedCaptionBackend cached(inner, cache);
  CHECK(cached.id() == "counting-caption");
  CHECK(cached.provides_loglik());

  const ImageBuffer image = noise_image(64, 64, 9);
  const CaptionSample first =
      cached.describe_one(image, std::string(kDescribePrompt), 1.0, 0);
  CHECK(inner->calls.load() == 1);
  const CaptionSample replay =
      cached.describe_one(image, std::string(kDescribePrompt), 1.0, 0);
  CHECK(inner->calls.load() == 1);  // served from disk
  CHECK(replay.text == first.text);
  CHECK(replay.sequence_loglik == first.sequence_loglik);
  CHECK(replay.token_logliks == first.token_logliks);

  // Distinct sample indices are distinct records.
  cached.describe_one(image, std::string(kDescribePrompt), 1.0, 1);
  CHECK(inner->calls.load() == 2);
  CHECK(cache->size() == 2);

  // Distinct temperature is a distinct record too.
  cached.describe_one(image, std::string(kDescribePrompt), 0.5, 0);
  CHECK(inner->calls.load() == 3);
}

TEST_CASE("cached embedding backend forwards only the misses") {
  TempDir dir;
  auto cache = std::make_shared<DiskCache>(dir / "cache");
  auto inner = std::make_shared<RecordingEmbeddingBackend>();
  CachedEmbeddingBackend cached(inner, cache);

  const auto first = cached.embed({"alpha", "beta"});
  REQUIRE(inner->batches.size() == 1);
  CHECK(inner->batches[0] == std::vector<std::string>{"alpha", "beta"});

  const auto second = cached.embed({"beta", "gamma", "alpha"});
  REQUIRE(inner->batches.size() == 2);
  CHECK(inner->batches[1] == std::vector<std::string>{"gamma"});
  CHECK(second[0].values == first[1].values);
  CHECK(second[2].values == first[0].values);

  const auto third = cached.embed({"alpha", "beta", "gamma"});
  CHECK(inner->batches.size() == 2);  // full hit, no provider call
  CHECK(third[0].values == first[0].values);
  CHECK_THROWS_AS(cached.embed({}), DataError);
}

TEST_CASE("retrying transport backs off and gives up") {
  SUBCASE("recovers after transient failures") {
    auto inner = std::make_shared<ScriptedTransport>();
    inner->push_failure("connection reset");
    inner->push_response(503, "overloaded");
    inner->push_response(200, "ok-body");
    std::vector<std::chrono::milliseconds> sleeps;
    RetryingTransport transport(inner, RetryPolicy{},
                                [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
    const HttpResponse response = transport.post_json("/p", "{}", {});
    CHECK(response.status == 200);
    CHECK(response.body == "ok-body");
    CHECK(inner->calls.size() == 3);
    REQUIRE(sleeps.size() == 2);
    CHECK(sleeps[0].count() == 250);
    CHECK(sleeps[1].count() == 500);
  }

  SUBCASE("throws after exhausting attempts") {
    auto inner = std::make_shared<ScriptedTransport>();
    for (int i = 0; i < 3; ++i) inner->push_response(429, "slow down");
    std::vector<std::chrono::milliseconds> sleeps;
    RetryingTransport transport(inner, RetryPolicy{},
                                [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
    CHECK_THROWS_WITH_AS(transport.post_json("/p", "{}", {}),
                         doctest::Contains("giving up after 3 attempts"), BackendError);
    CHECK(inner->calls.size() == 3);
    CHECK(sleeps.size() == 2);
  }

  SUBCASE("client errors are not retried") {
    auto inner = std::make_shared<ScriptedTransport>();
    inner->push_response(400, "bad request");
    RetryingTransport transport(inner, RetryPolicy{},
                                [](std::chrono::milliseconds) { FAIL("unexpected sleep"); });
    const HttpResponse response = transport.post_json("/p", "{}", {});
    CHECK(response.status == 400);
    CHECK(inner->calls.size() == 1);
  }
}

TEST_CASE("rate limited transport spaces out requests") {
  auto inner = std::make_shared<ScriptedTransport>();
  for (int i = 0; i < 4; ++i) inner->push_response(200, "ok");

  auto now = std::chrono::steady_clock::time_point{};
  std::vector<std::chrono::milliseconds> sleeps;
  const Sleeper sleeper = [&](std::chrono::milliseconds d) {
    sleeps.push_back(d);
    now += d;  // a sleep advances the fake clock
  };
  RateLimitedTransport transport(inner, std::chrono::milliseconds(100), sleeper,
                                 [&] { return now; });

  transport.post_json("/p", "{}", {});  // first call is free
  CHECK(sleeps.empty());
  transport.post_json("/p", "{}", {});  // immediate second call waits
  transport.post_json("/p", "{}", {});
  REQUIRE(sleeps.size() == 2);
  CHECK(sleeps[0].count() == 100);
  CHECK(sleeps[1].count() == 100);

  now += std::chrono::seconds(5);  // a long pause resets the window
  transport.post_json("/p", "{}", {});
  CHECK(sleeps.size() == 2);
  CHECK(inner->calls.size() == 4);
}

TEST_CASE("remote caption backend speaks the chat protocol") {
  EnvGuard key("FSUM_TEST_KEY", "sk-test-123");
  auto transport = std::make_shared<ScriptedTransport>();
  transport->push_response(200, chat_reply("people at a market.", {-0.5, -1.5}));
  RemoteCaptionBackend backend(caption_config(), transport);
  CHECK(backend.id() == "remote-caption:cap-model");
  CHECK(backend.provides_loglik());

  const ImageBuffer image = noise_image(48, 48, 21);
  const CaptionSample sample =
      backend.describe_one(image, std::string(kDescribePrompt), 0.7, 0);
  CHECK(sample.text == "people at a market.");
  REQUIRE(sample.sequence_loglik.has_value());
  CHECK(*sample.sequence_loglik == doctest::Approx(-2.0));
  REQUIRE(sample.token_logliks.has_value());
  CHECK(sample.token_logliks->size() == 2);

  REQUIRE(transport->calls.size() == 1);
  const auto& call = transport->calls[0];
  CHECK(call.path == "/v1/chat/completions");
  bool saw_auth = false;
  for (const auto& [k, v] : call.headers) {
    if (k == "Authorization") {
      saw_auth = true;
      CHECK(v == "Bearer sk-test-123");
    }
  }
  CHECK(saw_auth);

  const json body = json::parse(call.body);
  CHECK(body.at("model") == "cap-model");
  CHECK(body.at("temperature") == 0.7);
  CHECK(body.at("max_tokens") == 256);
  CHECK(body.at("logprobs") == true);
  const json& content = body.at("messages").at(0).at("content");
  CHECK(content.at(0).at("text") == std::string(kDescribePrompt));
  const std::string url = content.at(1).at("image_url").at("url");
  CHECK(url.rfind("data:image/png;base64,", 0) == 0);
}

TEST_CASE("remote caption backend error paths") {
  EnvGuard key("FSUM_TEST_KEY", "sk-test-123");
  const ImageBuffer image = noise_image(48, 48, 22);

  SUBCASE("missing fields raise a malformed-response error carrying the body") {
    auto transport = std::make_shared<ScriptedTransport>();
    transport->push_response(200, R"({"choices":[{"message":{}}]})");
    RemoteCaptionBackend backend(caption_config(), transport);
    try {
      backend.describe_one(image, "p", 0.7, 0);
      FAIL("expected MalformedResponseError");
    } catch (const MalformedResponseError& e) {
      CHECK(e.raw_reply() == R"({"choices":[{"message":{}}]})");
    }
  }

  SUBCASE("invalid JSON raises a malformed-response error") {
    auto transport = std::make_shared<ScriptedTransport>();
    transport->push_response(200, "not json");
    RemoteCaptionBackend backend(caption_config(), transport);
    CHECK_THROWS_AS(backend.describe_one(image, "p", 0.7, 0), MalformedResponseError);
  }

  SUBCASE("non-200 statuses raise a backend error") {
    auto transport = std::make_shared<ScriptedTransport>();
    transport->push_response(401, "unauthorized");
    RemoteCaptionBackend backend(caption_config(), transport);
    CHECK_THROWS_AS(backend.describe_one(image, "p", 0.7, 0), BackendError);
  }

  SUBCASE("config validation") {
    auto transport = std::make_shared<ScriptedTransport>();
    RemoteBackendConfig no_model = caption_config();
    no_model.caption_model.clear();
    CHECK_THROWS_AS(RemoteCaptionBackend(no_model, transport), ConfigError);
    RemoteBackendConfig no_url = caption_config();
    no_url.base_url.clear();
    CHECK_THROWS_AS(RemoteCaptionBackend(no_url, transport), ConfigError);
    CHECK_THROWS_AS(RemoteCaptionBackend(caption_config(), nullptr), ConfigError);
  }
}

TEST_CASE("remote backends require the API key environment variable") {
  ::unsetenv("FSUM_MISSING_KEY");
  RemoteBackendConfig config = caption_config();
  config.api_key_env = "FSUM_MISSING_KEY";
  auto transport = std::make_shared<ScriptedTransport>();
  CHECK_THROWS_WITH_AS(RemoteCaptionBackend(config, transport),
                       doctest::Contains("FSUM_MISSING_KEY"), ConfigError);
}

TEST_CASE("remote embedding backend speaks the embeddings protocol") {
  EnvGuard key("FSUM_TEST_KEY", "sk-test-123");

  SUBCASE("happy path") {
    auto transport = std::make_shared<ScriptedTransport>();
    transport->push_response(200, embeddings_reply({{1, 0, 0}, {0, 1, 0}}));
    RemoteEmbeddingBackend backend(embedding_config(), transport);
    CHECK(backend.id() == "remote-embedding:emb-model");
    const auto vectors = backend.embed({"one", "two"});
    REQUIRE(vectors.size() == 2);
    CHECK(vectors[0].values == std::vector<double>{1, 0, 0});
    CHECK(vectors[1].values == std::vector<double>{0, 1, 0});
    const json body = json::parse(transport->calls.at(0).body);
    CHECK(body.at("model") == "emb-model");
    CHECK(body.at("input") == json::array({"one", "two"}));
    CHECK(transport->calls[0].path == "/v1/embeddings");
  }

  SUBCASE("count mismatch") {
    auto transport = std::make_shared<ScriptedTransport>();
    transport->push_response(200, embeddings_reply({{1, 0}}));
    RemoteEmbeddingBackend backend(embedding_config(), transport);
    CHECK_THROWS_AS(backend.embed({"one", "two"}), MalformedResponseError);
  }

  SUBCASE("inconsistent dimensions") {
    auto transport = std::make_shared<ScriptedTransport>();
    transport->push_response(200, embeddings_reply({{1, 0}, {1, 0, 0}}));
    RemoteEmbeddingBackend backend(embedding_config(), transport);
    CHECK_THROWS_AS(backend.embed({"one", "two"}), ConfigError);
  }

  SUBCASE("empty batches are rejected locally") {
    auto transport = std::make_shared<ScriptedTransport>();
    RemoteEmbeddingBackend backend(embedding_config(), transport);
    CHECK_THROWS_AS(backend.embed({}), DataError);
    CHECK_THROWS_AS(backend.embed({""}), DataError);
    CHECK(transport->calls.empty());
  }
}

TEST_CASE("base64 encoding matches the reference vectors") {
  const auto enc = [](const std::string& s) {
    return base64_encode(reinterpret_cast<const unsigned char*>(s.data()), s.size());
  };
  CHECK(enc("") == "");
  CHECK(enc("f") == "Zg==");
  CHECK(enc("fo") == "Zm8=");
  CHECK(enc("foo") == "Zm9v");
  CHECK(enc("foob") == "Zm9vYg==");
  CHECK(enc("fooba") == "Zm9vYmE=");
  CHECK(enc("foobar") == "Zm9vYmFy");
}

TEST_CASE("effective temperature follows the profile unless overridden") {
  RunConfig config;
  CHECK(config.effective_temperature() == 1.0);  // stub default
  config.profile = "open";
  CHECK(config.effective_temperature() == 0.7);
  config.profile = "closed";
  CHECK(config.effective_temperature() == 1.0);
  config.temperature = 0.3;
  CHECK(config.effective_temperature() == 0.3);
  config.profile = "open";
  CHECK(config.effective_temperature() == 0.3);
}
