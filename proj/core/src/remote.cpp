#include "fsum/remote.hpp"

#include <cstdlib>

#include <json.hpp>

#include "fsum/errors.hpp"
#include "fsum/io.hpp"

namespace fsum {
namespace {

using nlohmann::json;

std::string require_env(const std::string& name) {
  const char* value = std::getenv(name.c_str());
  if (!value || *value == '\0') {
    throw ConfigError("remote backend: environment variable " + name +
                      " is unset or empty");
  }
  return value;
}

HttpHeaders auth_headers(const std::string& api_key) {
  return {{"Authorization", "Bearer " + api_key}};
}

json parse_or_throw(const HttpResponse& response, const std::string& what) {
  if (response.status != 200) {
    throw BackendError(what + ": HTTP " + std::to_string(response.status) + ": " +
                       response.body.substr(0, 512));
  }
  try {
    return json::parse(response.body);
  } catch (const json::exception& e) {
    throw MalformedResponseError(what + ": invalid JSON: " + e.what(), response.body);
  }
}

}  // namespace

void RemoteBackendConfig::validate() const {
  if (base_url.empty()) throw ConfigError("remote backend: base_url is empty");
  if (caption_model.empty() && embedding_model.empty()) {
    throw ConfigError("remote backend: no model configured");
  }
  if (api_key_env.empty()) throw ConfigError("remote backend: api_key_env is empty");
  if (max_tokens < 1) throw ConfigError("remote backend: max_tokens < 1");
}

std::string base64_encode(const unsigned char* data, std::size_t len) {
  static const char table[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve(((len + 2) / 3) * 4);
  std::size_t i = 0;
  for (; i + 3 <= len; i += 3) {
    const unsigned v = (unsigned(data[i]) << 16) | (unsigned(data[i + 1]) << 8) |
                       unsigned(data[i + 2]);
    out.push_back(table[(v >> 18) & 63]);
    out.push_back(table[(v >> 12) & 63]);
    out.push_back(table[(v >> 6) & 63]);
    out.push_back(table[v & 63]);
  }
  if (i + 1 == len) {
    const unsigned v = unsigned(data[i]) << 16;
    out.push_back(table[(v >> 18) & 63]);
    out.push_back(table[(v >> 12) & 63]);
    out += "==";
  } else if (i + 2 == len) {
    const unsigned v = (unsigned(data[i]) << 16) | (unsigned(data[i + 1]) << 8);
    out.push_back(table[(v >> 18) & 63]);
    out.push_back(table[(v >> 12) & 63]);
    out.push_back(table[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

RemoteCaptionBackend::RemoteCaptionBackend(RemoteBackendConfig config,
                                           std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.validate();
  if (config_.caption_model.empty()) {
    throw ConfigError("remote caption backend: caption_model is empty");
  }
  if (!transport_) throw ConfigError("remote caption backend: null transport");
  api_key_ = require_env(config_.api_key_env);
}

std::string RemoteCaptionBackend::id() const {
  return "remote-caption:" + config_.caption_model;
}

bool RemoteCaptionBackend::provides_loglik() const { return config_.request_logprobs; }

CaptionSample RemoteCaptionBackend::describe_one(const ImageBuffer& image,
                                                 const std::string& prompt,
                                                 double temperature,
                                                 int /*sample_index*/) {
  const std::vector<unsigned char> png = encode_png(image);
  const std::string data_url =
      "data:image/png;base64," + base64_encode(png.data(), png.size());

  json body;
  body["model"] = config_.caption_model;
  body["temperature"] = temperature;
  body["max_tokens"] = config_.max_tokens;
  if (config_.request_logprobs) body["logprobs"] = true;
  body["messages"] = json::array({json{
      {"role", "user"},
      {"content",
       json::array({json{{"type", "text"}, {"text", prompt}},
                    json{{"type", "image_url"},
                         {"image_url", json{{"url", data_url}}}}})}}});

  const HttpResponse response =
      transport_->post_json(config_.caption_path, body.dump(), auth_headers(api_key_));
  const json reply = parse_or_throw(response, "caption request");

  CaptionSample sample;
  try {
    const json& choice = reply.at("choices").at(0);
    sample.text = choice.at("message").at("content").get<std::string>();
    if (config_.request_logprobs && choice.contains("logprobs") &&
        !choice["logprobs"].is_null()) {
      std::vector<double> logliks;
      for (const json& tok : choice["logprobs"].at("content")) {
        logliks.push_back(tok.at("logprob").get<double>());
      }
      if (!logliks.empty()) {
        double sum = 0.0;
        for (double v : logliks) sum += v;
        sample.token_logliks = std::move(logliks);
        sample.sequence_loglik = sum;
      }
    }
  } catch (const json::exception& e) {
    throw MalformedResponseError(
        std::string("caption request: unexpected response shape: ") + e.what(),
        response.body);
  }
  sample.validate();
  return sample;
}

RemoteEmbeddingBackend::RemoteEmbeddingBackend(RemoteBackendConfig config,
                                               std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.validate();
  if (config_.embedding_model.empty()) {
    throw ConfigError("remote embedding backend: embedding_model is empty");
  }
  if (!transport_) throw ConfigError("remote embedding backend: null transport");
  api_key_ = require_env(config_.api_key_env);
}

std::string RemoteEmbeddingBackend::id() const {
  return "remote-embedding:" + config_.embedding_model;
}

std::vector<EmbeddingVector> RemoteEmbeddingBackend::embed(
    const std::vector<std::string>& texts) {
  if (texts.empty()) throw DataError("embed: empty text batch");
  for (const std::string& t : texts) {
    if (t.empty()) throw DataError("embed: empty text in batch");
  }

  json body;
  body["model"] = config_.embedding_model;
  body["input"] = texts;

  const HttpResponse response =
      transport_->post_json(config_.embedding_path, body.dump(), auth_headers(api_key_));
  const json reply = parse_or_throw(response, "embedding request");

  std::vector<EmbeddingVector> out;
  try {
    const json& data = reply.at("data");
    out.reserve(data.size());
    for (const json& item : data) {
      EmbeddingVector v;
      v.values = item.at("embedding").get<std::vector<double>>();
      out.push_back(std::move(v));
    }
  } catch (const json::exception& e) {
    throw MalformedResponseError(
        std::string("embedding request: unexpected response shape: ") + e.what(),
        response.body);
  }
  if (out.size() != texts.size()) {
    throw MalformedResponseError("embedding request: got " + std::to_string(out.size()) +
                                     " vectors for " + std::to_string(texts.size()) +
                                     " texts",
                                 response.body);
  }
  for (const EmbeddingVector& v : out) {
    if (v.dim() != out.front().dim()) {
      throw ConfigError("embedding request: inconsistent dimensions in one batch (" +
                        std::to_string(v.dim()) + " vs " +
                        std::to_string(out.front().dim()) + ")");
    }
  }
  return out;
}

}  // namespace fsum
