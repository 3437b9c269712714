#pragma once

#include <memory>
#include <string>

#include "fsum/backends.hpp"
#include "fsum/transport.hpp"

namespace fsum {

// Connection settings for one provider endpoint (chat-completions style for
// captions, embeddings style for text vectors).  The API key is read from the
// named environment variable at construction, never stored in config files.
struct RemoteBackendConfig {
  std::string base_url;             // scheme://host[:port]
  std::string caption_path = "/v1/chat/completions";
  std::string embedding_path = "/v1/embeddings";
  std::string caption_model;
  std::string embedding_model;
  std::string api_key_env = "FSUM_API_KEY";
  bool request_logprobs = false;    // open-style providers expose token logliks
  int max_tokens = 256;

  void validate() const;            // throws ConfigError on missing fields
};

// Caption backend speaking an OpenAI-compatible chat-completions protocol.
// Images travel as base64 PNG data URLs inside the user message content.
class RemoteCaptionBackend : public CaptionBackend {
 public:
  RemoteCaptionBackend(RemoteBackendConfig config, std::shared_ptr<Transport> transport);

  std::string id() const override;
  bool provides_loglik() const override;
  CaptionSample describe_one(const ImageBuffer& image, const std::string& prompt,
                             double temperature, int sample_index) override;

 private:
  RemoteBackendConfig config_;
  std::shared_ptr<Transport> transport_;
  std::string api_key_;
};

// Embedding backend speaking an OpenAI-compatible embeddings protocol.
class RemoteEmbeddingBackend : public EmbeddingBackend {
 public:
  RemoteEmbeddingBackend(RemoteBackendConfig config, std::shared_ptr<Transport> transport);

  std::string id() const override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

 private:
  RemoteBackendConfig config_;
  std::shared_ptr<Transport> transport_;
  std::string api_key_;
};

// Standard base64 (RFC 4648, with padding); used for image payloads.
std::string base64_encode(const unsigned char* data, std::size_t len);

}  // namespace fsum
