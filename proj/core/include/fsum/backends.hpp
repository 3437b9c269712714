#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fsum/image.hpp"

namespace fsum {

// Scene-description prompt sent verbatim to every caption backend.
inline constexpr std::string_view kDescribePrompt =
    "Make your best guess of what might be happening in this scene in one "
    "sentence. Avoid mentioning objects that do not aid in understanding the "
    "context of the scene.";

// Difficulty-rating prompt, sent verbatim at temperature 0.
inline constexpr std::string_view kDifficultyPrompt =
    "Please rate how difficult it would be for a human to describe this scene "
    "on a scale from 0.000 to 1.000, where 0.000 is very easy and 1.000 is "
    "very difficult. Respond with only a number between 0.000 and 1.000.";

struct CaptionSample {
  std::string text;
  // Sum of token log-probabilities, when the provider exposes them.
  std::optional<double> sequence_loglik;
  std::optional<std::vector<double>> token_logliks;

  // sequence_loglik <= 0; token logliks, when present, sum to it within 1e-6.
  void validate() const;
};

struct DescriptionSet {
  std::vector<CaptionSample> samples;
  int n_samples = 0;
  std::string prompt_id;
  double temperature = 0.0;

  void validate() const;
};

struct EmbeddingVector {
  std::vector<double> values;

  int dim() const { return static_cast<int>(values.size()); }
  double norm() const;
};

// Standard cosine similarity. Throws ShapeError on dimension mismatch and
// DegenerateInputError on a zero-norm vector.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

class CaptionBackend {
 public:
  virtual ~CaptionBackend() = default;
  virtual std::string id() const = 0;
  // Whether samples carry sequence log-likelihoods.
  virtual bool provides_loglik() const = 0;
  // One sample; sample_index keys deterministic stubs and the cache.
  virtual CaptionSample describe_one(const ImageBuffer& image,
                                     const std::string& prompt,
                                     double temperature, int sample_index) = 0;
  virtual DescriptionSet describe(const ImageBuffer& image,
                                  const std::string& prompt, int n,
                                  double temperature);
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::string id() const = 0;
  virtual std::vector<EmbeddingVector> embed(
      const std::vector<std::string>& texts) = 0;
};

// Offline caption source: maps the image hash to a pool of canned sentences
// with hash-selected perturbations. Fully deterministic in
// (image hash, prompt, sample index); temperature only annotates the output.
// Emits synthetic token log-likelihoods so entropy estimation works offline;
// the difficulty prompt yields a deterministic numeric rating instead of a
// sentence so the prompted baseline works offline too.
class StubCaptionBackend : public CaptionBackend {
 public:
  explicit StubCaptionBackend(uint64_t salt = 0) : salt_(salt) {}
  std::string id() const override { return "stub-caption"; }
  bool provides_loglik() const override { return true; }
  CaptionSample describe_one(const ImageBuffer& image, const std::string& prompt,
                             double temperature, int sample_index) override;

 private:
  uint64_t salt_;
};

// Offline embedding source: seeded hash-to-vector, unit norm, fixed dim.
class StubEmbeddingBackend : public EmbeddingBackend {
 public:
  explicit StubEmbeddingBackend(int dim = 64) : dim_(dim) {}
  std::string id() const override { return "stub-embedding"; }
  std::vector<EmbeddingVector> embed(
      const std::vector<std::string>& texts) override;

 private:
  int dim_;
};

}  // namespace fsum
