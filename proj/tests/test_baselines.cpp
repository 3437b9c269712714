#include <doctest.h>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fsum/backends.hpp"
#include "fsum/baselines.hpp"
#include "fsum/errors.hpp"
#include "fsum/image.hpp"
#include "test_util.hpp"

using namespace fsum;
using fsum::test::noise_image;

namespace {

// Backend that claims no log-likelihood support (the closed-provider case).
class NoLoglikBackend : public CaptionBackend {
 public:
  std::string id() const override { return "no-loglik"; }
  bool provides_loglik() const override { return false; }
  CaptionSample describe_one(const ImageBuffer&, const std::string&, double,
                             int) override {
    ++calls;
    CaptionSample s;
    s.text = "a plain caption.";
    return s;
  }
  int calls = 0;
};

// Backend that advertises log-likelihoods but never delivers them.
class LyingLoglikBackend : public CaptionBackend {
 public:
  std::string id() const override { return "lying-loglik"; }
  bool provides_loglik() const override { return true; }
  CaptionSample describe_one(const ImageBuffer&, const std::string&, double,
                             int) override {
    CaptionSample s;
    s.text = "a caption without likelihoods.";
    return s;
  }
};

// Backend with sequence logliks but no per-token breakdown.
class SequenceOnlyBackend : public CaptionBackend {
 public:
  std::string id() const override { return "sequence-only"; }
  bool provides_loglik() const override { return true; }
  CaptionSample describe_one(const ImageBuffer&, const std::string&, double,
                             int sample_index) override {
    CaptionSample s;
    s.text = "caption " + std::to_string(sample_index) + ".";
    s.sequence_loglik = -1.0 - sample_index;
    return s;
  }
};

// Scripted single-reply backend that records how it was prompted.
class CannedReplyBackend : public CaptionBackend {
 public:
  explicit CannedReplyBackend(std::string reply) : reply_(std::move(reply)) {}
  std::string id() const override { return "canned"; }
  bool provides_loglik() const override { return false; }
  CaptionSample describe_one(const ImageBuffer&, const std::string& prompt,
                             double temperature, int sample_index) override {
    last_prompt = prompt;
    last_temperature = temperature;
    last_sample_index = sample_index;
    CaptionSample s;
    s.text = reply_;
    return s;
  }

  std::string last_prompt;
  double last_temperature = -99.0;
  int last_sample_index = -1;

 private:
  std::string reply_;
};

ImageBuffer constant_image(int w, int h, float value) {
  ImageBuffer img;
  img.width = w;
  img.height = h;
  img.channels = 1;
  img.pixels.assign(static_cast<std::size_t>(w) * h, value);
  return img;
}

}  // namespace

TEST_CASE("entropy is the negated mean sequence log-likelihood") {
  CHECK(entropy_from_logliks({0.0}).h_hat == 0.0);
  CHECK(entropy_from_logliks({-1.0, -3.0}).h_hat == 2.0);
  CHECK(entropy_from_logliks(std::vector<double>(10, -2.5)).h_hat == 2.5);

  const EntropyEstimate est = entropy_from_logliks({-1.0, -2.0, -4.5});
  CHECK(est.n_samples == 3);
  CHECK(est.per_sample_loglik == std::vector<double>{-1.0, -2.0, -4.5});
  CHECK(est.h_hat == doctest::Approx(7.5 / 3.0));
  CHECK_NOTHROW(est.validate());

  CHECK_THROWS_AS(entropy_from_logliks({}), DataError);

  EntropyEstimate bad = est;
  bad.h_hat += 0.001;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad = est;
  bad.n_samples = 2;
  CHECK_THROWS_AS(bad.validate(), ShapeError);
}

TEST_CASE("language entropy with the stub backend") {
  StubCaptionBackend backend(0);
  const ImageBuffer image = noise_image(64, 64, 31);

  const EntropyEstimate est = language_entropy(image, backend, 10, 1.0);
  CHECK(est.n_samples == 10);
  CHECK_NOTHROW(est.validate());

  // The estimate must equal the hand-computed negated mean over the same
  // deterministic samples.
  const DescriptionSet set = backend.describe(image, std::string(kDescribePrompt), 10, 1.0);
  double sum = 0.0;
  for (const CaptionSample& s : set.samples) sum += *s.sequence_loglik;
  CHECK(est.h_hat == doctest::Approx(-sum / 10.0).epsilon(1e-12));

  // Per-token variant normalizes each sequence by its token count.
  const EntropyEstimate per_token = language_entropy(image, backend, 10, 1.0, true);
  double norm_sum = 0.0;
  for (const CaptionSample& s : set.samples) {
    norm_sum += *s.sequence_loglik / static_cast<double>(s.token_logliks->size());
  }
  CHECK(per_token.h_hat == doctest::Approx(-norm_sum / 10.0).epsilon(1e-12));

  CHECK_THROWS_AS(language_entropy(image, backend, 0), ConfigError);
}

TEST_CASE("entropy requires log-likelihood support") {
  const ImageBuffer image = noise_image(64, 64, 32);

  NoLoglikBackend closed;
  CHECK_THROWS_AS(language_entropy(image, closed, 10), CapabilityError);
  CHECK(closed.calls == 0);  // refused before any sampling

  LyingLoglikBackend lying;
  CHECK_THROWS_AS(language_entropy(image, lying, 3), MalformedResponseError);

  SequenceOnlyBackend seq_only;
  CHECK_NOTHROW(language_entropy(image, seq_only, 3));
  CHECK_THROWS_AS(language_entropy(image, seq_only, 3, 1.0, true), CapabilityError);
}

TEST_CASE("difficulty replies parse leniently but stay in range") {
  CHECK(parse_difficulty_reply("0.7") == 0.7);
  CHECK(parse_difficulty_reply("Difficulty: 0.85.") == 0.85);
  CHECK(parse_difficulty_reply("1") == 1.0);
  CHECK(parse_difficulty_reply("0") == 0.0);
  CHECK(parse_difficulty_reply(".25 maybe") == 0.25);
  CHECK(parse_difficulty_reply("I'd say 0.3 or 0.4") == 0.3);
  CHECK(parse_difficulty_reply("rating=1.0 (hard)") == 1.0);
  CHECK_THROWS_AS(parse_difficulty_reply("no numbers here"), MalformedResponseError);
  CHECK_THROWS_AS(parse_difficulty_reply(""), MalformedResponseError);
  CHECK_THROWS_AS(parse_difficulty_reply("5"), MalformedResponseError);
  CHECK_THROWS_AS(parse_difficulty_reply("1.5 out of 5"), MalformedResponseError);
  try {
    parse_difficulty_reply("out of range: 7");
    FAIL("expected MalformedResponseError");
  } catch (const MalformedResponseError& e) {
    CHECK(e.raw_reply() == "out of range: 7");
  }
}

TEST_CASE("prompted difficulty sends the fixed prompt at temperature zero") {
  CannedReplyBackend backend("I rate this 0.42 overall.");
  const ImageBuffer image = noise_image(64, 64, 33);
  const PromptedDifficulty result = prompted_difficulty(image, backend);
  CHECK(result.score == 0.42);
  CHECK(result.raw_reply == "I rate this 0.42 overall.");
  CHECK(backend.last_prompt == std::string(kDifficultyPrompt));
  CHECK(backend.last_temperature == 0.0);
  CHECK(backend.last_sample_index == 0);

  CannedReplyBackend vague("hmm, hard to say");
  CHECK_THROWS_AS(prompted_difficulty(image, vague), MalformedResponseError);
}

TEST_CASE("stub backend rates difficulty deterministically") {
  StubCaptionBackend backend(0);
  const ImageBuffer image = noise_image(64, 64, 35);
  const PromptedDifficulty first = prompted_difficulty(image, backend);
  const PromptedDifficulty again = prompted_difficulty(image, backend);
  CHECK(first.score == again.score);
  CHECK(first.score >= 0.0);
  CHECK(first.score <= 1.0);
  CHECK(first.raw_reply == again.raw_reply);

  const ImageBuffer other = noise_image(64, 64, 36);
  CHECK(prompted_difficulty(other, backend).raw_reply != first.raw_reply);
}

TEST_CASE("pixel entropy of reference images") {
  CHECK(pixel_entropy(constant_image(32, 32, 0.5f)) == 0.0);

  // Half black, half white: two equally likely bins = exactly 1 bit.
  ImageBuffer split = constant_image(32, 32, 0.0f);
  for (int y = 0; y < 32; ++y) {
    for (int x = 16; x < 32; ++x) split.pixels[static_cast<std::size_t>(y) * 32 + x] = 1.0f;
  }
  CHECK(pixel_entropy(split) == 1.0);

  // All 256 intensity bins equally occupied: exactly 8 bits.
  ImageBuffer ramp = constant_image(16, 16, 0.0f);
  for (int k = 0; k < 256; ++k) {
    ramp.pixels[static_cast<std::size_t>(k)] = static_cast<float>(k) / 255.0f;
  }
  CHECK(pixel_entropy(ramp) == 8.0);

  // Entropy never exceeds 8 bits on noisy content.
  const double noisy = pixel_entropy(noise_image(64, 64, 34));
  CHECK(noisy > 4.0);
  CHECK(noisy <= 8.0);
}

TEST_CASE("edge density counts gradient pixels") {
  CHECK(edge_density(constant_image(40, 30, 0.7f)) == 0.0);

  // A vertical step lights up exactly the two columns beside the boundary
  // under central differences.
  const int w = 40, h = 30;
  ImageBuffer step = constant_image(w, h, 0.0f);
  for (int y = 0; y < h; ++y) {
    for (int x = w / 2; x < w; ++x) step.pixels[static_cast<std::size_t>(y) * w + x] = 1.0f;
  }
  CHECK(edge_density(step, 0.1) == doctest::Approx(2.0 / w).epsilon(1e-12));

  // Threshold above the step gradient (0.5) suppresses everything.
  CHECK(edge_density(step, 0.6) == 0.0);

  CHECK_THROWS_AS(edge_density(step, 0.0), ConfigError);
  CHECK_THROWS_AS(edge_density(step, 1.0), ConfigError);
  CHECK_THROWS_AS(edge_density(step, -0.2), ConfigError);
}
