#include "fsum/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <regex>

#include "fsum/errors.hpp"

namespace fsum {

void EntropyEstimate::validate() const {
  if (per_sample_loglik.empty()) throw DataError("EntropyEstimate: no samples");
  if (n_samples != static_cast<int>(per_sample_loglik.size())) {
    throw ShapeError("EntropyEstimate: n_samples mismatch");
  }
  double mean = 0.0;
  for (double v : per_sample_loglik) mean += v;
  mean /= static_cast<double>(per_sample_loglik.size());
  if (std::abs(h_hat - (-mean)) > 1e-9) {
    throw DataError("EntropyEstimate: h_hat != -mean(per_sample_loglik)");
  }
}

EntropyEstimate entropy_from_logliks(const std::vector<double>& sequence_logliks) {
  if (sequence_logliks.empty()) {
    throw DataError("entropy_from_logliks: empty sample list");
  }
  EntropyEstimate est;
  est.per_sample_loglik = sequence_logliks;
  est.n_samples = static_cast<int>(sequence_logliks.size());
  double sum = 0.0;
  for (double v : sequence_logliks) sum += v;
  est.h_hat = -sum / static_cast<double>(sequence_logliks.size());
  return est;
}

EntropyEstimate language_entropy(const ImageBuffer& image, CaptionBackend& backend,
                                 int n, double temperature, bool per_token) {
  if (n < 1) throw ConfigError("language_entropy: n < 1");
  if (!backend.provides_loglik()) {
    throw CapabilityError("language_entropy: backend '" + backend.id() +
                          "' does not expose log-likelihoods; entropy is "
                          "unavailable for this profile");
  }
  const DescriptionSet set =
      backend.describe(image, std::string(kDescribePrompt), n, temperature);
  std::vector<double> logliks;
  logliks.reserve(set.samples.size());
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    const CaptionSample& s = set.samples[i];
    if (!s.sequence_loglik) {
      throw MalformedResponseError(
          "language_entropy: sample " + std::to_string(i) +
              " from backend '" + backend.id() + "' carries no sequence_loglik",
          s.text);
    }
    if (per_token) {
      if (!s.token_logliks || s.token_logliks->empty()) {
        throw CapabilityError("language_entropy: per-token variant needs "
                              "token_logliks, missing on sample " +
                              std::to_string(i));
      }
      logliks.push_back(*s.sequence_loglik /
                        static_cast<double>(s.token_logliks->size()));
    } else {
      logliks.push_back(*s.sequence_loglik);
    }
  }
  return entropy_from_logliks(logliks);
}

double parse_difficulty_reply(const std::string& reply) {
  static const std::regex number_re(R"((\d+\.\d+|\.\d+|\d+))");
  auto begin = std::sregex_iterator(reply.begin(), reply.end(), number_re);
  auto end = std::sregex_iterator();
  for (auto it = begin; it != end; ++it) {
    const double value = std::stod(it->str());
    if (value >= 0.0 && value <= 1.0) return value;
  }
  throw MalformedResponseError(
      "prompted difficulty: no decimal number in [0,1] found in reply", reply);
}

PromptedDifficulty prompted_difficulty(const ImageBuffer& image,
                                       CaptionBackend& backend) {
  const CaptionSample sample =
      backend.describe_one(image, std::string(kDifficultyPrompt), 0.0, 0);
  PromptedDifficulty result;
  result.raw_reply = sample.text;
  result.score = parse_difficulty_reply(sample.text);
  return result;
}

double pixel_entropy(const ImageBuffer& image) {
  const ImageBuffer gray = to_gray(image);
  std::array<long long, 256> histogram{};
  for (float v : gray.pixels) {
    const int bin = std::clamp(static_cast<int>(std::lround(v * 255.0f)), 0, 255);
    ++histogram[static_cast<std::size_t>(bin)];
  }
  const double total = static_cast<double>(gray.pixels.size());
  double entropy = 0.0;
  for (long long count : histogram) {
    if (count == 0) continue;
    const double p = static_cast<double>(count) / total;
    entropy -= p * std::log2(p);
  }
  return entropy;
}

double edge_density(const ImageBuffer& image, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError("edge_density: threshold must lie in (0,1)");
  }
  const std::vector<float> magnitude = gradient_magnitude(to_gray(image));
  long long above = 0;
  for (float v : magnitude) {
    if (v > threshold) ++above;
  }
  return static_cast<double>(above) / static_cast<double>(magnitude.size());
}

}  // namespace fsum
