#pragma once

#include <string>
#include <vector>

#include "fsum/backends.hpp"
#include "fsum/image.hpp"

namespace fsum {

// Monte-Carlo predictive-entropy estimate from sampled captions.
struct EntropyEstimate {
  double h_hat = 0.0;
  int n_samples = 0;
  std::vector<double> per_sample_loglik;

  void validate() const;  // h_hat == -mean(per_sample_loglik) within 1e-9
};

// Direct difficulty rating parsed from a model reply.
struct PromptedDifficulty {
  double score = 0.0;  // in [0,1]
  std::string raw_reply;
};

// h_hat = -(1/n) * sum of sequence log-likelihoods (length-unnormalized).
// per_token = true divides each sequence loglik by its token count first
// (sensitivity variant; requires token_logliks).
EntropyEstimate entropy_from_logliks(const std::vector<double>& sequence_logliks);

// Samples n captions of the image and estimates predictive entropy.
// Backends that do not expose log-likelihoods raise CapabilityError (the
// closed-profile case: entropy is unavailable there).
EntropyEstimate language_entropy(const ImageBuffer& image, CaptionBackend& backend,
                                 int n = 10, double temperature = 1.0,
                                 bool per_token = false);

// Extracts the first decimal number in [0,1] from `reply`; throws
// MalformedResponseError (with the raw reply attached) when none parses.
double parse_difficulty_reply(const std::string& reply);

// Sends the fixed difficulty-rating prompt at temperature 0 and parses the
// reply.
PromptedDifficulty prompted_difficulty(const ImageBuffer& image, CaptionBackend& backend);

// Shannon entropy (bits) of the 256-bin grayscale intensity histogram.
double pixel_entropy(const ImageBuffer& image);

// Fraction of pixels whose gradient magnitude exceeds `threshold` (in (0,1)).
double edge_density(const ImageBuffer& image, double threshold = 0.1);

}  // namespace fsum
