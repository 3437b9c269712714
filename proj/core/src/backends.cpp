#include "fsum/backends.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "fsum/errors.hpp"
#include "fsum/hash.hpp"
#include "fsum/rng.hpp"

namespace fsum {

void CaptionSample::validate() const {
  if (text.empty()) throw MalformedResponseError("caption text is empty");
  if (sequence_loglik && *sequence_loglik > 0.0)
    throw DataError("sequence log-likelihood must be <= 0");
  if (token_logliks) {
    if (!sequence_loglik)
      throw DataError("token logliks present without a sequence loglik");
    double sum = std::accumulate(token_logliks->begin(), token_logliks->end(), 0.0);
    if (std::abs(sum - *sequence_loglik) > 1e-6)
      throw DataError("token logliks do not sum to the sequence loglik");
  }
}

void DescriptionSet::validate() const {
  if (n_samples < 1) throw DataError("description set needs n_samples >= 1");
  if (samples.size() != static_cast<size_t>(n_samples))
    throw ShapeError("description set holds " + std::to_string(samples.size()) +
                     " samples, declared " + std::to_string(n_samples));
  for (const auto& s : samples) s.validate();
}

double EmbeddingVector::norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim())
    throw ShapeError("cosine over mismatched dims " + std::to_string(u.dim()) +
                     " vs " + std::to_string(v.dim()));
  if (u.dim() == 0) throw DegenerateInputError("cosine over empty vectors");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (int i = 0; i < u.dim(); ++i) {
    dot += u.values[i] * v.values[i];
    nu += u.values[i] * u.values[i];
    nv += v.values[i] * v.values[i];
  }
  if (nu == 0.0 || nv == 0.0)
    throw DegenerateInputError("cosine over a zero-norm vector");
  double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(c, -1.0, 1.0);
}

DescriptionSet CaptionBackend::describe(const ImageBuffer& image,
                                        const std::string& prompt, int n,
                                        double temperature) {
  if (n < 1) throw DataError("describe requires n >= 1 samples");
  DescriptionSet set;
  set.n_samples = n;
  set.prompt_id = sha256_hex(prompt).substr(0, 12);
  set.temperature = temperature;
  set.samples.reserve(n);
  for (int i = 0; i < n; ++i)
    set.samples.push_back(describe_one(image, prompt, temperature, i));
  set.validate();
  return set;
}

namespace {

const char* kSubjects[] = {
    "a group of people", "a man",          "a woman",       "two children",
    "a street vendor",   "several cyclists", "a dog owner", "a family",
    "a small crowd",     "an elderly couple", "a chef",     "a street musician",
};
const char* kActions[] = {
    "gathers around a market stall", "crosses a busy intersection",
    "prepares food at an outdoor table", "plays near a fountain",
    "waits at a bus stop",               "walks along the waterfront",
    "watches a street performance",      "rides past a row of shops",
    "shares a meal in a park",           "browses items at a flea market",
    "repairs a bicycle on the sidewalk", "feeds birds by a bench",
};
const char* kContexts[] = {
    "on a sunny afternoon",  "in a crowded plaza",   "near an old building",
    "under scattered clouds", "at the edge of town", "during a local festival",
    "beside parked cars",     "in the early evening", "next to a canal",
    "on a quiet morning",     "in light rain",        "against a city skyline",
};

}  // namespace

CaptionSample StubCaptionBackend::describe_one(const ImageBuffer& image,
                                               const std::string& prompt,
                                               double temperature,
                                               int sample_index) {
  (void)temperature;
  std::ostringstream key;
  key << image_content_hash(image) << "|" << sha256_hex(prompt) << "|"
      << sample_index << "|" << salt_;
  Rng rng(hash64(key.str()));

  std::string text;
  if (prompt == kDifficultyPrompt) {
    // Deterministic rating in [0,1] tied to the image content, so the
    // prompted-difficulty baseline runs fully offline.
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%.3f", static_cast<double>(rng.bounded(1000)) / 999.0);
    text = buf;
  } else {
    const size_t ns = std::size(kSubjects);
    const size_t na = std::size(kActions);
    const size_t nc = std::size(kContexts);
    text = std::string(kSubjects[rng.bounded(ns)]) + " " + kActions[rng.bounded(na)] +
           " " + kContexts[rng.bounded(nc)] + ".";
    text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  }

  // Synthetic per-word log-likelihoods; negative, deterministic.
  CaptionSample sample;
  sample.text = text;
  std::vector<double> logliks;
  size_t words = 1 + std::count(text.begin(), text.end(), ' ');
  logliks.reserve(words);
  double total = 0.0;
  for (size_t i = 0; i < words; ++i) {
    double ll = -(0.05 + 0.45 * rng.uniform01());
    logliks.push_back(ll);
    total += ll;
  }
  sample.token_logliks = std::move(logliks);
  sample.sequence_loglik = total;
  sample.validate();
  return sample;
}

std::vector<EmbeddingVector> StubEmbeddingBackend::embed(
    const std::vector<std::string>& texts) {
  if (texts.empty()) throw DataError("embed requires at least one text");
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    if (text.empty()) throw DataError("embed requires nonempty texts");
    Rng rng(hash64(text + "|" + id()));
    EmbeddingVector v;
    v.values.resize(dim_);
    for (int i = 0; i < dim_; ++i) v.values[i] = rng.normal();
    double n = v.norm();
    if (n == 0.0) v.values[0] = 1.0, n = 1.0;
    for (double& x : v.values) x /= n;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace fsum
