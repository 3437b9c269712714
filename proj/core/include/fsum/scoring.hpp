#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fsum/fsum_map.hpp"
#include "fsum/matrix.hpp"

namespace fsum {

// Distance-bin convention for K(r).  HalfOpen counts a pair once, in the bin
// (r-1, r] that contains its distance; Closed implements the printed closed
// interval [r-1, r], under which integer distances land in two adjacent bins.
// HalfOpen is the default: it is the only reading consistent with the
// reference K values (2x2 ones map: K(1)=2, K(2)=1) and the reference
// weighted score 2.5/H10.  The Closed toggle preserves the literal formula
// for sensitivity checks.
enum class BinMode { HalfOpen, Closed };

struct ScoreOptions {
  int R = 10;
  BinMode bin_mode = BinMode::HalfOpen;
};

// Scalar difficulty summary for one map.
struct ScoreReport {
  std::string image_id;
  int R = 10;
  std::vector<double> k_values;  // K(1), ..., K(R)
  double s_raw = 0.0;            // weighted sum S before dataset normalization
  double difficulty = -1.0;      // in [0,1] once dataset normalization ran; -1 before
  int n_cells = 0;               // the K-statistic normalizer (rows*cols)
};

// Weighted Ripley's K at one radius: (1/n_cells) * sum over ordered pairs
// p != q with grid-index Euclidean distance in the r-th bin of w_p * w_q.
double ripley_k(const Matrix& map, int r, BinMode mode = BinMode::HalfOpen);

// All of K(1..R) in one displacement-indexed pass (exact integer binning).
std::vector<double> ripley_k_all(const Matrix& map, int R,
                                 BinMode mode = BinMode::HalfOpen);

// s_raw = sum_r K(r)/r divided by sum_r 1/r.
double weighted_k_score(const Matrix& map, int R = 10,
                        BinMode mode = BinMode::HalfOpen);

// Literal O(n_cells^2 * R) reference implementation used by property tests;
// must agree with weighted_k_score within 1e-9.
double brute_force_oracle(const Matrix& map, int R = 10,
                          BinMode mode = BinMode::HalfOpen);

// K values + s_raw for one normalized map (difficulty left unset).
ScoreReport score_map(const Matrix& normalized, const std::string& image_id,
                      const ScoreOptions& options = {});

// Dataset-level difficulty: inverted min-max of s_raw (high understanding
// score -> low difficulty).  Requires >= 2 distinct values; stats are
// returned for persistence so later images can be scored consistently.
std::pair<std::vector<double>, NormalizationStats> difficulty_from_scores(
    const std::vector<double>& s_raws, const std::string& source);

// Difficulty for one s_raw under persisted stats.  Degenerate stats throw
// unless allow_degenerate (then 0.5).  Output clamped to [0,1].
double apply_difficulty(double s_raw, const NormalizationStats& stats,
                        bool allow_degenerate = false);

// Parses "half-open" / "closed"; anything else is a ConfigError.
BinMode parse_bin_mode(const std::string& name);
const char* bin_mode_name(BinMode mode);

}  // namespace fsum
