#include "fsum/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fsum/errors.hpp"

namespace fsum {
namespace {

long long isqrt_floor(long long v) {
  if (v < 0) throw BoundsError("isqrt of negative value");
  long long r = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(v))));
  while (r > 0 && r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

// Appends the 1-based bin indices containing squared distance d_sq (> 0).
// HalfOpen: the unique r with (r-1)^2 < d_sq <= r^2.  Closed: that r, plus
// r+1 when the distance is an exact integer (boundary double-count).
void bins_for(long long d_sq, BinMode mode, int R, int out[2], int* n_out) {
  const long long s = isqrt_floor(d_sq);
  const bool exact = s * s == d_sq;
  const long long r = exact ? s : s + 1;
  *n_out = 0;
  if (r >= 1 && r <= R) out[(*n_out)++] = static_cast<int>(r);
  if (mode == BinMode::Closed && exact && r + 1 <= R) {
    out[(*n_out)++] = static_cast<int>(r + 1);
  }
}

void check_map(const Matrix& map) {
  if (map.empty()) throw ShapeError("scoring: empty map");
}

}  // namespace

std::vector<double> ripley_k_all(const Matrix& map, int R, BinMode mode) {
  check_map(map);
  if (R < 1) throw ConfigError("scoring: R must be >= 1");
  const int rows = map.rows;
  const int cols = map.cols;
  const long long r_sq_max = static_cast<long long>(R) * R;

  std::vector<double> k(static_cast<std::size_t>(R), 0.0);
  // Group ordered pairs by displacement (dr, dc): every pair with that
  // displacement shares a distance, so the bin lookup runs once per
  // displacement and the inner loop is a plain weighted correlation.
  for (int dr = -(rows - 1); dr <= rows - 1; ++dr) {
    for (int dc = -(cols - 1); dc <= cols - 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      const long long d_sq =
          static_cast<long long>(dr) * dr + static_cast<long long>(dc) * dc;
      if (d_sq > r_sq_max) continue;
      int bins[2];
      int n_bins = 0;
      bins_for(d_sq, mode, R, bins, &n_bins);
      if (n_bins == 0) continue;

      double sum = 0.0;
      const int r_lo = std::max(0, -dr);
      const int r_hi = std::min(rows, rows - dr);
      const int c_lo = std::max(0, -dc);
      const int c_hi = std::min(cols, cols - dc);
      for (int r0 = r_lo; r0 < r_hi; ++r0) {
        const double* a = &map.values[static_cast<std::size_t>(r0) * cols];
        const double* b = &map.values[static_cast<std::size_t>(r0 + dr) * cols + dc];
        for (int c0 = c_lo; c0 < c_hi; ++c0) sum += a[c0] * b[c0];
      }
      for (int bi = 0; bi < n_bins; ++bi) k[bins[bi] - 1] += sum;
    }
  }

  const double n_cells = static_cast<double>(map.size());
  for (double& v : k) v /= n_cells;
  return k;
}

double ripley_k(const Matrix& map, int r, BinMode mode) {
  if (r < 1) throw ConfigError("scoring: r must be >= 1");
  return ripley_k_all(map, r, mode)[static_cast<std::size_t>(r) - 1];
}

double weighted_k_score(const Matrix& map, int R, BinMode mode) {
  const std::vector<double> k = ripley_k_all(map, R, mode);
  double num = 0.0;
  double den = 0.0;
  for (int r = 1; r <= R; ++r) {
    num += k[static_cast<std::size_t>(r) - 1] / r;
    den += 1.0 / r;
  }
  return num / den;
}

double brute_force_oracle(const Matrix& map, int R, BinMode mode) {
  check_map(map);
  if (R < 1) throw ConfigError("scoring: R must be >= 1");
  const int rows = map.rows;
  const int cols = map.cols;
  const double n_cells = static_cast<double>(map.size());

  double num = 0.0;
  double den = 0.0;
  for (int r = 1; r <= R; ++r) {
    double k_r = 0.0;
    for (int pr = 0; pr < rows; ++pr) {
      for (int pc = 0; pc < cols; ++pc) {
        for (int qr = 0; qr < rows; ++qr) {
          for (int qc = 0; qc < cols; ++qc) {
            if (pr == qr && pc == qc) continue;
            const double d = std::sqrt(static_cast<double>(pr - qr) * (pr - qr) +
                                       static_cast<double>(pc - qc) * (pc - qc));
            const bool inside = mode == BinMode::Closed
                                    ? (d >= r - 1.0 && d <= r)
                                    : (d > r - 1.0 && d <= r);
            if (inside) k_r += map.at(pr, pc) * map.at(qr, qc);
          }
        }
      }
    }
    num += (k_r / n_cells) / r;
    den += 1.0 / r;
  }
  return num / den;
}

ScoreReport score_map(const Matrix& normalized, const std::string& image_id,
                      const ScoreOptions& options) {
  ScoreReport report;
  report.image_id = image_id;
  report.R = options.R;
  report.k_values = ripley_k_all(normalized, options.R, options.bin_mode);
  double num = 0.0;
  double den = 0.0;
  for (int r = 1; r <= options.R; ++r) {
    num += report.k_values[static_cast<std::size_t>(r) - 1] / r;
    den += 1.0 / r;
  }
  report.s_raw = num / den;
  report.n_cells = static_cast<int>(normalized.size());
  return report;
}

std::pair<std::vector<double>, NormalizationStats> difficulty_from_scores(
    const std::vector<double>& s_raws, const std::string& source) {
  if (s_raws.empty()) {
    throw DataError("difficulty_from_scores: no scores");
  }
  if (s_raws.size() < 2) {
    throw DegenerateInputError(
        "difficulty_from_scores: a single score has no spread; opt into the "
        "0.5 fallback via apply_difficulty if intended");
  }
  const auto [lo_it, hi_it] = std::minmax_element(s_raws.begin(), s_raws.end());
  if (!(*hi_it > *lo_it)) {
    throw DegenerateInputError(
        "difficulty_from_scores: all s_raw values are equal; opt into the 0.5 "
        "fallback via apply_difficulty if intended");
  }
  NormalizationStats stats;
  stats.global_min = *lo_it;
  stats.global_max = *hi_it;
  stats.source = source;
  stats.n_values = static_cast<long long>(s_raws.size());

  std::vector<double> difficulties;
  difficulties.reserve(s_raws.size());
  for (double s : s_raws) difficulties.push_back(apply_difficulty(s, stats, false));
  return {std::move(difficulties), stats};
}

double apply_difficulty(double s_raw, const NormalizationStats& stats,
                        bool allow_degenerate) {
  stats.validate();
  const double span = stats.global_max - stats.global_min;
  if (span <= 0.0) {
    if (!allow_degenerate) {
      throw DegenerateInputError("apply_difficulty: degenerate stats (min == max)");
    }
    return 0.5;
  }
  const double normalized = (s_raw - stats.global_min) / span;
  return std::clamp(1.0 - normalized, 0.0, 1.0);
}

BinMode parse_bin_mode(const std::string& name) {
  if (name == "half-open") return BinMode::HalfOpen;
  if (name == "closed") return BinMode::Closed;
  throw ConfigError("unknown bin mode '" + name +
                    "' (expected 'half-open' or 'closed')");
}

const char* bin_mode_name(BinMode mode) {
  return mode == BinMode::HalfOpen ? "half-open" : "closed";
}

}  // namespace fsum
