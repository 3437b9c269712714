#include "fsum/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "fsum/csv.hpp"
#include "fsum/errors.hpp"
#include "fsum/hash.hpp"
#include "fsum/rng.hpp"

namespace fsum {
namespace {

using nlohmann::json;

const std::set<std::string> kConditions = {"free-viewing", "2-saccade", "4-saccade"};

// Pearson r, or NaN when undefined; the exception-free core shared by the
// bootstrap loops.
double pearson_or_nan(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 3 || y.size() != n) return std::nan("");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nan("");
  return sxy / std::sqrt(sxx * syy);
}

// Type-7 (linear interpolation) percentile of a sorted vector.
double percentile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw DataError("percentile of empty vector");
  if (sorted.size() == 1) return sorted[0];
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::optional<double> parse_optional_double(const std::string& field,
                                            const std::string& context) {
  if (field.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw DataError("behavior CSV: cannot parse number '" + field + "' in " + context);
  }
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                         const std::filesystem::path& path) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw DataError("CSV " + path.string() + ": missing column '" + name + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

std::string field_or_empty(const std::vector<std::string>& row, std::size_t index) {
  return index < row.size() ? row[index] : std::string();
}

// Drops leading "#"-prefixed comment rows (the provenance stamp our own
// writers emit) so the header is always the first surviving row.
void strip_leading_comments(std::vector<std::vector<std::string>>& rows) {
  std::size_t keep = 0;
  while (keep < rows.size() && !rows[keep].empty() && !rows[keep][0].empty() &&
         rows[keep][0][0] == '#') {
    ++keep;
  }
  rows.erase(rows.begin(), rows.begin() + keep);
}

std::string provenance_comment(const Provenance& provenance) {
  return "# config_hash=" + provenance.config_hash + " version=" + provenance.version;
}

}  // namespace

void BehavioralRecord::validate() const {
  if (participant_id.empty()) throw DataError("behavioral record: empty participant_id");
  if (image_id.empty()) throw DataError("behavioral record: empty image_id");
  if (!kConditions.count(condition)) {
    throw DataError("behavioral record: unknown condition '" + condition + "'");
  }
  if (!rt_ms && !saccade_count && !description) {
    throw DataError("behavioral record " + participant_id + "/" + image_id +
                    ": no measure present");
  }
  if (rt_ms && !(*rt_ms > 0.0)) {
    throw DataError("behavioral record " + participant_id + "/" + image_id +
                    ": rt_ms must be > 0");
  }
  if (saccade_count && *saccade_count < 0) {
    throw DataError("behavioral record " + participant_id + "/" + image_id +
                    ": saccade_count must be >= 0");
  }
}

std::vector<BehavioralRecord> read_behavioral_csv(const std::filesystem::path& path) {
  auto rows = read_csv(path);
  strip_leading_comments(rows);
  if (rows.empty()) throw DataError("behavior CSV " + path.string() + ": empty file");
  const std::vector<std::string>& header = rows.front();
  const std::size_t c_pid = column_index(header, "participant_id", path);
  const std::size_t c_img = column_index(header, "image_id", path);
  const std::size_t c_cond = column_index(header, "condition", path);
  const std::size_t c_rt = column_index(header, "rt_ms", path);
  const std::size_t c_sac = column_index(header, "saccade_count", path);
  const std::size_t c_desc = column_index(header, "description", path);

  std::vector<BehavioralRecord> records;
  records.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::vector<std::string>& row = rows[i];
    if (row.size() == 1 && row[0].empty()) continue;  // stray blank line
    const std::string context = "row " + std::to_string(i + 1);
    BehavioralRecord rec;
    rec.participant_id = field_or_empty(row, c_pid);
    rec.image_id = field_or_empty(row, c_img);
    rec.condition = field_or_empty(row, c_cond);
    rec.rt_ms = parse_optional_double(field_or_empty(row, c_rt), context);
    if (const auto sac = parse_optional_double(field_or_empty(row, c_sac), context)) {
      const int count = static_cast<int>(std::lround(*sac));
      if (std::abs(*sac - count) > 1e-9) {
        throw DataError("behavior CSV: non-integer saccade_count in " + context);
      }
      rec.saccade_count = count;
    }
    const std::string desc = field_or_empty(row, c_desc);
    if (!desc.empty()) rec.description = desc;
    rec.validate();
    records.push_back(std::move(rec));
  }
  return records;
}

std::optional<double> measure_value(const BehavioralRecord& record, Measure measure) {
  switch (measure) {
    case Measure::RtMs:
      return record.rt_ms;
    case Measure::SaccadeCount:
      if (record.saccade_count) return static_cast<double>(*record.saccade_count);
      return std::nullopt;
  }
  return std::nullopt;
}

AggregatedMeasure aggregate_by_image(const std::vector<BehavioralRecord>& records,
                                     Measure measure) {
  std::map<std::string, std::pair<double, long long>> sums;  // image -> (sum, count)
  std::set<std::string> seen_images;
  for (const BehavioralRecord& rec : records) {
    seen_images.insert(rec.image_id);
    if (const auto v = measure_value(rec, measure)) {
      auto& [sum, count] = sums[rec.image_id];
      sum += *v;
      ++count;
    }
  }
  AggregatedMeasure out;
  for (const auto& [image, sc] : sums) {
    out.image_ids.push_back(image);
    out.means.push_back(sc.first / static_cast<double>(sc.second));
  }
  for (const std::string& image : seen_images) {
    if (!sums.count(image)) out.excluded_images.push_back(image);
  }
  return out;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw ShapeError("pearson: length mismatch (" + std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()) + ")");
  }
  if (x.size() < 3) {
    throw ShapeError("pearson: need at least 3 points, got " + std::to_string(x.size()));
  }
  const double r = pearson_or_nan(x, y);
  if (std::isnan(r)) {
    throw UndefinedCorrelationError("pearson: constant series has no correlation");
  }
  return r;
}

BootstrapResult bootstrap_ci(const std::vector<double>& x, const std::vector<double>& y,
                             int n_boot, std::uint64_t seed) {
  if (n_boot < 1) throw ConfigError("bootstrap: n_boot < 1");
  pearson(x, y);  // enforce the preconditions once on the full sample
  const std::size_t n = x.size();

  std::vector<double> rs;
  rs.reserve(static_cast<std::size_t>(n_boot));
  long long skipped = 0;
  std::vector<double> xv(n);
  std::vector<double> yv(n);
  for (int it = 0; it < n_boot; ++it) {
    Rng rng = Rng::for_stream(seed, static_cast<std::uint64_t>(it));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = static_cast<std::size_t>(rng.bounded(n));
      xv[i] = x[idx];
      yv[i] = y[idx];
    }
    const double r = pearson_or_nan(xv, yv);
    if (std::isnan(r)) {
      ++skipped;
    } else {
      rs.push_back(r);
    }
  }
  if (rs.empty()) {
    throw DegenerateInputError("bootstrap: every resample was degenerate");
  }
  std::sort(rs.begin(), rs.end());
  BootstrapResult result;
  result.ci_low = percentile_sorted(rs, 0.025);
  result.ci_high = percentile_sorted(rs, 0.975);
  result.n_boot = n_boot;
  result.skipped = skipped;
  return result;
}

PairedDeltaResult paired_delta_test(const std::vector<double>& a,
                                    const std::vector<double>& b,
                                    const std::vector<double>& behavior, int n_boot,
                                    std::uint64_t seed) {
  if (a.size() != b.size() || a.size() != behavior.size()) {
    throw AlignmentError("paired_delta_test: metric/behavior vectors are misaligned (" +
                         std::to_string(a.size()) + ", " + std::to_string(b.size()) +
                         ", " + std::to_string(behavior.size()) + ")");
  }
  if (n_boot < 1) throw ConfigError("paired_delta_test: n_boot < 1");
  const double r_a = pearson(a, behavior);
  const double r_b = pearson(b, behavior);
  const std::size_t n = a.size();

  long long below = 0;   // resamples with r_a - r_b < 0
  long long ties = 0;    // resamples with r_a - r_b == 0 (identical metrics)
  long long valid = 0;
  long long skipped = 0;
  std::vector<double> av(n);
  std::vector<double> bv(n);
  std::vector<double> hv(n);
  for (int it = 0; it < n_boot; ++it) {
    Rng rng = Rng::for_stream(seed, static_cast<std::uint64_t>(it));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = static_cast<std::size_t>(rng.bounded(n));
      av[i] = a[idx];
      bv[i] = b[idx];
      hv[i] = behavior[idx];
    }
    const double ra = pearson_or_nan(av, hv);
    const double rb = pearson_or_nan(bv, hv);
    if (std::isnan(ra) || std::isnan(rb)) {
      ++skipped;
      continue;
    }
    ++valid;
    const double delta = ra - rb;
    if (delta < 0.0) ++below;
    else if (delta == 0.0) ++ties;
  }
  if (valid == 0) {
    throw DegenerateInputError("paired_delta_test: every resample was degenerate");
  }
  PairedDeltaResult result;
  // Exact ties (possible when both metrics are the same vector) count half,
  // so identical metrics land at p = 0.5 rather than 1.0.
  result.p_delta = (static_cast<double>(below) + 0.5 * static_cast<double>(ties)) /
                   static_cast<double>(valid);
  result.delta_r = r_a - r_b;
  result.n_boot = n_boot;
  result.skipped = skipped;
  return result;
}

LeaveOneOutResult leave_one_out_consistency(const std::vector<BehavioralRecord>& records,
                                            Measure measure) {
  // participant -> image -> mean value (duplicates averaged)
  std::map<std::string, std::map<std::string, std::pair<double, long long>>> by_participant;
  for (const BehavioralRecord& rec : records) {
    if (const auto v = measure_value(rec, measure)) {
      auto& [sum, count] = by_participant[rec.participant_id][rec.image_id];
      sum += *v;
      ++count;
    }
  }
  if (by_participant.size() < 3) {
    throw CoverageError("leave_one_out: need >= 3 participants with the measure, got " +
                        std::to_string(by_participant.size()));
  }

  LeaveOneOutResult result;
  std::vector<double> rs;
  for (const auto& [pid, images] : by_participant) {
    std::vector<double> own;
    std::vector<double> others_mean;
    for (const auto& [image, sc] : images) {
      double sum = 0.0;
      long long count = 0;
      for (const auto& [other_pid, other_images] : by_participant) {
        if (other_pid == pid) continue;
        const auto it = other_images.find(image);
        if (it == other_images.end()) continue;
        sum += it->second.first / static_cast<double>(it->second.second);
        ++count;
      }
      if (count == 0) continue;  // image seen by nobody else
      own.push_back(sc.first / static_cast<double>(sc.second));
      others_mean.push_back(sum / static_cast<double>(count));
    }
    if (own.size() < 3) continue;
    const double r = pearson_or_nan(own, others_mean);
    if (std::isnan(r)) continue;
    result.per_participant.emplace_back(pid, r);
    rs.push_back(r);
  }
  if (rs.size() < 3) {
    throw CoverageError("leave_one_out: only " + std::to_string(rs.size()) +
                        " participants have enough shared images (need >= 3)");
  }
  double sum = 0.0;
  for (double r : rs) sum += r;
  result.mean_r = sum / static_cast<double>(rs.size());
  return result;
}

bool validity_keep(const std::string& description,
                   const std::vector<std::string>& gold_standards,
                   EmbeddingBackend& embeddings, double threshold) {
  if (description.empty()) throw DataError("validity_keep: empty description");
  if (gold_standards.empty()) throw DataError("validity_keep: no gold standards");
  std::vector<std::string> texts;
  texts.reserve(gold_standards.size() + 1);
  texts.push_back(description);
  for (const std::string& g : gold_standards) texts.push_back(g);
  const std::vector<EmbeddingVector> vecs = embeddings.embed(texts);
  for (std::size_t i = 1; i < vecs.size(); ++i) {
    if (cosine(vecs[0], vecs[i]) >= threshold) return true;
  }
  return false;
}

double description_accuracy(const std::string& response,
                            const std::vector<std::string>& references,
                            EmbeddingBackend& embeddings) {
  if (response.empty()) throw DataError("description_accuracy: empty response");
  if (references.empty()) throw DataError("description_accuracy: no references");
  std::vector<std::string> texts;
  texts.reserve(references.size() + 1);
  texts.push_back(response);
  for (const std::string& ref : references) texts.push_back(ref);
  const std::vector<EmbeddingVector> vecs = embeddings.embed(texts);
  double sum = 0.0;
  for (std::size_t i = 1; i < vecs.size(); ++i) sum += cosine(vecs[0], vecs[i]);
  return sum / static_cast<double>(references.size());
}

void CorrelationReport::validate() const {
  if (metric_name.empty()) throw DataError("correlation report: empty metric name");
  if (!(r >= -1.0 - 1e-12 && r <= 1.0 + 1e-12)) {
    throw DataError("correlation report: r out of range");
  }
  if (n_boot > 0 && !(ci_low <= r && r <= ci_high)) {
    throw DataError("correlation report: r outside its own CI");
  }
}

std::vector<MetricScore> read_metric_csv(const std::filesystem::path& path) {
  auto rows = read_csv(path);
  strip_leading_comments(rows);
  if (rows.empty()) throw DataError("metric CSV " + path.string() + ": empty file");
  const std::vector<std::string>& header = rows.front();
  const std::size_t c_img = column_index(header, "image_id", path);
  const std::size_t c_name = column_index(header, "metric_name", path);
  const std::size_t c_val = column_index(header, "value", path);

  std::vector<MetricScore> scores;
  scores.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::vector<std::string>& row = rows[i];
    if (row.size() == 1 && row[0].empty()) continue;
    MetricScore score;
    score.image_id = field_or_empty(row, c_img);
    score.metric_name = field_or_empty(row, c_name);
    const std::string value = field_or_empty(row, c_val);
    if (score.image_id.empty() || score.metric_name.empty() || value.empty()) {
      throw DataError("metric CSV " + path.string() + ": incomplete row " +
                      std::to_string(i + 1));
    }
    const auto parsed = parse_optional_double(value, "row " + std::to_string(i + 1));
    score.value = *parsed;
    if (!std::isfinite(score.value)) {
      throw DataError("metric CSV " + path.string() + ": non-finite value in row " +
                      std::to_string(i + 1));
    }
    scores.push_back(std::move(score));
  }
  return scores;
}

namespace {

// Participant-scheme bootstrap: resample participants with replacement,
// rebuild the per-image means from the drawn participants (multiplicity
// counts), and correlate against the metric on the surviving images.
BootstrapResult bootstrap_participants(const std::vector<BehavioralRecord>& behavior,
                                       Measure measure,
                                       const std::map<std::string, double>& metric,
                                       int n_boot, std::uint64_t seed) {
  std::vector<std::string> participants;
  {
    std::set<std::string> ids;
    for (const BehavioralRecord& rec : behavior) {
      if (measure_value(rec, measure)) ids.insert(rec.participant_id);
    }
    participants.assign(ids.begin(), ids.end());
  }
  if (participants.size() < 2) {
    throw CoverageError("bootstrap(participants): need >= 2 participants");
  }
  // participant -> (image -> (sum, count))
  std::map<std::string, std::map<std::string, std::pair<double, long long>>> by_pid;
  for (const BehavioralRecord& rec : behavior) {
    if (const auto v = measure_value(rec, measure)) {
      auto& [sum, count] = by_pid[rec.participant_id][rec.image_id];
      sum += *v;
      ++count;
    }
  }

  std::vector<double> rs;
  rs.reserve(static_cast<std::size_t>(n_boot));
  long long skipped = 0;
  for (int it = 0; it < n_boot; ++it) {
    Rng rng = Rng::for_stream(seed, static_cast<std::uint64_t>(it));
    std::map<std::string, std::pair<double, long long>> image_sums;
    for (std::size_t i = 0; i < participants.size(); ++i) {
      const std::string& pid = participants[rng.bounded(participants.size())];
      for (const auto& [image, sc] : by_pid[pid]) {
        auto& [sum, count] = image_sums[image];
        sum += sc.first / static_cast<double>(sc.second);
        ++count;
      }
    }
    std::vector<double> xv;
    std::vector<double> yv;
    for (const auto& [image, sc] : image_sums) {
      const auto it_metric = metric.find(image);
      if (it_metric == metric.end()) continue;
      xv.push_back(it_metric->second);
      yv.push_back(sc.first / static_cast<double>(sc.second));
    }
    const double r = pearson_or_nan(xv, yv);
    if (std::isnan(r)) {
      ++skipped;
    } else {
      rs.push_back(r);
    }
  }
  if (rs.empty()) {
    throw DegenerateInputError("bootstrap(participants): every resample degenerate");
  }
  std::sort(rs.begin(), rs.end());
  BootstrapResult result;
  result.ci_low = percentile_sorted(rs, 0.025);
  result.ci_high = percentile_sorted(rs, 0.975);
  result.n_boot = n_boot;
  result.skipped = skipped;
  return result;
}

}  // namespace

std::vector<CorrelationReport> analyze_metrics(
    const std::vector<BehavioralRecord>& behavior,
    const std::vector<MetricScore>& scores, const AnalyzeOptions& options) {
  if (options.n_boot < 1) throw ConfigError("analyze: n_boot < 1");
  if (!(options.max_skip_fraction >= 0.0 && options.max_skip_fraction <= 1.0)) {
    throw ConfigError("analyze: max_skip_fraction outside [0,1]");
  }

  const AggregatedMeasure agg = aggregate_by_image(behavior, options.measure);
  std::map<std::string, double> behavior_by_image;
  for (std::size_t i = 0; i < agg.image_ids.size(); ++i) {
    behavior_by_image[agg.image_ids[i]] = agg.means[i];
  }
  if (behavior_by_image.size() < 3) {
    throw CoverageError("analyze: fewer than 3 images with behavioral data");
  }

  // metric -> image -> value
  std::map<std::string, std::map<std::string, double>> by_metric;
  for (const MetricScore& score : scores) {
    auto [it, inserted] =
        by_metric[score.metric_name].emplace(score.image_id, score.value);
    if (!inserted) {
      throw DataError("analyze: duplicate score for metric '" + score.metric_name +
                      "' image '" + score.image_id + "'");
    }
  }
  if (!by_metric.count(options.reference_metric)) {
    throw ConfigError("analyze: reference metric '" + options.reference_metric +
                      "' not present in the score file");
  }

  // Aligned (metric, behavior) vectors over an image set; sorted image order.
  const auto aligned = [&](const std::map<std::string, double>& metric_scores,
                           std::vector<double>* xs, std::vector<double>* ys,
                           std::vector<std::string>* images) {
    xs->clear();
    ys->clear();
    if (images) images->clear();
    for (const auto& [image, value] : metric_scores) {
      const auto it = behavior_by_image.find(image);
      if (it == behavior_by_image.end()) continue;
      xs->push_back(value);
      ys->push_back(it->second);
      if (images) images->push_back(image);
    }
  };

  const std::map<std::string, double>& reference_scores =
      by_metric[options.reference_metric];

  std::vector<CorrelationReport> reports;
  for (const auto& [metric_name, metric_scores] : by_metric) {
    std::vector<double> xs;
    std::vector<double> ys;
    aligned(metric_scores, &xs, &ys, nullptr);
    if (xs.size() < 3) {
      throw CoverageError("analyze: metric '" + metric_name +
                          "' shares fewer than 3 images with the behavior file");
    }

    CorrelationReport report;
    report.metric_name = metric_name;
    report.n_images = static_cast<int>(xs.size());
    report.r = pearson(xs, ys);
    report.bootstrap_scheme =
        options.scheme == BootstrapScheme::Images ? "images" : "participants";

    const std::uint64_t metric_seed =
        Rng::derive(options.seed, hash64("bootstrap|" + metric_name));
    BootstrapResult boot;
    if (options.scheme == BootstrapScheme::Images) {
      boot = bootstrap_ci(xs, ys, options.n_boot, metric_seed);
    } else {
      boot = bootstrap_participants(behavior, options.measure, metric_scores,
                                    options.n_boot, metric_seed);
    }
    long long skipped_total = boot.skipped;
    report.n_boot = boot.n_boot;
    // The percentile interval is widened (if ever needed) to contain the
    // point estimate, keeping the reported triple internally consistent.
    report.ci_low = std::min(boot.ci_low, report.r);
    report.ci_high = std::max(boot.ci_high, report.r);

    if (metric_name != options.reference_metric) {
      // Delta test on the images shared by this metric, the reference and
      // the behavior file (the images scheme is the correlation unit).
      std::vector<double> a;
      std::vector<double> b;
      std::vector<double> h;
      for (const auto& [image, value] : metric_scores) {
        const auto it_ref = reference_scores.find(image);
        const auto it_beh = behavior_by_image.find(image);
        if (it_ref == reference_scores.end() || it_beh == behavior_by_image.end()) {
          continue;
        }
        a.push_back(it_ref->second);  // reference is metric "a": test Δ = r_ref − r_m > 0
        b.push_back(value);
        h.push_back(it_beh->second);
      }
      if (a.size() < 3) {
        throw AlignmentError("analyze: metrics '" + options.reference_metric +
                             "' and '" + metric_name +
                             "' share fewer than 3 images with behavior");
      }
      const std::uint64_t pair_seed = Rng::derive(
          options.seed, hash64("delta|" + options.reference_metric + "|" + metric_name));
      const PairedDeltaResult delta =
          paired_delta_test(a, b, h, options.n_boot, pair_seed);
      report.p_delta = delta.p_delta;
      skipped_total += delta.skipped;
    }

    report.skipped_resamples = skipped_total;
    const double budget =
        options.max_skip_fraction * static_cast<double>(options.n_boot) *
        (metric_name != options.reference_metric ? 2.0 : 1.0);
    if (static_cast<double>(skipped_total) > budget) {
      throw DegenerateInputError(
          "analyze: metric '" + metric_name + "' skipped " +
          std::to_string(skipped_total) + " degenerate resamples (budget " +
          std::to_string(static_cast<long long>(budget)) + "); data too degenerate");
    }
    report.validate();
    reports.push_back(std::move(report));
  }
  return reports;
}

CorrelationReport human_consistency_report(const std::vector<BehavioralRecord>& records,
                                           Measure measure) {
  const LeaveOneOutResult loo = leave_one_out_consistency(records, measure);
  CorrelationReport report;
  report.metric_name = "human-human";
  report.r = loo.mean_r;
  report.ci_low = loo.mean_r;
  report.ci_high = loo.mean_r;
  report.n_boot = 0;
  report.bootstrap_scheme = "leave-one-out";
  std::set<std::string> images;
  for (const BehavioralRecord& rec : records) {
    if (measure_value(rec, measure)) images.insert(rec.image_id);
  }
  report.n_images = static_cast<int>(images.size());
  report.validate();
  return report;
}

BootstrapScheme parse_bootstrap_scheme(const std::string& name) {
  if (name == "images") return BootstrapScheme::Images;
  if (name == "participants") return BootstrapScheme::Participants;
  throw ConfigError("unknown bootstrap scheme '" + name +
                    "' (expected 'images' or 'participants')");
}

void write_reports_csv(const std::vector<CorrelationReport>& reports,
                       const std::filesystem::path& path,
                       const Provenance* provenance) {
  std::vector<std::vector<std::string>> rows;
  if (provenance) rows.push_back({provenance_comment(*provenance)});
  rows.push_back({"metric", "r", "ci_low", "ci_high", "p_delta", "n_boot", "n_images",
                  "skipped_resamples", "bootstrap_scheme"});
  for (const CorrelationReport& report : reports) {
    rows.push_back({report.metric_name, format_double(report.r),
                    format_double(report.ci_low), format_double(report.ci_high),
                    report.p_delta ? format_double(*report.p_delta) : std::string(),
                    std::to_string(report.n_boot), std::to_string(report.n_images),
                    std::to_string(report.skipped_resamples), report.bootstrap_scheme});
  }
  write_csv(path, rows);
}

void write_reports_json(const std::vector<CorrelationReport>& reports,
                        const std::filesystem::path& path,
                        const Provenance* provenance) {
  json table = json::array();
  for (const CorrelationReport& report : reports) {
    json row;
    row["metric"] = report.metric_name;
    row["r"] = report.r;
    row["ci_low"] = report.ci_low;
    row["ci_high"] = report.ci_high;
    if (report.p_delta) row["p_delta"] = *report.p_delta;
    else row["p_delta"] = nullptr;
    row["n_boot"] = report.n_boot;
    row["n_images"] = report.n_images;
    row["skipped_resamples"] = report.skipped_resamples;
    row["bootstrap_scheme"] = report.bootstrap_scheme;
    table.push_back(std::move(row));
  }
  json out;
  out["reports"] = std::move(table);
  if (provenance) {
    out["config_hash"] = provenance->config_hash;
    out["version"] = provenance->version;
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw DataError("cannot write " + path.string());
  file << out.dump(2) << "\n";
  if (!file) throw DataError("short write to " + path.string());
}

}  // namespace fsum
