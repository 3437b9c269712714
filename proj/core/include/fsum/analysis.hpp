#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fsum/backends.hpp"
#include "fsum/version.hpp"

namespace fsum {

// --- behavioral data -------------------------------------------------------

// One participant's response to one image under one viewing condition.
struct BehavioralRecord {
  std::string participant_id;
  std::string image_id;
  std::optional<double> rt_ms;          // response time, > 0
  std::optional<int> saccade_count;     // >= 0
  std::optional<std::string> description;
  std::string condition;                // free-viewing | 2-saccade | 4-saccade

  void validate() const;  // at least one measure present; ranges; condition known
};

// Reads records from CSV with header
// participant_id,image_id,condition,rt_ms,saccade_count,description.
// Empty fields become nullopt; every record is validated.
std::vector<BehavioralRecord> read_behavioral_csv(const std::filesystem::path& path);

enum class Measure { RtMs, SaccadeCount };

// Extracts the chosen measure, nullopt when absent on the record.
std::optional<double> measure_value(const BehavioralRecord& record, Measure measure);

// Per-image participant means of a measure.  Records lacking the measure are
// ignored; images with zero contributing records are excluded and listed.
struct AggregatedMeasure {
  std::vector<std::string> image_ids;  // sorted for determinism
  std::vector<double> means;           // parallel to image_ids
  std::vector<std::string> excluded_images;
};
AggregatedMeasure aggregate_by_image(const std::vector<BehavioralRecord>& records,
                                     Measure measure);

// --- core statistics -------------------------------------------------------

// Sample Pearson correlation.  Throws ShapeError on length mismatch or
// length < 3, UndefinedCorrelationError when either series is constant.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct BootstrapResult {
  double ci_low = 0.0;    // 2.5th percentile of resampled r
  double ci_high = 0.0;   // 97.5th percentile
  int n_boot = 0;
  long long skipped = 0;  // degenerate resamples (constant vector) skipped
};

// Percentile bootstrap CI of Pearson r over resampled index sets.  Each
// iteration draws its randomness from a stream derived from (seed, iteration),
// so results are reproducible and independent of evaluation order.
BootstrapResult bootstrap_ci(const std::vector<double>& x, const std::vector<double>& y,
                             int n_boot = 10000, std::uint64_t seed = 0);

struct PairedDeltaResult {
  double p_delta = 1.0;   // fraction of resamples with r_a - r_b <= 0
  double delta_r = 0.0;   // observed r_a - r_b on the full sample
  int n_boot = 0;
  long long skipped = 0;
};

// One-sided bootstrap test of delta_r = r(a, behavior) - r(b, behavior) > 0.
// All three vectors must align on the same images (same length/order);
// misalignment throws AlignmentError.
PairedDeltaResult paired_delta_test(const std::vector<double>& a,
                                    const std::vector<double>& b,
                                    const std::vector<double>& behavior,
                                    int n_boot = 10000, std::uint64_t seed = 0);

// --- human consistency -----------------------------------------------------

struct LeaveOneOutResult {
  double mean_r = 0.0;
  std::vector<std::pair<std::string, double>> per_participant;  // (id, r)
};

// For each participant: r between their per-image measure and the mean of all
// other participants on the images they share.  Participants need >= 3 shared
// images and nonconstant vectors to contribute; fewer than 3 contributing
// participants is a CoverageError.
LeaveOneOutResult leave_one_out_consistency(const std::vector<BehavioralRecord>& records,
                                            Measure measure);

// --- description screening and accuracy ------------------------------------

// Keep iff max cosine(embed(description), embed(gold_i)) >= threshold.
bool validity_keep(const std::string& description,
                   const std::vector<std::string>& gold_standards,
                   EmbeddingBackend& embeddings, double threshold = 0.75);

// Mean cosine similarity between the response and each reference.
double description_accuracy(const std::string& response,
                            const std::vector<std::string>& references,
                            EmbeddingBackend& embeddings);

// --- metric correlation reports --------------------------------------------

enum class BootstrapScheme { Images, Participants };

// Table-style row: one metric's correlation with behavior.
struct CorrelationReport {
  std::string metric_name;
  double r = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n_boot = 0;
  std::optional<double> p_delta;  // vs the run's reference metric
  long long skipped_resamples = 0;
  std::string bootstrap_scheme;   // "images" | "participants"
  int n_images = 0;

  void validate() const;  // ci_low <= r <= ci_high when n_boot > 0
};

// Long-format metric scores: one value per (metric, image).
struct MetricScore {
  std::string image_id;
  std::string metric_name;
  double value = 0.0;
};

// Reads CSV with header image_id,metric_name,value.
std::vector<MetricScore> read_metric_csv(const std::filesystem::path& path);

struct AnalyzeOptions {
  Measure measure = Measure::RtMs;
  std::string reference_metric = "fsum";
  int n_boot = 10000;
  std::uint64_t seed = 0;
  BootstrapScheme scheme = BootstrapScheme::Images;
  double max_skip_fraction = 0.01;  // more than this fraction of degenerate
                                    // resamples fails the run
};

// Correlates every metric against participant-averaged behavior on the
// images common to the behavior file and that metric, with bootstrap CIs and
// paired delta tests against the reference metric.  Rows are ordered by
// metric name; the reference metric's row has no p_delta.
std::vector<CorrelationReport> analyze_metrics(
    const std::vector<BehavioralRecord>& behavior,
    const std::vector<MetricScore>& scores, const AnalyzeOptions& options);

// Table row for leave-one-out human-human consistency: metric "human-human",
// r = mean leave-one-out correlation, no bootstrap (n_boot = 0, CI = point).
CorrelationReport human_consistency_report(const std::vector<BehavioralRecord>& records,
                                           Measure measure);

// Parses "images" / "participants"; anything else is a ConfigError.
BootstrapScheme parse_bootstrap_scheme(const std::string& name);

// Emits reports as CSV (metric,r,ci_low,ci_high,p_delta,...) and JSON.
// With a provenance, the CSV gains a leading "# config_hash=... version=..."
// comment line and the JSON object gains config_hash/version keys.
void write_reports_csv(const std::vector<CorrelationReport>& reports,
                       const std::filesystem::path& path,
                       const Provenance* provenance = nullptr);
void write_reports_json(const std::vector<CorrelationReport>& reports,
                        const std::filesystem::path& path,
                        const Provenance* provenance = nullptr);

}  // namespace fsum
