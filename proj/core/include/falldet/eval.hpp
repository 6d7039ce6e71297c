#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "falldet/feature_io.hpp"
#include "falldet/ingest.hpp"
#include "falldet/svm.hpp"

namespace falldet::eval {

using ingest::Label;

// ---------------------------------------------------------------------------
// Splitting

struct SplitOptions {
  int n_splits = 5;
  double test_fraction = 0.3;
  std::uint64_t seed = 0;
};

/// Indices into the labelled items passed to the splitter, ascending.
struct SplitPlan {
  int index = 0;  // 1-based
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Test items per class (adl, fall). Each class gets floor(n_c * f); the
/// shortfall against floor(n * f) is handed out one item at a time to the
/// classes with the largest fractional part, ties going to "adl" before
/// "fall".
std::array<std::size_t, 2> stratified_test_counts(std::size_t n_adl, std::size_t n_fall, double test_fraction);

/// Independent seeded draws, one per split; test sets of different splits
/// may overlap. Throws kDegenerateData if a class is absent.
std::vector<SplitPlan> stratified_shuffle_split(std::span<const Label> labels, const SplitOptions& options = {});

/// As above, but the unit of sampling is the group (video): every item
/// sharing a group key lands on the same side. Groups take the label of
/// their first item.
std::vector<SplitPlan> stratified_group_shuffle_split(std::span<const Label> labels,
                                                      std::span<const std::string> groups,
                                                      const SplitOptions& options = {});

// ---------------------------------------------------------------------------
// Metrics

/// fall is the positive class.
struct ConfusionMatrix {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::int64_t total() const noexcept { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const Label> predicted, std::span<const Label> truth);

/// Percentages; std::nullopt marks a zero denominator.
struct MetricsReport {
  std::optional<double> sensitivity, specificity, precision, accuracy, f1, fpr, fnr;

  static constexpr std::array<std::string_view, 7> kNames{"sensitivity", "specificity", "precision", "accuracy",
                                                          "f1",          "fpr",         "fnr"};
  std::array<std::optional<double>, 7> values() const {
    return {sensitivity, specificity, precision, accuracy, f1, fpr, fnr};
  }
  static MetricsReport from_values(const std::array<std::optional<double>, 7>& v);

  bool operator==(const MetricsReport&) const = default;
};

MetricsReport metrics(const ConfusionMatrix& cm);

/// Per-field mean over the defined values; a field undefined everywhere
/// stays undefined. Throws kEmptyInput for an empty list.
MetricsReport average_metrics(std::span<const MetricsReport> reports);

/// Presentation rounding to two decimals (half away from zero).
double round2(double value);

/// fall if any chunk is fall. Throws kEmptyInput for no chunks.
Label aggregate_video(std::span<const Label> chunk_predictions);

// ---------------------------------------------------------------------------
// Cross-validation over a features file

struct CvOptions {
  SplitOptions split;
  svm::TrainParams train;
  bool group_by_video = false;
  int threads = 1;
};

struct SplitResult {
  SplitPlan plan;
  ConfusionMatrix cm;
  MetricsReport report;
};

struct CvResult {
  std::vector<SplitResult> splits;  // ordered by split index
  MetricsReport average;
};

/// Train on each split's train side, score its test side. Splits run
/// concurrently when options.threads > 1; the result does not depend on
/// the thread count.
CvResult cross_validate(std::span<const FeatureRow> rows, const CvOptions& options);

/// Rows `1..n` then `average`; two-decimal values, `NA` for undefined.
void write_report_csv(const CvResult& result, const std::filesystem::path& path);
/// Full-precision mirror with confusion matrices; null for undefined.
void write_report_json(const CvResult& result, const std::filesystem::path& path);
std::string format_report_table(const CvResult& result);

// ---------------------------------------------------------------------------
// Dataset statistics

struct DurationStats {
  std::size_t count = 0;
  double min = 0, max = 0, mean = 0, median = 0;
  std::vector<double> modes;  // every value with the highest frequency, ascending
};

/// Throws kDegenerateData for an empty list, kFormat for non-positive
/// durations. The median of an even count averages the two middle values.
DurationStats summarize_durations(std::span<const double> durations);

/// Per-class statistics; `durations` is parallel to `entries`. Throws
/// kDegenerateData when either class has no videos.
std::map<Label, DurationStats> summarize_manifest(std::span<const ingest::ManifestEntry> entries,
                                                  std::span<const double> durations);

}  // namespace falldet::eval
