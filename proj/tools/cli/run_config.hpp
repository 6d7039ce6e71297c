#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>

#include "falldet/nn_ops.hpp"

namespace falldet::cli {

/// Everything a batch run needs. Defaults here are the documented
/// defaults; a JSON config file may override any field and command-line
/// flags override the file.
struct RunConfig {
  std::filesystem::path weights;
  std::filesystem::path manifest;
  std::filesystem::path features;
  std::filesystem::path model;
  std::filesystem::path report;
  std::filesystem::path conversion_report;

  std::array<float, 3> means{101.4f, 97.7f, 90.0f};
  bool means_set = false;

  std::optional<double> lambda;  // unset: 1/n
  int epochs = 100;
  std::uint64_t svm_seed = 0;

  int n_splits = 5;
  double test_fraction = 0.3;
  std::uint64_t split_seed = 0;
  bool group_by_video = false;

  bool post_relu = true;
  bool l2_normalize = true;
  nn::ConvEngine engine = nn::ConvEngine::kOptimized;
  int threads = 0;  // 0: FALLDET_THREADS, else hardware concurrency
  bool resume = false;

  /// Throws falldet::Error(kFormat) on out-of-range values.
  void validate() const;
  int resolved_threads() const;
};

/// Reads a flat JSON object whose keys mirror the RunConfig fields
/// ("weights", "lambda", "n_splits", "engine": "naive"|"optimized", ...).
/// Unknown keys are rejected.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace falldet::cli
