#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cli/run_config.hpp"
#include "falldet/ingest.hpp"
#include "falldet/tensor.hpp"

namespace falldet::cli {

// Commands throw falldet::Error for bad input; the dispatcher in app.cpp
// turns that into exit code 2.

void cmd_shapes(std::ostream& out);
void cmd_features(const RunConfig& cfg, std::ostream& out, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& out);
void cmd_evaluate(const RunConfig& cfg, std::ostream& out);
void cmd_predict(const RunConfig& cfg, const std::filesystem::path& input,
                 std::optional<ingest::SourceFormat> format, double fps, std::ostream& out);
void cmd_stats(const RunConfig& cfg, bool whole_seconds, std::ostream& out);

struct BenchOptions {
  int threads = 8;
  int repeats = 3;
  std::vector<std::string> layers;  // empty: all eight conv layers
  std::uint64_t seed = 0;
};
void cmd_bench(const BenchOptions& options, std::ostream& out);

void cmd_init_weights(const std::filesystem::path& out_path, std::uint64_t seed, std::ostream& out);

struct VerifyOptions {
  std::filesystem::path conversion_report;
  std::filesystem::path golden_input;
  std::filesystem::path golden_fc6;
  double tolerance = 1e-3;
};
/// Cross-checks converter outputs against this engine. Returns false if
/// any check fails.
bool cmd_verify(const RunConfig& cfg, const VerifyOptions& options, std::ostream& out);

// Converter artefacts ----------------------------------------------------

struct ConversionLayer {
  std::string name;
  Shape shape;
  std::uint32_t crc32 = 0;
};

struct ConversionReport {
  std::vector<ConversionLayer> layers;
  std::optional<std::array<float, 3>> pixel_means;
};

/// {"layers":[{"name":..,"shape":[..],"crc32":..}], "pixel_means":[r,g,b], ...}
ConversionReport read_conversion_report(const std::filesystem::path& path);

/// One float per line, no header, row-major.
std::vector<float> read_golden_csv(const std::filesystem::path& path);
void write_golden_csv(std::span<const float> values, const std::filesystem::path& path);

}  // namespace falldet::cli
