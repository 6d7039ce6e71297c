#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "falldet/tensor.hpp"

namespace falldet::cli {

struct ConvBenchRow {
  std::string layer;
  Shape input;
  std::int64_t kernels = 0;
  double gflop = 0.0;
  double naive_ms = 0.0;
  double optimized_ms = 0.0;
  double max_rel_error = 0.0;

  double speedup() const { return optimized_ms > 0.0 ? naive_ms / optimized_ms : 0.0; }
};

/// max |a - ref| / max |ref|: error relative to the reference's scale.
double max_relative_error(std::span<const float> a, std::span<const float> ref);

/// Times one naive run against the best of `repeats` optimized runs on
/// seeded random data of the given conv-layer shape (3x3x3, pad 1).
/// Throws std::runtime_error if the engines disagree beyond 1e-5.
ConvBenchRow bench_conv_layer(const std::string& layer, const Shape& input, std::int64_t kernels, int threads,
                              int repeats, std::uint64_t seed);

/// One row per conv layer of the default C3D stack at its (3,16,112,112)
/// input shape; `only` restricts to the named layers when non-empty.
std::vector<ConvBenchRow> bench_c3d_convs(int threads, int repeats, std::span<const std::string> only,
                                          std::uint64_t seed = 0);

}  // namespace falldet::cli
