#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "falldet/tensor.hpp"

namespace falldet::nn {

/// Per-axis (depth, height, width) triple.
struct Dims3 {
  std::int64_t d = 1;
  std::int64_t h = 1;
  std::int64_t w = 1;

  bool operator==(const Dims3&) const = default;
};

struct Conv3dParams {
  Dims3 kernel{3, 3, 3};
  Dims3 stride{1, 1, 1};
  Dims3 padding{1, 1, 1};

  bool operator==(const Conv3dParams&) const = default;
};

struct Pool3dParams {
  Dims3 kernel{2, 2, 2};
  Dims3 stride{2, 2, 2};
  bool ceil_mode = false;

  bool operator==(const Pool3dParams&) const = default;
};

enum class ConvEngine { kNaive, kOptimized };

struct ExecOptions {
  ConvEngine engine = ConvEngine::kOptimized;
  int threads = 1;
};

/// Output shape of a 3D convolution over a (C,D,H,W) input. Throws
/// kShape if any output extent would be < 1.
Shape conv_output_shape(const Shape& input, const Conv3dParams& params, std::int64_t kernel_count);

/// Output shape of 3D max pooling over a (C,D,H,W) input. Ceil mode rounds
/// up but never lets a window start past the end of the input.
Shape pool_output_shape(const Shape& input, const Pool3dParams& params);

/// Cross-correlation with zero padding.
///   input   (C,D,H,W)
///   weights (K,C,kd,kh,kw)
///   bias    K values
/// The engines sum in different orders and agree to float rounding.
/// Each output element is still produced by exactly one thread, so a
/// given engine is deterministic for any thread count.
Tensor conv3d(const Tensor& input, const Tensor& weights, std::span<const float> bias,
              const Conv3dParams& params, const ExecOptions& exec = {});

Tensor conv3d_naive(const Tensor& input, const Tensor& weights, std::span<const float> bias,
                    const Conv3dParams& params);

Tensor conv3d_optimized(const Tensor& input, const Tensor& weights, std::span<const float> bias,
                        const Conv3dParams& params, int threads);

/// Windows are clipped to the input; out-of-range cells never take part
/// in the max.
Tensor maxpool3d(const Tensor& input, const Pool3dParams& params, int threads = 1);

Tensor relu(const Tensor& input);
void relu_inplace(Tensor& t);

/// out[m] = bias[m] + sum_n weights[m,n] * input[n]
std::vector<float> linear(std::span<const float> input, const Tensor& weights, std::span<const float> bias,
                          int threads = 1);

}  // namespace falldet::nn
