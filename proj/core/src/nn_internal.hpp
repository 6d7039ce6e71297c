#pragma once

#include <cstdint>
#include <span>

#include "falldet/nn_ops.hpp"

namespace falldet::nn::detail {

struct ConvGeometry {
  std::int64_t channels, depth, height, width;
  std::int64_t kernels;
  Shape output;  // (K, OD, OH, OW)
};

/// Validates operands and returns the geometry shared by both engines.
ConvGeometry check_conv_operands(const Tensor& input, const Tensor& weights, std::span<const float> bias,
                                 const Conv3dParams& params);

}  // namespace falldet::nn::detail
