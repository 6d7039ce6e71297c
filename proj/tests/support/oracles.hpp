#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "falldet/nn_ops.hpp"
#include "falldet/rng.hpp"
#include "falldet/tensor.hpp"

namespace falldet::test {

// Plain nested loops in double precision. Deliberately share no code with
// the library kernels.
std::vector<double> conv3d_oracle(const Tensor& input, const Tensor& weights, std::span<const float> bias,
                                  const nn::Conv3dParams& params, Shape* out_shape = nullptr);

// Enumerates every window cell explicitly; out-of-range cells are skipped.
std::vector<float> maxpool3d_oracle(const Tensor& input, const nn::Pool3dParams& params, Shape* out_shape = nullptr);

std::vector<double> linear_oracle(std::span<const float> input, const Tensor& weights, std::span<const float> bias);

// max |a - ref| / max |ref|, or the absolute error when ref is all zero.
double rel_error(std::span<const float> a, std::span<const double> ref);
double rel_error(std::span<const float> a, std::span<const float> ref);

Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0);
std::vector<float> random_values(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0);

struct ConvCase {
  Tensor input;
  Tensor weights;
  std::vector<float> bias;
  nn::Conv3dParams params;
};

// Small random conv problem with a non-empty output. Extents, kernel
// sizes, strides and padding all vary; kernel counts straddle the
// engine's 8-channel blocking.
ConvCase random_conv_case(Rng& rng);

struct PoolCase {
  Tensor input;
  nn::Pool3dParams params;
};

PoolCase random_pool_case(Rng& rng);

}  // namespace falldet::test
