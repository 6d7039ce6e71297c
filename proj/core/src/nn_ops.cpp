#include "falldet/nn_ops.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "falldet/error.hpp"
#include "nn_internal.hpp"

namespace falldet::nn {

namespace {

void require_rank(const Shape& shape, std::size_t rank, const char* what) {
  if (shape.size() != rank) {
    throw Error(ErrorCode::kShape, std::string(what) + " must have rank " + std::to_string(rank) + ", got " +
                                       shape_to_string(shape));
  }
}

void require_positive(const Dims3& v, const char* what) {
  if (v.d < 1 || v.h < 1 || v.w < 1) {
    throw Error(ErrorCode::kInvalidShape, std::string(what) + " extents must be >= 1");
  }
}

std::int64_t conv_extent(std::int64_t in, std::int64_t k, std::int64_t s, std::int64_t p) {
  const std::int64_t span = in + 2 * p - k;
  if (span < 0) return 0;
  return span / s + 1;
}

std::int64_t pool_extent(std::int64_t in, std::int64_t k, std::int64_t s, bool ceil_mode) {
  const std::int64_t span = in - k;
  if (!ceil_mode) {
    return span < 0 ? 0 : span / s + 1;
  }
  std::int64_t out = span >= 0 ? (span + s - 1) / s + 1 : -((-span) / s) + 1;
  // The last window has to start inside the input.
  if (out > 0 && (out - 1) * s >= in) --out;
  return out;
}

}  // namespace

Shape conv_output_shape(const Shape& input, const Conv3dParams& params, std::int64_t kernel_count) {
  require_rank(input, 4, "conv input");
  checked_element_count(input);
  require_positive(params.kernel, "conv kernel");
  require_positive(params.stride, "conv stride");
  if (params.padding.d < 0 || params.padding.h < 0 || params.padding.w < 0) {
    throw Error(ErrorCode::kInvalidShape, "conv padding must be >= 0");
  }
  if (kernel_count < 1) throw Error(ErrorCode::kInvalidShape, "kernel count must be >= 1");
  Shape out{kernel_count,
            conv_extent(input[1], params.kernel.d, params.stride.d, params.padding.d),
            conv_extent(input[2], params.kernel.h, params.stride.h, params.padding.h),
            conv_extent(input[3], params.kernel.w, params.stride.w, params.padding.w)};
  if (out[1] < 1 || out[2] < 1 || out[3] < 1) {
    throw Error(ErrorCode::kShape, "convolution of " + shape_to_string(input) + " yields empty output " +
                                       shape_to_string(out));
  }
  return out;
}

Shape pool_output_shape(const Shape& input, const Pool3dParams& params) {
  require_rank(input, 4, "pool input");
  checked_element_count(input);
  require_positive(params.kernel, "pool kernel");
  require_positive(params.stride, "pool stride");
  Shape out{input[0],
            pool_extent(input[1], params.kernel.d, params.stride.d, params.ceil_mode),
            pool_extent(input[2], params.kernel.h, params.stride.h, params.ceil_mode),
            pool_extent(input[3], params.kernel.w, params.stride.w, params.ceil_mode)};
  if (out[1] < 1 || out[2] < 1 || out[3] < 1) {
    throw Error(ErrorCode::kShape, "pooling of " + shape_to_string(input) + " yields empty output " +
                                       shape_to_string(out));
  }
  return out;
}

namespace detail {

ConvGeometry check_conv_operands(const Tensor& input, const Tensor& weights, std::span<const float> bias,
                                 const Conv3dParams& params) {
  require_rank(input.shape(), 4, "conv input");
  require_rank(weights.shape(), 5, "conv weights");
  const auto& ws = weights.shape();
  if (ws[1] != input.dim(0)) {
    throw Error(ErrorCode::kShape, "conv weights " + shape_to_string(ws) + " expect " + std::to_string(ws[1]) +
                                       " input channels, input has " + std::to_string(input.dim(0)));
  }
  if (ws[2] != params.kernel.d || ws[3] != params.kernel.h || ws[4] != params.kernel.w) {
    throw Error(ErrorCode::kShape, "conv weights " + shape_to_string(ws) + " disagree with kernel params");
  }
  if (bias.size() != static_cast<std::size_t>(ws[0])) {
    throw Error(ErrorCode::kShape, "conv bias has " + std::to_string(bias.size()) + " values for " +
                                       std::to_string(ws[0]) + " kernels");
  }
  return {input.dim(0), input.dim(1), input.dim(2), input.dim(3), ws[0],
          conv_output_shape(input.shape(), params, ws[0])};
}

}  // namespace detail

Tensor conv3d(const Tensor& input, const Tensor& weights, std::span<const float> bias, const Conv3dParams& params,
              const ExecOptions& exec) {
  if (exec.engine == ConvEngine::kNaive) return conv3d_naive(input, weights, bias, params);
  return conv3d_optimized(input, weights, bias, params, exec.threads);
}

Tensor conv3d_naive(const Tensor& input, const Tensor& weights, std::span<const float> bias,
                    const Conv3dParams& params) {
  const auto g = detail::check_conv_operands(input, weights, bias, params);
  Tensor out(g.output, 0.0f);
  const auto& p = params;
  const std::int64_t od_n = g.output[1], oh_n = g.output[2], ow_n = g.output[3];
  const auto in = input.data();
  const auto w = weights.data();
  auto o = out.data();
  for (std::int64_t k = 0; k < g.kernels; ++k) {
    for (std::int64_t od = 0; od < od_n; ++od) {
      for (std::int64_t oh = 0; oh < oh_n; ++oh) {
        for (std::int64_t ow = 0; ow < ow_n; ++ow) {
          float sum = bias[k];
          for (std::int64_t c = 0; c < g.channels; ++c) {
            for (std::int64_t a = 0; a < p.kernel.d; ++a) {
              const std::int64_t id = od * p.stride.d + a - p.padding.d;
              if (id < 0 || id >= g.depth) continue;
              for (std::int64_t b = 0; b < p.kernel.h; ++b) {
                const std::int64_t ih = oh * p.stride.h + b - p.padding.h;
                if (ih < 0 || ih >= g.height) continue;
                for (std::int64_t e = 0; e < p.kernel.w; ++e) {
                  const std::int64_t iw = ow * p.stride.w + e - p.padding.w;
                  if (iw < 0 || iw >= g.width) continue;
                  const auto in_idx = ((c * g.depth + id) * g.height + ih) * g.width + iw;
                  const auto w_idx = (((k * g.channels + c) * p.kernel.d + a) * p.kernel.h + b) * p.kernel.w + e;
                  sum += in[in_idx] * w[w_idx];
                }
              }
            }
          }
          o[((k * od_n + od) * oh_n + oh) * ow_n + ow] = sum;
        }
      }
    }
  }
  return out;
}

Tensor maxpool3d(const Tensor& input, const Pool3dParams& params, int threads) {
  const Shape out_shape = pool_output_shape(input.shape(), params);
  Tensor out(out_shape, 0.0f);
  const std::int64_t channels = input.dim(0), depth = input.dim(1), height = input.dim(2), width = input.dim(3);
  const std::int64_t od_n = out_shape[1], oh_n = out_shape[2], ow_n = out_shape[3];
  const auto& p = params;
  const float* in = input.data().data();
  float* o = out.data().data();

#pragma omp parallel for schedule(static) num_threads(std::max(threads, 1))
  for (std::int64_t c = 0; c < channels; ++c) {
    for (std::int64_t od = 0; od < od_n; ++od) {
      const std::int64_t d0 = od * p.stride.d, d1 = std::min(d0 + p.kernel.d, depth);
      for (std::int64_t oh = 0; oh < oh_n; ++oh) {
        const std::int64_t h0 = oh * p.stride.h, h1 = std::min(h0 + p.kernel.h, height);
        for (std::int64_t ow = 0; ow < ow_n; ++ow) {
          const std::int64_t w0 = ow * p.stride.w, w1 = std::min(w0 + p.kernel.w, width);
          float best = -std::numeric_limits<float>::infinity();
          for (std::int64_t d = d0; d < d1; ++d) {
            for (std::int64_t h = h0; h < h1; ++h) {
              const float* row = in + ((c * depth + d) * height + h) * width;
              for (std::int64_t x = w0; x < w1; ++x) best = std::max(best, row[x]);
            }
          }
          o[((c * od_n + od) * oh_n + oh) * ow_n + ow] = best;
        }
      }
    }
  }
  return out;
}

void relu_inplace(Tensor& t) {
  for (float& v : t.data()) v = v > 0.0f ? v : 0.0f;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  relu_inplace(out);
  return out;
}

std::vector<float> linear(std::span<const float> input, const Tensor& weights, std::span<const float> bias,
                          int threads) {
  require_rank(weights.shape(), 2, "linear weights");
  const auto rows = static_cast<std::size_t>(weights.dim(0));
  const auto cols = static_cast<std::size_t>(weights.dim(1));
  if (input.size() != cols || bias.size() != rows) {
    throw Error(ErrorCode::kShape, "linear weights " + shape_to_string(weights.shape()) + " with input of " +
                                       std::to_string(input.size()) + " and bias of " +
                                       std::to_string(bias.size()));
  }
  std::vector<float> out(rows);
  const float* w = weights.data().data();
  const float* x = input.data();

#pragma omp parallel for schedule(static) num_threads(std::max(threads, 1))
  for (std::size_t m = 0; m < rows; ++m) {
    const float* row = w + m * cols;
    double sum = 0.0;
    for (std::size_t n = 0; n < cols; ++n) sum += static_cast<double>(row[n]) * x[n];
    out[m] = static_cast<float>(sum + bias[m]);
  }
  return out;
}

}  // namespace falldet::nn
