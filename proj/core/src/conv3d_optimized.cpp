#include <algorithm>
#include <cstring>
#include <cstdint>
#include <vector>

#include "falldet/nn_ops.hpp"
#include "nn_internal.hpp"

namespace falldet::nn {

namespace {

// Register tile: kBlock output channels x kTile consecutive output columns.
// 64 float accumulators fit in eight 256-bit registers; the microkernel
// below is written for exactly these sizes.
constexpr std::int64_t kBlock = 8;
constexpr std::int64_t kTile = 8;

struct Layout {
  std::int64_t channels;
  std::int64_t kd, kh, kw;
  std::int64_t sd, sh, sw;
  std::int64_t padded_d, padded_h, padded_w;
  std::int64_t out_d, out_h, out_w;
  std::int64_t kernels;
};

// Zero-padded copy of the input. Rows are widened so that a full kTile
// read starting at any tile origin stays inside the buffer.
std::vector<float> pad_input(const Tensor& input, const Conv3dParams& p, const Layout& l) {
  const std::int64_t depth = input.dim(1), height = input.dim(2), width = input.dim(3);
  std::vector<float> padded(static_cast<std::size_t>(l.channels * l.padded_d * l.padded_h * l.padded_w), 0.0f);
  const float* src = input.data().data();
  for (std::int64_t c = 0; c < l.channels; ++c) {
    for (std::int64_t d = 0; d < depth; ++d) {
      for (std::int64_t h = 0; h < height; ++h) {
        const float* from = src + ((c * depth + d) * height + h) * width;
        float* to = padded.data() +
                    ((c * l.padded_d + d + p.padding.d) * l.padded_h + h + p.padding.h) * l.padded_w + p.padding.w;
        std::copy(from, from + width, to);
      }
    }
  }
  return padded;
}

// packed[block][c][a][b][e][j] = weights[block*kBlock + j][c][a][b][e],
// zero for j past the last kernel.
std::vector<float> pack_weights(const Tensor& weights, const Layout& l) {
  const std::int64_t blocks = (l.kernels + kBlock - 1) / kBlock;
  const std::int64_t volume = l.channels * l.kd * l.kh * l.kw;
  std::vector<float> packed(static_cast<std::size_t>(blocks * volume * kBlock), 0.0f);
  const float* w = weights.data().data();
  for (std::int64_t k = 0; k < l.kernels; ++k) {
    const std::int64_t block = k / kBlock, j = k % kBlock;
    const float* src = w + k * volume;
    float* dst = packed.data() + block * volume * kBlock + j;
    for (std::int64_t i = 0; i < volume; ++i) dst[i * kBlock] = src[i];
  }
  return packed;
}

using Vec8 = float __attribute__((vector_size(32)));

inline Vec8 load8(const float* p) {
  Vec8 v;
  std::memcpy(&v, p, sizeof(v));
  return v;
}

inline Vec8 load8_strided(const float* p, std::int64_t stride) {
  Vec8 v;
  for (int i = 0; i < kTile; ++i) v[i] = p[i * stride];
  return v;
}

template <bool kUnitStride>
void conv_rows(const Layout& l, const float* padded, const float* packed, std::span<const float> bias, float* out,
               int threads) {
  const std::int64_t blocks = (l.kernels + kBlock - 1) / kBlock;
  const std::int64_t volume = l.channels * l.kd * l.kh * l.kw;

#pragma omp parallel for collapse(2) schedule(static) num_threads(std::max(threads, 1))
  for (std::int64_t block = 0; block < blocks; ++block) {
    for (std::int64_t od = 0; od < l.out_d; ++od) {
      const std::int64_t k0 = block * kBlock;
      const std::int64_t live = std::min(kBlock, l.kernels - k0);
      const float* wblock = packed + block * volume * kBlock;
      for (std::int64_t oh = 0; oh < l.out_h; ++oh) {
        for (std::int64_t x0 = 0; x0 < l.out_w; x0 += kTile) {
          Vec8 acc[kBlock];
          for (std::int64_t j = 0; j < kBlock; ++j) {
            const float b = j < live ? bias[k0 + j] : 0.0f;
            acc[j] = Vec8{} + b;
          }
          const float* wp = wblock;
          for (std::int64_t c = 0; c < l.channels; ++c) {
            for (std::int64_t a = 0; a < l.kd; ++a) {
              const float* plane = padded + ((c * l.padded_d + od * l.sd + a) * l.padded_h) * l.padded_w;
              for (std::int64_t b = 0; b < l.kh; ++b) {
                const float* row = plane + (oh * l.sh + b) * l.padded_w + x0 * l.sw;
                for (std::int64_t e = 0; e < l.kw; ++e, wp += kBlock) {
                  const Vec8 src = kUnitStride ? load8(row + e) : load8_strided(row + e, l.sw);
                  acc[0] += wp[0] * src;
                  acc[1] += wp[1] * src;
                  acc[2] += wp[2] * src;
                  acc[3] += wp[3] * src;
                  acc[4] += wp[4] * src;
                  acc[5] += wp[5] * src;
                  acc[6] += wp[6] * src;
                  acc[7] += wp[7] * src;
                }
              }
            }
          }
          const std::int64_t cols = std::min(kTile, l.out_w - x0);
          for (std::int64_t j = 0; j < live; ++j) {
            float* dst = out + (((k0 + j) * l.out_d + od) * l.out_h + oh) * l.out_w + x0;
            for (std::int64_t v = 0; v < cols; ++v) dst[v] = acc[j][v];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv3d_optimized(const Tensor& input, const Tensor& weights, std::span<const float> bias,
                        const Conv3dParams& params, int threads) {
  const auto g = detail::check_conv_operands(input, weights, bias, params);
  const auto& p = params;
  Layout l{};
  l.channels = g.channels;
  l.kd = p.kernel.d, l.kh = p.kernel.h, l.kw = p.kernel.w;
  l.sd = p.stride.d, l.sh = p.stride.h, l.sw = p.stride.w;
  l.out_d = g.output[1], l.out_h = g.output[2], l.out_w = g.output[3];
  l.kernels = g.kernels;
  l.padded_d = g.depth + 2 * p.padding.d;
  l.padded_h = g.height + 2 * p.padding.h;
  const std::int64_t tiled_w = (l.out_w + kTile - 1) / kTile * kTile;
  l.padded_w = std::max(g.width + 2 * p.padding.w, (tiled_w - 1) * l.sw + l.kw);

  const auto padded = pad_input(input, p, l);
  const auto packed = pack_weights(weights, l);
  Tensor out(g.output, 0.0f);
  if (l.sw == 1) {
    conv_rows<true>(l, padded.data(), packed.data(), bias, out.data().data(), threads);
  } else {
    conv_rows<false>(l, padded.data(), packed.data(), bias, out.data().data(), threads);
  }
  return out;
}

}  // namespace falldet::nn
