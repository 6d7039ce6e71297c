#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "falldet/nn_ops.hpp"
#include "falldet/tensor.hpp"
#include "falldet/weight_store.hpp"

namespace falldet::c3d {

enum class LayerKind { kConv3d, kMaxPool3d, kRelu, kFlatten, kLinear };

std::string_view to_string(LayerKind kind);

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kRelu;
  std::int64_t kernels = 0;       // conv3d
  nn::Conv3dParams conv{};        // conv3d
  nn::Pool3dParams pool{};        // maxpool3d
  std::int64_t out_features = 0;  // linear
};

struct ModelConfig {
  std::vector<LayerSpec> layers;

  std::size_t count(LayerKind kind) const;
};

inline constexpr std::int64_t kClipFrames = 16;
inline constexpr std::int64_t kClipSize = 112;
inline constexpr std::int64_t kFc6Width = 4096;
inline const Shape kClipShape{3, kClipFrames, kClipSize, kClipSize};

/// conv1a..conv5b (64,128,256,256,512,512,512,512 kernels, 3x3x3, pad 1),
/// pool1 (1,2,2), pool2..pool5 (2,2,2) with ceil mode on pool5 only,
/// flatten, fc6 (4096) and relu6. No fc7 or softmax.
ModelConfig default_config();

struct ShapeStep {
  std::string layer;
  Shape shape;
};

/// Output shape after every layer. Throws kShape naming the layer when an
/// extent collapses or when a pooling window is wider than its input
/// (possible only in ceil mode, where the clipped window would silently
/// shrink the receptive field).
std::vector<ShapeStep> forward_shapes(const ModelConfig& config, const Shape& input_shape);

/// Expected parameter shapes for every conv/linear layer, derived from the
/// config and the input clip shape. Keys are "<layer>.weight"/"<layer>.bias".
std::map<std::string, Shape> expected_parameter_shapes(const ModelConfig& config,
                                                       const Shape& input_shape = kClipShape);

struct FeatureOptions {
  bool post_relu = true;
  bool l2_normalize = true;
};

struct FeatureVector {
  std::vector<float> values;
  std::string video_id;
  std::int64_t chunk_index = 0;
};

/// Immutable inference graph. Safe to share across threads.
class Model {
 public:
  using LayerObserver = std::function<void(const LayerSpec&, const Tensor&)>;

  const ModelConfig& config() const noexcept { return config_; }
  std::int64_t feature_width() const noexcept { return feature_width_; }

  /// Runs the stack on a (3,16,112,112) clip. If `stop_before_final_relu`
  /// is set the trailing relu layer is skipped. The observer, if any, sees
  /// every layer output.
  std::vector<float> forward(const Tensor& clip, const nn::ExecOptions& exec, bool stop_before_final_relu = false,
                             const LayerObserver& observer = {}) const;

 private:
  friend Model build_model(ModelConfig config, WeightStore weights);

  struct Params {
    Tensor weight;
    std::vector<float> bias;
  };

  ModelConfig config_;
  std::vector<Params> params_;  // indexed like config_.layers
  std::int64_t feature_width_ = 0;
};

/// Throws kValidation naming the layer and both shapes on any mismatch,
/// kIncomplete when blobs are missing.
Model build_model(ModelConfig config, WeightStore weights);

/// Post-ReLU fc6 activations, optionally L2-normalised (a zero vector stays
/// zero). Throws kShape unless the chunk is exactly (3,16,112,112).
FeatureVector extract_features(const Model& model, const Tensor& chunk, const FeatureOptions& options = {},
                               const nn::ExecOptions& exec = {});

/// Reads a C3DW file and checks that every parameter the config needs is
/// present. Throws kIncomplete listing all missing names.
WeightStore load_weights(const std::filesystem::path& path, const ModelConfig& config);

/// He-uniform weights and zero biases for every parameter in the config.
/// Used for synthetic end-to-end runs; not a substitute for pretrained
/// weights.
WeightStore random_weights(const ModelConfig& config, std::uint64_t seed, const Shape& input_shape = kClipShape);

}  // namespace falldet::c3d
