#include "falldet/c3d.hpp"

#include <cmath>

#include "falldet/error.hpp"
#include "falldet/rng.hpp"

namespace falldet::c3d {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv3d: return "conv3d";
    case LayerKind::kMaxPool3d: return "maxpool3d";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kLinear: return "linear";
  }
  return "unknown";
}

std::size_t ModelConfig::count(LayerKind kind) const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.kind == kind;
  return n;
}

namespace {

LayerSpec conv(std::string name, std::int64_t kernels) {
  LayerSpec l;
  l.name = std::move(name);
  l.kind = LayerKind::kConv3d;
  l.kernels = kernels;
  l.conv = nn::Conv3dParams{{3, 3, 3}, {1, 1, 1}, {1, 1, 1}};
  return l;
}

LayerSpec relu(std::string name) {
  LayerSpec l;
  l.name = std::move(name);
  l.kind = LayerKind::kRelu;
  return l;
}

LayerSpec pool(std::string name, nn::Dims3 window, bool ceil_mode) {
  LayerSpec l;
  l.name = std::move(name);
  l.kind = LayerKind::kMaxPool3d;
  l.pool = nn::Pool3dParams{window, window, ceil_mode};
  return l;
}

bool has_parameters(const LayerSpec& l) { return l.kind == LayerKind::kConv3d || l.kind == LayerKind::kLinear; }

[[noreturn]] void rethrow_for_layer(const std::string& layer, const Error& e) {
  throw Error(e.code() == ErrorCode::kInvalidShape ? ErrorCode::kInvalidShape : ErrorCode::kShape,
              "layer " + layer + ": " + e.what());
}

}  // namespace

ModelConfig default_config() {
  ModelConfig cfg;
  auto& L = cfg.layers;
  const std::pair<const char*, std::int64_t> convs[] = {{"conv1a", 64},  {"conv2a", 128}, {"conv3a", 256},
                                                        {"conv3b", 256}, {"conv4a", 512}, {"conv4b", 512},
                                                        {"conv5a", 512}, {"conv5b", 512}};
  auto add_conv = [&](int i) {
    L.push_back(conv(convs[i].first, convs[i].second));
    L.push_back(relu(std::string("relu") + (convs[i].first + 4)));
  };
  add_conv(0);
  L.push_back(pool("pool1", {1, 2, 2}, false));
  add_conv(1);
  L.push_back(pool("pool2", {2, 2, 2}, false));
  add_conv(2);
  add_conv(3);
  L.push_back(pool("pool3", {2, 2, 2}, false));
  add_conv(4);
  add_conv(5);
  L.push_back(pool("pool4", {2, 2, 2}, false));
  add_conv(6);
  add_conv(7);
  L.push_back(pool("pool5", {2, 2, 2}, true));

  LayerSpec flat;
  flat.name = "flatten";
  flat.kind = LayerKind::kFlatten;
  L.push_back(flat);

  LayerSpec fc6;
  fc6.name = "fc6";
  fc6.kind = LayerKind::kLinear;
  fc6.out_features = kFc6Width;
  L.push_back(fc6);
  L.push_back(relu("relu6"));
  return cfg;
}

std::vector<ShapeStep> forward_shapes(const ModelConfig& config, const Shape& input_shape) {
  checked_element_count(input_shape);
  std::vector<ShapeStep> steps;
  steps.reserve(config.layers.size());
  Shape current = input_shape;
  for (const auto& layer : config.layers) {
    try {
      switch (layer.kind) {
        case LayerKind::kConv3d:
          current = nn::conv_output_shape(current, layer.conv, layer.kernels);
          break;
        case LayerKind::kMaxPool3d: {
          if (current.size() != 4) throw Error(ErrorCode::kShape, "pooling needs a rank-4 input");
          const auto& k = layer.pool.kernel;
          if (k.d > current[1] || k.h > current[2] || k.w > current[3]) {
            throw Error(ErrorCode::kShape, "window (" + std::to_string(k.d) + "," + std::to_string(k.h) + "," +
                                               std::to_string(k.w) + ") is wider than input " +
                                               shape_to_string(current));
          }
          current = nn::pool_output_shape(current, layer.pool);
          break;
        }
        case LayerKind::kRelu:
          break;
        case LayerKind::kFlatten:
          current = Shape{static_cast<std::int64_t>(checked_element_count(current))};
          break;
        case LayerKind::kLinear:
          if (current.size() != 1) {
            throw Error(ErrorCode::kShape, "linear layer needs a flat input, got " + shape_to_string(current));
          }
          if (layer.out_features < 1) throw Error(ErrorCode::kInvalidShape, "linear width must be >= 1");
          current = Shape{layer.out_features};
          break;
      }
    } catch (const Error& e) {
      rethrow_for_layer(layer.name, e);
    }
    steps.push_back({layer.name, current});
  }
  return steps;
}

std::map<std::string, Shape> expected_parameter_shapes(const ModelConfig& config, const Shape& input_shape) {
  const auto steps = forward_shapes(config, input_shape);
  std::map<std::string, Shape> out;
  Shape in = input_shape;
  for (std::size_t i = 0; i < config.layers.size(); ++i) {
    const auto& l = config.layers[i];
    if (l.kind == LayerKind::kConv3d) {
      out[l.name + ".weight"] = {l.kernels, in[0], l.conv.kernel.d, l.conv.kernel.h, l.conv.kernel.w};
      out[l.name + ".bias"] = {l.kernels};
    } else if (l.kind == LayerKind::kLinear) {
      out[l.name + ".weight"] = {l.out_features, in[0]};
      out[l.name + ".bias"] = {l.out_features};
    }
    in = steps[i].shape;
  }
  return out;
}

WeightStore load_weights(const std::filesystem::path& path, const ModelConfig& config) {
  WeightStore store = falldet::load_weights(path);
  std::string missing;
  for (const auto& [name, shape] : expected_parameter_shapes(config)) {
    if (!store.contains(name)) missing += (missing.empty() ? "" : ", ") + name;
  }
  if (!missing.empty()) throw Error(ErrorCode::kIncomplete, path.string() + " lacks " + missing);
  return store;
}

Model build_model(ModelConfig config, WeightStore weights) {
  const auto expected = expected_parameter_shapes(config);
  std::string missing;
  for (const auto& [name, shape] : expected) {
    if (!weights.contains(name)) missing += (missing.empty() ? "" : ", ") + name;
  }
  if (!missing.empty()) throw Error(ErrorCode::kIncomplete, "weights lack " + missing);

  for (const auto& [name, shape] : expected) {
    const auto& actual = weights.at(name).shape;
    if (actual != shape) {
      throw Error(ErrorCode::kValidation, name + ": expected shape " + shape_to_string(shape) + ", got " +
                                              shape_to_string(actual));
    }
  }

  Model model;
  model.params_.resize(config.layers.size());
  for (std::size_t i = 0; i < config.layers.size(); ++i) {
    const auto& l = config.layers[i];
    if (!has_parameters(l)) continue;
    auto w = weights.take(l.name + ".weight");
    auto b = weights.take(l.name + ".bias");
    model.params_[i].weight = Tensor(std::move(w.shape), std::move(w.data));
    model.params_[i].bias = std::move(b.data);
  }
  const auto steps = forward_shapes(config, kClipShape);
  model.feature_width_ = steps.back().shape.size() == 1 ? steps.back().shape[0] : 0;
  if (model.feature_width_ == 0) throw Error(ErrorCode::kValidation, "model does not end in a flat feature layer");
  model.config_ = std::move(config);
  return model;
}

std::vector<float> Model::forward(const Tensor& clip, const nn::ExecOptions& exec, bool stop_before_final_relu,
                                  const LayerObserver& observer) const {
  if (clip.shape() != kClipShape) {
    throw Error(ErrorCode::kShape, "expected clip " + shape_to_string(kClipShape) + ", got " +
                                       shape_to_string(clip.shape()));
  }
  Tensor x = clip;
  const std::size_t n = config_.layers.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& layer = config_.layers[i];
    switch (layer.kind) {
      case LayerKind::kConv3d:
        x = nn::conv3d(x, params_[i].weight, params_[i].bias, layer.conv, exec);
        break;
      case LayerKind::kMaxPool3d:
        x = nn::maxpool3d(x, layer.pool, exec.threads);
        break;
      case LayerKind::kRelu:
        if (stop_before_final_relu && i + 1 == n) continue;
        nn::relu_inplace(x);
        break;
      case LayerKind::kFlatten: {
        const auto width = static_cast<std::int64_t>(x.size());
        x = std::move(x).reshaped(Shape{width});
        break;
      }
      case LayerKind::kLinear: {
        auto out = nn::linear(x.data(), params_[i].weight, params_[i].bias, exec.threads);
        const auto width = static_cast<std::int64_t>(out.size());
        x = Tensor(Shape{width}, std::move(out));
        break;
      }
    }
    if (observer) observer(layer, x);
  }
  return {x.data().begin(), x.data().end()};
}

FeatureVector extract_features(const Model& model, const Tensor& chunk, const FeatureOptions& options,
                               const nn::ExecOptions& exec) {
  FeatureVector fv;
  fv.values = model.forward(chunk, exec, !options.post_relu);
  double norm2 = 0.0;
  for (float v : fv.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kValidation, "feature extraction produced a non-finite value");
    norm2 += static_cast<double>(v) * v;
  }
  if (options.l2_normalize && norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (float& v : fv.values) v = static_cast<float>(v * inv);
  }
  return fv;
}

WeightStore random_weights(const ModelConfig& config, std::uint64_t seed, const Shape& input_shape) {
  Rng rng(seed);
  WeightStore store;
  for (const auto& [name, shape] : expected_parameter_shapes(config, input_shape)) {
    Tensor t(shape, 0.0f);
    if (name.ends_with(".weight")) {
      const double fan_in = static_cast<double>(t.size() / static_cast<std::size_t>(shape[0]));
      const double limit = std::sqrt(6.0 / fan_in);
      for (float& v : t.data()) v = static_cast<float>(rng.uniform(-limit, limit));
    }
    store.insert(name, std::move(t));
  }
  return store;
}

}  // namespace falldet::c3d
