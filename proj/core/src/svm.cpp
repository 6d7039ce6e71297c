#include "falldet/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binary_io.hpp"
#include "falldet/error.hpp"
#include "falldet/rng.hpp"
#include "falldet/weight_store.hpp"
#include "json.hpp"

namespace falldet::svm {

namespace {

constexpr char kMagic[4] = {'S', 'V', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

double dot(std::span<const double> w, std::span<const float> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
  return s;
}

std::size_t check_data(std::span<const LabeledFeature> data) {
  if (data.empty()) throw Error(ErrorCode::kDegenerateData, "no training examples");
  const std::size_t width = data.front().feature.size();
  bool pos = false, neg = false;
  for (const auto& ex : data) {
    if (ex.feature.size() != width) {
      throw Error(ErrorCode::kShape, "feature width " + std::to_string(ex.feature.size()) + " differs from " +
                                         std::to_string(width));
    }
    (ex.label == Label::kFall ? pos : neg) = true;
  }
  if (!pos || !neg) throw Error(ErrorCode::kDegenerateData, "training data holds a single class");
  if (width == 0) throw Error(ErrorCode::kShape, "features are empty");
  return width;
}

}  // namespace

LinearSvmModel train_svm(std::span<const LabeledFeature> data, const TrainParams& params) {
  const std::size_t width = check_data(data);
  const std::size_t n = data.size();
  const double lambda = params.lambda.value_or(1.0 / static_cast<double>(n));
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::kFormat, "lambda must be positive");
  if (params.epochs < 1) throw Error(ErrorCode::kFormat, "epochs must be >= 1");

  std::vector<double> w(width, 0.0), w_sum(width, 0.0);
  double b = 0.0, b_sum = 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(params.seed);
  std::uint64_t t = 0;

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (const std::size_t idx : order) {
      ++t;
      const auto& ex = data[idx];
      const double y = sign_of(ex.label);
      // 1/(lambda t) shifted by 1/lambda. The unshifted schedule opens with
      // steps of size n that leave the unregularised bias far off.
      const double eta = 1.0 / (1.0 + lambda * static_cast<double>(t));
      const bool violated = y * (dot(w, ex.feature) + b) < 1.0;
      const double shrink = 1.0 - eta * lambda;
      if (violated) {
        const double step = eta * y;
        for (std::size_t i = 0; i < width; ++i) w[i] = shrink * w[i] + step * ex.feature[i];
        b += step;
      } else {
        for (auto& v : w) v *= shrink;
      }
      for (std::size_t i = 0; i < width; ++i) w_sum[i] += w[i];
      b_sum += b;
    }
  }

  LinearSvmModel model;
  const double inv_t = 1.0 / static_cast<double>(t);
  model.w.resize(width);
  for (std::size_t i = 0; i < width; ++i) model.w[i] = w_sum[i] * inv_t;
  model.b = b_sum * inv_t;
  model.lambda = lambda;
  model.epochs = params.epochs;
  model.seed = params.seed;
  return model;
}

double objective(std::span<const LabeledFeature> data, std::span<const double> w, double b, double lambda) {
  double reg = 0.0;
  for (double v : w) reg += v * v;
  double loss = 0.0;
  for (const auto& ex : data) {
    if (ex.feature.size() != w.size()) throw Error(ErrorCode::kShape, "feature width mismatch");
    loss += std::max(0.0, 1.0 - sign_of(ex.label) * (dot(w, ex.feature) + b));
  }
  return 0.5 * lambda * reg + (data.empty() ? 0.0 : loss / static_cast<double>(data.size()));
}

Prediction predict(const LinearSvmModel& model, std::span<const float> feature) {
  if (feature.size() != model.w.size()) {
    throw Error(ErrorCode::kShape, "feature width " + std::to_string(feature.size()) + ", model expects " +
                                       std::to_string(model.w.size()));
  }
  const double score = dot(model.w, feature) + model.b;
  return {score > 0.0 ? Label::kFall : Label::kAdl, score};
}

void save_model(const LinearSvmModel& model, const std::filesystem::path& path) {
  std::vector<double> params(model.w);
  params.push_back(model.b);
  const auto bytes = std::as_bytes(std::span<const double>(params));

  detail::BinaryWriter out(path);
  out.write_bytes(kMagic, 4);
  out.write<std::uint32_t>(kVersion);
  out.write<std::uint32_t>(static_cast<std::uint32_t>(model.w.size()));
  out.write_bytes(bytes.data(), bytes.size());
  out.write<std::uint32_t>(crc32(bytes));
  const std::string meta =
      nlohmann::json{{"lambda", model.lambda}, {"epochs", model.epochs}, {"seed", model.seed}}.dump();
  out.write<std::uint32_t>(static_cast<std::uint32_t>(meta.size()));
  out.write_bytes(meta.data(), meta.size());
  out.close();
}

LinearSvmModel load_model(const std::filesystem::path& path) {
  detail::BinaryReader in(path);
  char magic[4];
  try {
    in.read_bytes(magic, 4);
  } catch (const Error&) {
    throw Error(ErrorCode::kFormat, path.string() + " is too short to be an SVM model");
  }
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorCode::kFormat, path.string() + ": bad magic, expected SVM1");
  const auto version = in.read<std::uint32_t>();
  if (version != kVersion) {
    throw Error(ErrorCode::kFormat, path.string() + ": unsupported model version " + std::to_string(version));
  }
  const auto width = in.read<std::uint32_t>();
  std::vector<double> params(static_cast<std::size_t>(width) + 1);
  in.read_bytes(params.data(), params.size() * sizeof(double));
  const auto crc = in.read<std::uint32_t>();
  if (crc != crc32(std::as_bytes(std::span<const double>(params)))) {
    throw Error(ErrorCode::kCorruption, path.string() + ": CRC32 mismatch");
  }
  const auto meta_len = in.read<std::uint32_t>();
  const std::string meta = in.read_string(meta_len);

  LinearSvmModel model;
  model.b = params.back();
  params.pop_back();
  model.w = std::move(params);
  try {
    const auto j = nlohmann::json::parse(meta);
    model.lambda = j.at("lambda").get<double>();
    model.epochs = j.at("epochs").get<int>();
    model.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, path.string() + ": bad hyperparameter block: " + e.what());
  }
  return model;
}

}  // namespace falldet::svm
