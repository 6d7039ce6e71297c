#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "falldet/ingest.hpp"

namespace falldet::svm {

using ingest::Label;

struct LabeledFeature {
  std::span<const float> feature;
  Label label = Label::kAdl;
};

/// +1 for fall, -1 for adl.
inline int sign_of(Label label) { return label == Label::kFall ? 1 : -1; }

struct TrainParams {
  std::optional<double> lambda;  // defaults to 1/n
  int epochs = 100;
  std::uint64_t seed = 0;
};

struct LinearSvmModel {
  std::vector<double> w;
  double b = 0.0;
  double lambda = 0.0;
  int epochs = 0;
  std::uint64_t seed = 0;

  std::size_t width() const noexcept { return w.size(); }
  bool operator==(const LinearSvmModel&) const = default;
};

/// Minimises (lambda/2)|w|^2 + (1/n) sum hinge(y (w.x + b)) by stochastic
/// subgradient steps of size 1/(1 + lambda t), with the example order
/// reshuffled every epoch from `seed`. The bias is not regularised. The
/// returned (w, b) is the average of all iterates.
///
/// Throws kDegenerateData for empty or single-class data, kShape when
/// feature widths differ.
LinearSvmModel train_svm(std::span<const LabeledFeature> data, const TrainParams& params = {});

/// The regularised hinge objective at (w, b).
double objective(std::span<const LabeledFeature> data, std::span<const double> w, double b, double lambda);

struct Prediction {
  Label label = Label::kAdl;
  double score = 0.0;
};

/// score = w.x + b; fall iff score > 0 (a zero score is adl).
Prediction predict(const LinearSvmModel& model, std::span<const float> feature);

/// "SVM1" u32 version u32 width (width+1) x f64 (w then b)
/// u32 crc32(those f64 bytes) u32 json_len json{lambda,epochs,seed}
void save_model(const LinearSvmModel& model, const std::filesystem::path& path);
LinearSvmModel load_model(const std::filesystem::path& path);

}  // namespace falldet::svm
