#include "cli/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

#include "falldet/error.hpp"
#include "json.hpp"

namespace falldet::cli {

void RunConfig::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw Error(ErrorCode::kFormat, "test_fraction must be in (0,1)");
  if (epochs < 1) throw Error(ErrorCode::kFormat, "epochs must be >= 1");
  if (n_splits < 1) throw Error(ErrorCode::kFormat, "n_splits must be >= 1");
  if (lambda && !(*lambda > 0.0)) throw Error(ErrorCode::kFormat, "lambda must be positive");
  if (threads < 0) throw Error(ErrorCode::kFormat, "threads must be >= 0");
  for (float m : means) {
    if (!(m >= 0.0f && m <= 255.0f)) throw Error(ErrorCode::kFormat, "means must lie in [0,255]");
  }
}

int RunConfig::resolved_threads() const {
  if (threads > 0) return threads;
  if (const char* env = std::getenv("FALLDET_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path.string());
  RunConfig cfg;
  try {
    const auto j = nlohmann::json::parse(in);
    if (!j.is_object()) throw Error(ErrorCode::kFormat, path.string() + ": config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "weights") cfg.weights = value.get<std::string>();
      else if (key == "manifest") cfg.manifest = value.get<std::string>();
      else if (key == "features") cfg.features = value.get<std::string>();
      else if (key == "model") cfg.model = value.get<std::string>();
      else if (key == "report") cfg.report = value.get<std::string>();
      else if (key == "conversion_report") cfg.conversion_report = value.get<std::string>();
      else if (key == "means") {
        cfg.means = value.get<std::array<float, 3>>();
        cfg.means_set = true;
      }
      else if (key == "lambda") cfg.lambda = value.get<double>();
      else if (key == "epochs") cfg.epochs = value.get<int>();
      else if (key == "svm_seed") cfg.svm_seed = value.get<std::uint64_t>();
      else if (key == "n_splits") cfg.n_splits = value.get<int>();
      else if (key == "test_fraction") cfg.test_fraction = value.get<double>();
      else if (key == "split_seed") cfg.split_seed = value.get<std::uint64_t>();
      else if (key == "group_by_video") cfg.group_by_video = value.get<bool>();
      else if (key == "post_relu") cfg.post_relu = value.get<bool>();
      else if (key == "l2_normalize") cfg.l2_normalize = value.get<bool>();
      else if (key == "threads") cfg.threads = value.get<int>();
      else if (key == "resume") cfg.resume = value.get<bool>();
      else if (key == "engine") {
        const auto name = value.get<std::string>();
        if (name == "naive") cfg.engine = nn::ConvEngine::kNaive;
        else if (name == "optimized") cfg.engine = nn::ConvEngine::kOptimized;
        else throw Error(ErrorCode::kFormat, path.string() + ": engine must be naive or optimized");
      } else {
        throw Error(ErrorCode::kFormat, path.string() + ": unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace falldet::cli
