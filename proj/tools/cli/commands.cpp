#include "cli/commands.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "cli/conv_bench.hpp"
#include "falldet/c3d.hpp"
#include "falldet/error.hpp"
#include "falldet/eval.hpp"
#include "falldet/feature_io.hpp"
#include "falldet/svm.hpp"
#include "falldet/weight_store.hpp"
#include "json.hpp"

namespace falldet::cli {

namespace fs = std::filesystem;

namespace {

void require_path(const fs::path& p, const char* what) {
  if (p.empty()) throw Error(ErrorCode::kFormat, std::string("missing --") + what);
}

ingest::PreprocessConfig preprocess_config(const RunConfig& cfg) {
  ingest::PreprocessConfig pre;
  pre.mean = cfg.means;
  if (!cfg.means_set && !cfg.conversion_report.empty()) {
    const auto report = read_conversion_report(cfg.conversion_report);
    if (report.pixel_means) pre.mean = *report.pixel_means;
  }
  return pre;
}

c3d::Model load_model(const RunConfig& cfg) {
  require_path(cfg.weights, "weights");
  auto config = c3d::default_config();
  auto weights = c3d::load_weights(cfg.weights, config);
  return c3d::build_model(std::move(config), std::move(weights));
}

nn::ExecOptions exec_options(const RunConfig& cfg) { return {cfg.engine, cfg.resolved_threads()}; }

c3d::FeatureOptions feature_options(const RunConfig& cfg) { return {cfg.post_relu, cfg.l2_normalize}; }

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

void cmd_shapes(std::ostream& out) {
  const auto config = c3d::default_config();
  out << "input → " << shape_to_string(c3d::kClipShape) << '\n';
  const auto steps = c3d::forward_shapes(config, c3d::kClipShape);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto kind = config.layers[i].kind;
    if (kind == c3d::LayerKind::kConv3d || kind == c3d::LayerKind::kMaxPool3d) {
      out << steps[i].layer << " → " << shape_to_string(steps[i].shape) << '\n';
    } else if (kind == c3d::LayerKind::kLinear) {
      out << steps[i].layer << " → " << steps[i].shape[0] << '\n';
    }
  }
}

void cmd_features(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  require_path(cfg.manifest, "manifest");
  require_path(cfg.features, "features");
  const auto entries = ingest::read_manifest(cfg.manifest);
  if (entries.empty()) throw Error(ErrorCode::kEmptyInput, "no videos in manifest " + cfg.manifest.string());

  const auto model = load_model(cfg);
  const auto pre = preprocess_config(cfg);
  const auto exec = exec_options(cfg);
  const auto fopts = feature_options(cfg);
  const auto width = static_cast<std::size_t>(model.feature_width());

  FeatureFileScan scan;
  if (cfg.resume) {
    scan = scan_feature_file(cfg.features);
    if (scan.width != 0 && scan.width != width) {
      throw Error(ErrorCode::kFormat, cfg.features.string() + " has " + std::to_string(scan.width) +
                                          " feature columns, model produces " + std::to_string(width));
    }
  }
  std::ofstream file;
  if (scan.width != 0) {
    fs::resize_file(cfg.features, scan.complete_bytes);
    file.open(cfg.features, std::ios::binary | std::ios::app);
  } else {
    file.open(cfg.features, std::ios::binary | std::ios::trunc);
    if (file) write_feature_header(file, width);
  }
  if (!file) throw Error(ErrorCode::kIo, "cannot write " + cfg.features.string());

  std::size_t rows = 0, skipped = 0;
  for (const auto& entry : entries) {
    if (scan.video_ids.contains(entry.video_id)) {
      ++skipped;
      continue;
    }
    std::ostringstream block;
    std::size_t chunks = 0;
    try {
      const auto seq = ingest::read_frames(entry.path, entry.format, entry.fps);
      const auto groups = ingest::chunk_frames(seq);
      for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto clip = ingest::preprocess(groups[i], pre);
        auto fv = c3d::extract_features(model, clip, fopts, exec);
        write_feature_row(block, {entry.video_id, static_cast<std::int64_t>(i), entry.label, std::move(fv.values)});
        ++chunks;
      }
    } catch (const Error& e) {
      throw Error(e.code(), "video " + entry.video_id + ": " + e.what());
    }
    if (chunks == 0) log << "warning: video " << entry.video_id << " has fewer than 16 frames; no rows written\n";
    // One write per video keeps a resumed file free of half-written videos.
    const auto text = block.str();
    file.write(text.data(), static_cast<std::streamsize>(text.size()));
    file.flush();
    if (!file) throw Error(ErrorCode::kIo, "write failed for " + cfg.features.string());
    rows += chunks;
    log << entry.video_id << ": " << chunks << " chunk(s)\n";
  }
  out << "wrote " << rows << " feature rows to " << cfg.features.string();
  if (skipped) out << " (" << skipped << " video(s) already present)";
  out << '\n';
}

void cmd_train(const RunConfig& cfg, std::ostream& out) {
  require_path(cfg.features, "features");
  require_path(cfg.model, "model");
  const auto rows = read_features(cfg.features);
  std::vector<svm::LabeledFeature> data;
  data.reserve(rows.size());
  for (const auto& r : rows) data.push_back({r.values, r.label});
  const auto model = svm::train_svm(data, {cfg.lambda, cfg.epochs, cfg.svm_seed});
  svm::save_model(model, cfg.model);

  std::size_t correct = 0;
  for (const auto& ex : data) correct += svm::predict(model, ex.feature).label == ex.label;
  out << "trained on " << data.size() << " chunks (lambda " << model.lambda << ", " << model.epochs
      << " epochs); training accuracy " << fixed(100.0 * correct / data.size(), 2) << "%\n"
      << "model written to " << cfg.model.string() << '\n';
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  require_path(cfg.features, "features");
  const auto rows = read_features(cfg.features);
  eval::CvOptions opts;
  opts.split = {cfg.n_splits, cfg.test_fraction, cfg.split_seed};
  opts.train = {cfg.lambda, cfg.epochs, cfg.svm_seed};
  opts.group_by_video = cfg.group_by_video;
  opts.threads = cfg.resolved_threads();
  const auto result = eval::cross_validate(rows, opts);

  out << format_report_table(result);
  if (!cfg.report.empty()) {
    eval::write_report_csv(result, cfg.report);
    fs::path json = cfg.report;
    json.replace_extension(".json");
    eval::write_report_json(result, json);
    out << "report written to " << cfg.report.string() << " and " << json.string() << '\n';
  }
}

void cmd_predict(const RunConfig& cfg, const fs::path& input, std::optional<ingest::SourceFormat> format, double fps,
                 std::ostream& out) {
  require_path(cfg.model, "model");
  const auto svm_model = svm::load_model(cfg.model);
  const auto model = load_model(cfg);
  if (static_cast<std::int64_t>(svm_model.width()) != model.feature_width()) {
    throw Error(ErrorCode::kValidation, "SVM width " + std::to_string(svm_model.width()) +
                                            " does not match feature width " + std::to_string(model.feature_width()));
  }
  const auto fmt = format.value_or(fs::is_directory(input) ? ingest::SourceFormat::kPpmDir
                                                           : ingest::SourceFormat::kRawRgb24);
  const auto seq = ingest::read_frames(input, fmt, fps);
  const auto groups = ingest::chunk_frames(seq);
  if (groups.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no full chunk: " + input.string() + " has " +
                                            std::to_string(seq.frames.size()) + " frames, 16 needed");
  }
  const auto pre = preprocess_config(cfg);
  const auto exec = exec_options(cfg);
  std::vector<ingest::Label> labels;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto fv = c3d::extract_features(model, ingest::preprocess(groups[i], pre), feature_options(cfg), exec);
    const auto p = svm::predict(svm_model, fv.values);
    labels.push_back(p.label);
    out << "chunk " << i << " score " << fixed(p.score, 6) << ' ' << ingest::to_string(p.label) << '\n';
  }
  out << "video " << ingest::to_string(eval::aggregate_video(labels)) << '\n';
}

void cmd_stats(const RunConfig& cfg, bool whole_seconds, std::ostream& out) {
  require_path(cfg.manifest, "manifest");
  const auto entries = ingest::read_manifest(cfg.manifest);
  if (entries.empty()) throw Error(ErrorCode::kEmptyInput, "no videos in manifest " + cfg.manifest.string());
  std::vector<double> durations;
  std::map<ingest::Label, std::set<double>> fps;
  std::map<ingest::Label, std::set<std::string>> subjects;
  for (const auto& e : entries) {
    double d = static_cast<double>(ingest::count_frames(e)) / e.fps;
    if (whole_seconds) d = std::round(d);
    durations.push_back(d);
    fps[e.label].insert(e.fps);
    subjects[e.label].insert(e.subject);
  }
  const auto stats = eval::summarize_manifest(entries, durations);
  out << std::left << std::setw(6) << "type" << std::right << std::setw(7) << "videos" << std::setw(9) << "min"
      << std::setw(9) << "max" << std::setw(9) << "mean" << std::setw(14) << "mode" << std::setw(9) << "median"
      << std::setw(8) << "fps" << std::setw(10) << "subjects" << '\n';
  for (auto label : {ingest::Label::kFall, ingest::Label::kAdl}) {
    const auto& s = stats.at(label);
    std::string modes;
    for (double m : s.modes) {
      std::ostringstream os;
      os << m;
      modes += (modes.empty() ? "" : " & ") + os.str();
    }
    std::string rates;
    for (double f : fps[label]) {
      std::ostringstream os;
      os << f;
      rates += (rates.empty() ? "" : "/") + os.str();
    }
    out << std::left << std::setw(6) << ingest::to_string(label) << std::right << std::setw(7) << s.count
        << std::setw(9) << fixed(s.min, 2) << std::setw(9) << fixed(s.max, 2) << std::setw(9) << fixed(s.mean, 2)
        << std::setw(14) << modes << std::setw(9) << fixed(s.median, 2) << std::setw(8) << rates << std::setw(10)
        << subjects[label].size() << '\n';
  }
}

void cmd_bench(const BenchOptions& options, std::ostream& out) {
  const auto rows = bench_c3d_convs(options.threads, options.repeats, options.layers, options.seed);
  out << "conv3d naive vs optimized, threads=" << options.threads << '\n';
  out << std::left << std::setw(8) << "layer" << std::setw(20) << "input" << std::right << std::setw(8) << "kernels"
      << std::setw(9) << "GFLOP" << std::setw(12) << "naive_ms" << std::setw(12) << "opt_ms" << std::setw(10)
      << "speedup" << std::setw(11) << "max_rel" << '\n';
  for (const auto& r : rows) {
    std::ostringstream err;
    err << std::scientific << std::setprecision(1) << r.max_rel_error;
    out << std::left << std::setw(8) << r.layer << std::setw(20) << shape_to_string(r.input) << std::right
        << std::setw(8) << r.kernels << std::setw(9) << fixed(r.gflop, 2) << std::setw(12) << fixed(r.naive_ms, 1)
        << std::setw(12) << fixed(r.optimized_ms, 1) << std::setw(9) << fixed(r.speedup(), 2) << 'x'
        << std::setw(11) << err.str() << '\n';
  }
}

void cmd_init_weights(const fs::path& out_path, std::uint64_t seed, std::ostream& out) {
  const auto store = c3d::random_weights(c3d::default_config(), seed);
  save_weights(store, out_path);
  out << "wrote " << store.size() << " random blobs (seed " << seed << ") to " << out_path.string() << '\n';
}

bool cmd_verify(const RunConfig& cfg, const VerifyOptions& options, std::ostream& out) {
  require_path(cfg.weights, "weights");
  bool ok = true;
  auto config = c3d::default_config();
  auto store = c3d::load_weights(cfg.weights, config);
  out << "weights: " << store.size() << " blobs, all CRC32 checks passed\n";

  if (!options.conversion_report.empty()) {
    const auto report = read_conversion_report(options.conversion_report);
    std::size_t matched = 0;
    for (const auto& layer : report.layers) {
      if (!store.contains(layer.name)) {
        out << "MISMATCH " << layer.name << ": absent from weights\n";
        ok = false;
        continue;
      }
      const auto& blob = store.at(layer.name);
      if (blob.crc != layer.crc32 || blob.shape != layer.shape) {
        out << "MISMATCH " << layer.name << ": report " << shape_to_string(layer.shape) << " crc " << layer.crc32
            << ", loader " << shape_to_string(blob.shape) << " crc " << blob.crc << '\n';
        ok = false;
      } else {
        ++matched;
      }
    }
    std::set<std::string> listed;
    for (const auto& layer : report.layers) listed.insert(layer.name);
    for (const auto& [name, shape] : c3d::expected_parameter_shapes(config)) {
      if (!listed.contains(name)) {
        out << "MISMATCH " << name << ": absent from conversion report\n";
        ok = false;
      }
    }
    out << "conversion report: " << matched << "/" << report.layers.size() << " layers match\n";
  }

  if (!options.golden_input.empty() || !options.golden_fc6.empty()) {
    if (options.golden_input.empty() || options.golden_fc6.empty()) {
      throw Error(ErrorCode::kFormat, "--golden-input and --golden-fc6 go together");
    }
    auto input = read_golden_csv(options.golden_input);
    const auto expected = read_golden_csv(options.golden_fc6);
    const Tensor clip(c3d::kClipShape, std::move(input));
    const auto model = c3d::build_model(std::move(config), std::move(store));
    const auto fv = c3d::extract_features(model, clip, feature_options(cfg), exec_options(cfg));
    const double err = max_relative_error(fv.values, expected);
    const bool pass = err <= options.tolerance;
    out << "golden fc6: relative error " << err << (pass ? " (ok)" : " (FAIL)") << '\n';
    ok = ok && pass;
  }
  return ok;
}

ConversionReport read_conversion_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open conversion report " + path.string());
  ConversionReport report;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& layer : j.at("layers")) {
      ConversionLayer l;
      l.name = layer.at("name").get<std::string>();
      l.shape = layer.at("shape").get<Shape>();
      l.crc32 = layer.at("crc32").get<std::uint32_t>();
      report.layers.push_back(std::move(l));
    }
    if (j.contains("pixel_means")) report.pixel_means = j.at("pixel_means").get<std::array<float, 3>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
  return report;
}

std::vector<float> read_golden_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<float> values;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    float v{};
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
      throw Error(ErrorCode::kFormat, path.string() + ": bad value '" + line + "'");
    }
    values.push_back(v);
  }
  return values;
}

void write_golden_csv(std::span<const float> values, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  char buf[32];
  for (float v : values) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, end - buf);
    out << '\n';
  }
}

}  // namespace falldet::cli
