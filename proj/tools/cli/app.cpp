#include "cli/app.hpp"

#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli/commands.hpp"
#include "cli/run_config.hpp"
#include "falldet/error.hpp"

namespace falldet::cli {

namespace {

// Flag values. Anything left unset falls back to the config file, then to
// the RunConfig defaults.
struct Overrides {
  std::string config;
  std::optional<std::string> weights, manifest, features, model, report, conversion_report;
  std::vector<float> means;
  std::optional<double> lambda;
  std::optional<int> epochs;
  std::optional<std::uint64_t> svm_seed;
  std::optional<int> n_splits;
  std::optional<double> test_fraction;
  std::optional<std::uint64_t> split_seed;
  bool group_by_video = false;
  bool no_relu = false;
  bool no_l2 = false;
  std::optional<std::string> engine;
  std::optional<int> threads;
  bool resume = false;

  RunConfig resolve() const {
    RunConfig cfg = config.empty() ? RunConfig{} : load_run_config(config);
    if (weights) cfg.weights = *weights;
    if (manifest) cfg.manifest = *manifest;
    if (features) cfg.features = *features;
    if (model) cfg.model = *model;
    if (report) cfg.report = *report;
    if (conversion_report) cfg.conversion_report = *conversion_report;
    if (!means.empty()) {
      cfg.means = {means[0], means[1], means[2]};
      cfg.means_set = true;
    }
    if (lambda) cfg.lambda = *lambda;
    if (epochs) cfg.epochs = *epochs;
    if (svm_seed) cfg.svm_seed = *svm_seed;
    if (n_splits) cfg.n_splits = *n_splits;
    if (test_fraction) cfg.test_fraction = *test_fraction;
    if (split_seed) cfg.split_seed = *split_seed;
    if (group_by_video) cfg.group_by_video = true;
    if (no_relu) cfg.post_relu = false;
    if (no_l2) cfg.l2_normalize = false;
    if (engine) cfg.engine = *engine == "naive" ? nn::ConvEngine::kNaive : nn::ConvEngine::kOptimized;
    if (threads) cfg.threads = *threads;
    if (resume) cfg.resume = true;
    cfg.validate();
    return cfg;
  }
};

void add_config(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "JSON run configuration; flags override its values")
      ->check(CLI::ExistingFile);
  sub->add_option("--threads", o.threads,
                  "Worker threads (default: $FALLDET_THREADS, else all hardware threads)")
      ->check(CLI::PositiveNumber);
}

void add_extraction(CLI::App* sub, Overrides& o) {
  sub->add_option("--weights", o.weights, "C3DW weight file");
  sub->add_option("--means", o.means, "Per-channel RGB means in pixel units (default 101.4,97.7,90.0)")
      ->delimiter(',')
      ->expected(3);
  sub->add_option("--conversion-report", o.conversion_report,
                  "Converter report JSON; its pixel_means apply unless --means is given");
  sub->add_flag("--no-relu", o.no_relu, "Use pre-activation fc6 values");
  sub->add_flag("--no-l2", o.no_l2, "Skip L2 normalisation of features");
  sub->add_option("--engine", o.engine, "Convolution engine (default optimized)")
      ->check(CLI::IsMember({"naive", "optimized"}));
}

void add_svm(CLI::App* sub, Overrides& o) {
  sub->add_option("--lambda", o.lambda, "SVM regularisation (default 1/n)")->check(CLI::PositiveNumber);
  sub->add_option("--epochs", o.epochs, "SVM epochs (default 100)")->check(CLI::PositiveNumber);
  sub->add_option("--svm-seed", o.svm_seed, "SVM shuffling seed (default 0)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"falldet: C3D fc6 features + linear SVM fall detection"};
  app.require_subcommand(1);
  Overrides o;

  auto* shapes = app.add_subcommand("shapes", "Print the C3D shape chain for a (3,16,112,112) clip");

  auto* features = app.add_subcommand("features", "Extract fc6 features for every chunk of every video");
  add_config(features, o);
  add_extraction(features, o);
  features->add_option("--manifest", o.manifest, "Dataset manifest CSV");
  features->add_option("--out,--features", o.features, "Features CSV to write");
  features->add_flag("--resume", o.resume, "Keep rows already in the output and skip their videos");

  auto* train = app.add_subcommand("train", "Train the SVM on a features file");
  add_config(train, o);
  add_svm(train, o);
  train->add_option("--features", o.features, "Features CSV");
  train->add_option("--model,--out", o.model, "SVM model file to write");

  auto* evaluate = app.add_subcommand("evaluate", "Stratified shuffle-split evaluation");
  add_config(evaluate, o);
  add_svm(evaluate, o);
  evaluate->add_option("--features", o.features, "Features CSV");
  evaluate->add_option("--report", o.report, "Report CSV (a .json mirror is written alongside)");
  evaluate->add_option("--n-splits", o.n_splits, "Number of splits (default 5)")->check(CLI::PositiveNumber);
  evaluate->add_option("--test-fraction", o.test_fraction, "Test share per split (default 0.3)");
  evaluate->add_option("--split-seed", o.split_seed, "Split shuffling seed (default 0)");
  evaluate->add_flag("--group-by-video", o.group_by_video, "Keep all chunks of a video on one side");

  auto* predict = app.add_subcommand("predict", "Classify one video chunk by chunk");
  add_config(predict, o);
  add_extraction(predict, o);
  predict->add_option("--model", o.model, "SVM model file");
  std::string input;
  std::optional<std::string> input_format;
  double input_fps = 30.0;
  predict->add_option("--input", input, "PPM directory or raw RGB24 file")->required();
  predict->add_option("--format", input_format, "ppm_dir or raw_rgb24 (default: by file type)")
      ->check(CLI::IsMember({"ppm_dir", "raw_rgb24"}));
  predict->add_option("--fps", input_fps, "Frame rate of a PPM directory (default 30)");

  auto* stats = app.add_subcommand("stats", "Per-class video duration statistics for a manifest");
  add_config(stats, o);
  stats->add_option("--manifest", o.manifest, "Dataset manifest CSV");
  bool whole_seconds = false;
  stats->add_flag("--whole-seconds", whole_seconds, "Round durations to whole seconds first");

  auto* bench = app.add_subcommand("bench", "Time naive vs optimized conv3d at every C3D conv layer");
  BenchOptions bench_opts;
  bench->add_option("--threads", bench_opts.threads, "Threads for the optimized engine (default 8)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--repeats", bench_opts.repeats, "Optimized runs per layer, best kept (default 3)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--layer", bench_opts.layers, "Restrict to these conv layers (repeatable)");
  bench->add_option("--seed", bench_opts.seed, "Data seed (default 0)");

  auto* init = app.add_subcommand("init-weights", "Write seeded random C3D weights (synthetic runs only)");
  std::string init_out;
  std::uint64_t init_seed = 0;
  init->add_option("--out", init_out, "C3DW file to write")->required();
  init->add_option("--seed", init_seed, "Seed (default 0)");

  auto* verify = app.add_subcommand("verify", "Check weights against a conversion report and golden vectors");
  add_config(verify, o);
  add_extraction(verify, o);
  VerifyOptions verify_opts;
  verify->add_option("--report", verify_opts.conversion_report, "Conversion report JSON");
  verify->add_option("--golden-input", verify_opts.golden_input, "Golden input clip CSV");
  verify->add_option("--golden-fc6", verify_opts.golden_fc6, "Golden fc6 vector CSV");
  verify->add_option("--tolerance", verify_opts.tolerance, "Relative tolerance (default 1e-3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (*shapes) {
      cmd_shapes(out);
    } else if (*features) {
      cmd_features(o.resolve(), out, err);
    } else if (*train) {
      cmd_train(o.resolve(), out);
    } else if (*evaluate) {
      cmd_evaluate(o.resolve(), out);
    } else if (*predict) {
      std::optional<ingest::SourceFormat> fmt;
      if (input_format) fmt = ingest::parse_source_format(*input_format);
      cmd_predict(o.resolve(), input, fmt, input_fps, out);
    } else if (*stats) {
      cmd_stats(o.resolve(), whole_seconds, out);
    } else if (*bench) {
      cmd_bench(bench_opts, out);
    } else if (*init) {
      cmd_init_weights(init_out, init_seed, out);
    } else if (*verify) {
      return cmd_verify(o.resolve(), verify_opts, out) ? kExitOk : kExitBadInput;
    }
  } catch (const Error& e) {
    err << "falldet: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "falldet: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace falldet::cli
