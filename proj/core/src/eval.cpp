#include "falldet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "falldet/error.hpp"
#include "falldet/rng.hpp"
#include "json.hpp"

namespace falldet::eval {

namespace {

// n * f is computed in floating point; nudge so that e.g. 10 * 0.3 (which
// is 3.0000000000000004) and 0.7 * 10 (6.999999999999999) floor as exact
// arithmetic would.
constexpr double kFloorSlack = 1e-9;

std::size_t floor_count(std::size_t n, double f) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * f + kFloorSlack));
}

void check_options(const SplitOptions& o) {
  if (o.n_splits < 1) throw Error(ErrorCode::kFormat, "n_splits must be >= 1");
  if (!(o.test_fraction > 0.0 && o.test_fraction < 1.0)) {
    throw Error(ErrorCode::kFormat, "test_fraction must lie in (0, 1)");
  }
}

std::optional<double> percent(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::array<std::size_t, 2> stratified_test_counts(std::size_t n_adl, std::size_t n_fall, double test_fraction) {
  const std::array<std::size_t, 2> sizes{n_adl, n_fall};
  std::array<std::size_t, 2> counts{};
  std::array<double, 2> frac{};
  for (int c = 0; c < 2; ++c) {
    counts[c] = floor_count(sizes[c], test_fraction);
    frac[c] = static_cast<double>(sizes[c]) * test_fraction - static_cast<double>(counts[c]);
  }
  const std::size_t target = floor_count(n_adl + n_fall, test_fraction);
  std::size_t assigned = counts[0] + counts[1];
  // Largest fractional part first; adl wins ties.
  const int first = frac[1] > frac[0] + kFloorSlack ? 1 : 0;
  for (int c : {first, 1 - first}) {
    if (assigned >= target) break;
    if (counts[c] < sizes[c]) {
      ++counts[c];
      ++assigned;
    }
  }
  return counts;
}

std::vector<SplitPlan> stratified_shuffle_split(std::span<const Label> labels, const SplitOptions& options) {
  check_options(options);
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i] == Label::kFall].push_back(i);
  if (by_class[0].empty() || by_class[1].empty()) {
    throw Error(ErrorCode::kDegenerateData, "stratified split needs both fall and adl items");
  }
  const auto test_counts = stratified_test_counts(by_class[0].size(), by_class[1].size(), options.test_fraction);

  Rng rng(options.seed);
  std::vector<SplitPlan> plans;
  plans.reserve(static_cast<std::size_t>(options.n_splits));
  for (int s = 0; s < options.n_splits; ++s) {
    SplitPlan plan;
    plan.index = s + 1;
    for (int c = 0; c < 2; ++c) {
      auto pool = by_class[c];
      rng.shuffle(std::span<std::size_t>(pool));
      const auto cut = pool.begin() + static_cast<std::ptrdiff_t>(test_counts[c]);
      plan.test.insert(plan.test.end(), pool.begin(), cut);
      plan.train.insert(plan.train.end(), cut, pool.end());
    }
    std::sort(plan.test.begin(), plan.test.end());
    std::sort(plan.train.begin(), plan.train.end());
    plans.push_back(std::move(plan));
  }
  return plans;
}

std::vector<SplitPlan> stratified_group_shuffle_split(std::span<const Label> labels,
                                                      std::span<const std::string> groups,
                                                      const SplitOptions& options) {
  if (labels.size() != groups.size()) throw Error(ErrorCode::kShape, "labels and groups differ in length");
  std::unordered_map<std::string, std::size_t> group_index;
  std::vector<Label> group_labels;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, fresh] = group_index.try_emplace(groups[i], group_labels.size());
    if (fresh) {
      group_labels.push_back(labels[i]);
      members.emplace_back();
    }
    members[it->second].push_back(i);
  }
  auto plans = stratified_shuffle_split(group_labels, options);
  for (auto& plan : plans) {
    auto expand = [&](std::vector<std::size_t>& ids) {
      std::vector<std::size_t> items;
      for (auto g : ids) items.insert(items.end(), members[g].begin(), members[g].end());
      std::sort(items.begin(), items.end());
      ids = std::move(items);
    };
    expand(plan.train);
    expand(plan.test);
  }
  return plans;
}

ConfusionMatrix confusion(std::span<const Label> predicted, std::span<const Label> truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::kShape, std::to_string(predicted.size()) + " predictions for " +
                                       std::to_string(truth.size()) + " labels");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool pred_fall = predicted[i] == Label::kFall;
    if (truth[i] == Label::kFall) {
      ++(pred_fall ? cm.tp : cm.fn);
    } else {
      ++(pred_fall ? cm.fp : cm.tn);
    }
  }
  return cm;
}

MetricsReport MetricsReport::from_values(const std::array<std::optional<double>, 7>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.sensitivity = percent(cm.tp, cm.tp + cm.fn);
  r.specificity = percent(cm.tn, cm.tn + cm.fp);
  r.precision = percent(cm.tp, cm.tp + cm.fp);
  r.accuracy = percent(cm.tp + cm.tn, cm.total());
  r.f1 = percent(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn);
  r.fpr = percent(cm.fp, cm.fp + cm.tn);
  r.fnr = percent(cm.fn, cm.fn + cm.tp);
  return r;
}

MetricsReport average_metrics(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::kEmptyInput, "no reports to average");
  std::array<std::optional<double>, 7> out{};
  for (std::size_t f = 0; f < out.size(); ++f) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : reports) {
      if (const auto v = r.values()[f]) {
        sum += *v;
        ++n;
      }
    }
    if (n > 0) out[f] = sum / n;
  }
  return MetricsReport::from_values(out);
}

double round2(double value) { return std::round(value * 100.0) / 100.0; }

Label aggregate_video(std::span<const Label> chunk_predictions) {
  if (chunk_predictions.empty()) throw Error(ErrorCode::kEmptyInput, "video has no chunk predictions");
  return std::ranges::any_of(chunk_predictions, [](Label l) { return l == Label::kFall; }) ? Label::kFall
                                                                                           : Label::kAdl;
}

CvResult cross_validate(std::span<const FeatureRow> rows, const CvOptions& options) {
  if (rows.empty()) throw Error(ErrorCode::kEmptyInput, "no feature rows");
  std::vector<Label> labels;
  std::vector<std::string> groups;
  labels.reserve(rows.size());
  for (const auto& r : rows) {
    labels.push_back(r.label);
    groups.push_back(r.video_id);
  }
  auto plans = options.group_by_video ? stratified_group_shuffle_split(labels, groups, options.split)
                                      : stratified_shuffle_split(labels, options.split);

  CvResult result;
  result.splits.resize(plans.size());
  const auto n = static_cast<std::ptrdiff_t>(plans.size());
  std::vector<std::exception_ptr> errors(plans.size());

#pragma omp parallel for schedule(dynamic) num_threads(std::max(options.threads, 1))
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    try {
      auto& plan = plans[static_cast<std::size_t>(s)];
      std::vector<svm::LabeledFeature> train;
      train.reserve(plan.train.size());
      for (auto i : plan.train) train.push_back({rows[i].values, rows[i].label});
      const auto model = svm::train_svm(train, options.train);

      std::vector<Label> predicted, truth;
      for (auto i : plan.test) {
        predicted.push_back(svm::predict(model, rows[i].values).label);
        truth.push_back(rows[i].label);
      }
      auto& out = result.splits[static_cast<std::size_t>(s)];
      out.cm = confusion(predicted, truth);
      out.report = metrics(out.cm);
      out.plan = std::move(plan);
    } catch (...) {
      errors[static_cast<std::size_t>(s)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<MetricsReport> reports;
  for (const auto& s : result.splits) reports.push_back(s.report);
  result.average = average_metrics(reports);
  return result;
}

namespace {

std::string cell(const std::optional<double>& v) {
  if (!v) return "NA";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << round2(*v);
  return os.str();
}

nlohmann::json report_json(const MetricsReport& r) {
  nlohmann::json j = nlohmann::json::object();
  const auto values = r.values();
  for (std::size_t f = 0; f < values.size(); ++f) {
    j[std::string(MetricsReport::kNames[f])] = values[f] ? nlohmann::json(*values[f]) : nlohmann::json(nullptr);
  }
  return j;
}

}  // namespace

void write_report_csv(const CvResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "split";
  for (auto name : MetricsReport::kNames) out << ',' << name;
  out << '\n';
  auto row = [&](const std::string& label, const MetricsReport& r) {
    out << label;
    for (const auto& v : r.values()) out << ',' << cell(v);
    out << '\n';
  };
  for (const auto& s : result.splits) row(std::to_string(s.plan.index), s.report);
  row("average", result.average);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

void write_report_json(const CvResult& result, const std::filesystem::path& path) {
  nlohmann::json j;
  j["splits"] = nlohmann::json::array();
  for (const auto& s : result.splits) {
    j["splits"].push_back({{"split", s.plan.index},
                           {"train_size", s.plan.train.size()},
                           {"test_size", s.plan.test.size()},
                           {"confusion", {{"tp", s.cm.tp}, {"fp", s.cm.fp}, {"tn", s.cm.tn}, {"fn", s.cm.fn}}},
                           {"metrics", report_json(s.report)}});
  }
  j["average"] = report_json(result.average);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string format_report_table(const CvResult& result) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "metric";
  for (const auto& s : result.splits) os << std::right << std::setw(9) << ("split" + std::to_string(s.plan.index));
  os << std::right << std::setw(9) << "average" << '\n';
  for (std::size_t f = 0; f < MetricsReport::kNames.size(); ++f) {
    os << std::left << std::setw(12) << MetricsReport::kNames[f];
    for (const auto& s : result.splits) os << std::right << std::setw(9) << cell(s.report.values()[f]);
    os << std::right << std::setw(9) << cell(result.average.values()[f]) << '\n';
  }
  os << std::left << std::setw(12) << "tp/fp/tn/fn";
  for (const auto& s : result.splits) {
    os << "  " << s.cm.tp << '/' << s.cm.fp << '/' << s.cm.tn << '/' << s.cm.fn;
  }
  os << '\n';
  return os.str();
}

DurationStats summarize_durations(std::span<const double> durations) {
  if (durations.empty()) throw Error(ErrorCode::kDegenerateData, "no durations to summarise");
  std::vector<double> v(durations.begin(), durations.end());
  for (double d : v) {
    if (!(d > 0.0)) throw Error(ErrorCode::kFormat, "durations must be positive");
  }
  std::sort(v.begin(), v.end());
  DurationStats s;
  s.count = v.size();
  s.min = v.front();
  s.max = v.back();
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  const std::size_t mid = v.size() / 2;
  s.median = v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;

  std::size_t best = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const std::size_t run = j - i;
    if (run > best) {
      best = run;
      s.modes.clear();
    }
    if (run == best) s.modes.push_back(v[i]);
    i = j;
  }
  return s;
}

std::map<Label, DurationStats> summarize_manifest(std::span<const ingest::ManifestEntry> entries,
                                                  std::span<const double> durations) {
  if (entries.size() != durations.size()) throw Error(ErrorCode::kShape, "one duration per manifest entry required");
  std::map<Label, std::vector<double>> by_class;
  for (std::size_t i = 0; i < entries.size(); ++i) by_class[entries[i].label].push_back(durations[i]);
  std::map<Label, DurationStats> out;
  for (Label label : {Label::kFall, Label::kAdl}) {
    const auto it = by_class.find(label);
    if (it == by_class.end()) {
      throw Error(ErrorCode::kDegenerateData, "manifest has no " + std::string(ingest::to_string(label)) + " videos");
    }
    out[label] = summarize_durations(it->second);
  }
  return out;
}

}  // namespace falldet::eval
