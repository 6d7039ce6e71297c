#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "falldet/error.hpp"
#include "falldet/eval.hpp"
#include "support/temp_dir.hpp"

namespace falldet::eval {
namespace {

std::vector<Label> labels(std::size_t adl, std::size_t fall) {
  std::vector<Label> v(adl, Label::kAdl);
  v.insert(v.end(), fall, Label::kFall);
  return v;
}

std::size_t count(const std::vector<std::size_t>& idx, std::span<const Label> y, Label l) {
  return static_cast<std::size_t>(std::count_if(idx.begin(), idx.end(), [&](std::size_t i) { return y[i] == l; }));
}

TEST(Split, TenTenGivesThreeAndThree) {
  const auto y = labels(10, 10);
  const auto plans = stratified_shuffle_split(y);
  ASSERT_EQ(plans.size(), 5u);
  for (const auto& p : plans) {
    EXPECT_EQ(p.test.size(), 6u);
    EXPECT_EQ(p.train.size(), 14u);
    EXPECT_EQ(count(p.test, y, Label::kFall), 3u);
    EXPECT_EQ(count(p.test, y, Label::kAdl), 3u);
  }
  EXPECT_EQ(plans[0].index, 1);
  EXPECT_EQ(plans[4].index, 5);
}

TEST(Split, RemainderGoesToLargestFraction) {
  // 7 adl, 3 fall, f=0.3: floor(2.1)=2, floor(0.9)=0, target floor(3)=3;
  // fall has the larger fractional part (0.9 > 0.1).
  EXPECT_EQ(stratified_test_counts(7, 3, 0.3), (std::array<std::size_t, 2>{2, 1}));
  // Equal fractions: adl wins the tie. 5 and 5 at 0.3 -> 1.5 each, target 3.
  EXPECT_EQ(stratified_test_counts(5, 5, 0.3), (std::array<std::size_t, 2>{2, 1}));
  // 6 adl, 4 fall at 0.3: 1.8 / 1.2 -> 1 / 1, target 3, adl fraction larger.
  EXPECT_EQ(stratified_test_counts(6, 4, 0.3), (std::array<std::size_t, 2>{2, 1}));
  // 32 videos at 0.3: 4.8 + 4.8 -> 4 + 4, target 9.
  EXPECT_EQ(stratified_test_counts(16, 16, 0.3), (std::array<std::size_t, 2>{5, 4}));
}

TEST(Split, SeedDeterminismAndDependence) {
  const auto y = labels(13, 9);
  const auto a = stratified_shuffle_split(y, {5, 0.3, 4});
  const auto b = stratified_shuffle_split(y, {5, 0.3, 4});
  const auto c = stratified_shuffle_split(y, {5, 0.3, 5});
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].test, b[i].test);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].test != c[i].test;
  EXPECT_TRUE(differs);
}

TEST(Split, DisjointAndExhaustive) {
  const auto y = labels(17, 11);
  for (const auto& p : stratified_shuffle_split(y, {7, 0.25, 1})) {
    std::vector<std::size_t> all = p.train;
    all.insert(all.end(), p.test.begin(), p.test.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) ASSERT_EQ(all[i], i);
    EXPECT_TRUE(std::is_sorted(p.test.begin(), p.test.end()));
  }
}

TEST(Split, MissingClassIsDegenerate) {
  const auto y = labels(6, 0);
  try {
    stratified_shuffle_split(y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateData);
  }
}

TEST(Split, GroupsStayTogether) {
  std::vector<Label> y;
  std::vector<std::string> g;
  for (int v = 0; v < 12; ++v) {
    for (int c = 0; c < 1 + v % 3; ++c) {
      y.push_back(v < 6 ? Label::kAdl : Label::kFall);
      g.push_back("v" + std::to_string(v));
    }
  }
  for (const auto& p : stratified_group_shuffle_split(y, g, {5, 0.3, 2})) {
    std::set<std::string> test_groups, train_groups;
    for (auto i : p.test) test_groups.insert(g[i]);
    for (auto i : p.train) train_groups.insert(g[i]);
    for (const auto& name : test_groups) EXPECT_FALSE(train_groups.contains(name)) << name;
    // 12 groups, 6 per class: floor(1.8)+floor(1.8) = 2, target 3.
    EXPECT_EQ(test_groups.size(), 3u);
    EXPECT_EQ(p.train.size() + p.test.size(), y.size());
  }
}

TEST(Metrics, WorkedExample) {
  const auto r = metrics({3, 2, 4, 1});
  EXPECT_EQ(round2(*r.sensitivity), 75.00);
  EXPECT_EQ(round2(*r.specificity), 66.67);
  EXPECT_EQ(round2(*r.precision), 60.00);
  EXPECT_EQ(round2(*r.accuracy), 70.00);
  EXPECT_EQ(round2(*r.f1), 66.67);
  EXPECT_EQ(round2(*r.fpr), 33.33);
  EXPECT_EQ(round2(*r.fnr), 25.00);
}

TEST(Metrics, PerfectMatrix) {
  const auto r = metrics({20, 0, 12, 0});
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(*r.values()[i], 100.0) << MetricsReport::kNames[i];
  EXPECT_EQ(*r.fpr, 0.0);
  EXPECT_EQ(*r.fnr, 0.0);
}

TEST(Metrics, FalsePositiveRate) { EXPECT_EQ(round2(*metrics({10, 2, 46, 0}).fpr), 4.17); }

TEST(Metrics, ZeroDenominatorsAreUndefined) {
  const auto r = metrics({0, 0, 5, 0});
  EXPECT_FALSE(r.sensitivity.has_value());
  EXPECT_FALSE(r.precision.has_value());
  EXPECT_FALSE(r.f1.has_value());
  EXPECT_FALSE(r.fnr.has_value());
  EXPECT_EQ(*r.specificity, 100.0);
  EXPECT_EQ(*r.accuracy, 100.0);
}

TEST(Metrics, Confusion) {
  const std::vector<Label> pred{Label::kFall, Label::kFall, Label::kAdl, Label::kAdl, Label::kFall};
  const std::vector<Label> truth{Label::kFall, Label::kAdl, Label::kAdl, Label::kFall, Label::kFall};
  EXPECT_EQ(confusion(pred, truth), (ConfusionMatrix{2, 1, 1, 1}));
  EXPECT_THROW(confusion(pred, std::span(truth).first(4)), Error);
}

TEST(Metrics, AverageOfPublishedColumns) {
  const double acc[] = {100, 98.17, 96.33, 97.25, 97.25};
  const double fpr[] = {0, 4.17, 8.33, 6.25, 6.25};
  std::vector<MetricsReport> rows(5);
  for (std::size_t i = 0; i < 5; ++i) {
    rows[i].accuracy = acc[i];
    rows[i].fpr = fpr[i];
  }
  const auto avg = average_metrics(rows);
  EXPECT_EQ(round2(*avg.accuracy), 97.80);
  EXPECT_EQ(round2(*avg.fpr), 5.00);
  EXPECT_FALSE(avg.sensitivity.has_value());
  EXPECT_THROW(average_metrics({}), Error);
}

TEST(Metrics, AverageSkipsUndefined) {
  std::vector<MetricsReport> rows(3);
  rows[0].precision = 50.0;
  rows[2].precision = 100.0;
  EXPECT_EQ(*average_metrics(rows).precision, 75.0);
}

TEST(Metrics, Round2) {
  EXPECT_EQ(round2(66.666666), 66.67);
  EXPECT_EQ(round2(4.1666), 4.17);
  EXPECT_EQ(round2(-1.005), -1.0);
  EXPECT_EQ(round2(0.125), 0.13);
}

TEST(Aggregate, AnyFallChunkMakesAFall) {
  const std::vector<Label> calm{Label::kAdl, Label::kAdl};
  const std::vector<Label> one{Label::kAdl, Label::kFall, Label::kAdl};
  EXPECT_EQ(aggregate_video(calm), Label::kAdl);
  EXPECT_EQ(aggregate_video(one), Label::kFall);
  EXPECT_THROW(aggregate_video({}), Error);
}

TEST(Durations, SummaryExamples) {
  const std::vector<double> adl{4, 6, 5, 6};
  const auto a = summarize_durations(adl);
  EXPECT_EQ(a.count, 4u);
  EXPECT_EQ(a.min, 4);
  EXPECT_EQ(a.max, 6);
  EXPECT_EQ(a.mean, 5.25);
  EXPECT_EQ(a.median, 5.5);
  EXPECT_EQ(a.modes, (std::vector<double>{6}));
  const std::vector<double> fall{9, 10, 9, 10};
  const auto f = summarize_durations(fall);
  EXPECT_EQ(f.mean, 9.5);
  EXPECT_EQ(f.median, 9.5);
  EXPECT_EQ(f.modes, (std::vector<double>{9, 10}));
  EXPECT_THROW(summarize_durations({}), Error);
  EXPECT_THROW(summarize_durations(std::vector<double>{1.0, 0.0}), Error);
}

TEST(Durations, PerClassAndMissingClass) {
  std::vector<ingest::ManifestEntry> entries(3);
  entries[0].label = Label::kFall;
  const std::vector<double> d{2.0, 3.0, 5.0};
  const auto by = summarize_manifest(entries, d);
  EXPECT_EQ(by.at(Label::kFall).count, 1u);
  EXPECT_EQ(by.at(Label::kAdl).mean, 4.0);
  entries[0].label = Label::kAdl;
  EXPECT_THROW(summarize_manifest(entries, d), Error);
}

std::vector<FeatureRow> separable_rows(int videos_per_class, int chunks) {
  std::vector<FeatureRow> rows;
  for (int v = 0; v < 2 * videos_per_class; ++v) {
    const bool fall = v % 2 == 1;
    for (int c = 0; c < chunks; ++c) {
      rows.push_back({"v" + std::to_string(v), c, fall ? Label::kFall : Label::kAdl,
                      {fall ? 1.0f : -1.0f, 0.1f * static_cast<float>(c), static_cast<float>(v % 3)}});
    }
  }
  return rows;
}

TEST(CrossValidate, SeparableDataScoresPerfectly) {
  const auto rows = separable_rows(10, 2);
  CvOptions opts;
  const auto r = cross_validate(rows, opts);
  ASSERT_EQ(r.splits.size(), 5u);
  EXPECT_EQ(*r.average.accuracy, 100.0);
  for (const auto& s : r.splits) EXPECT_EQ(s.cm.total(), 12);
}

TEST(CrossValidate, ThreadCountInvariant) {
  const auto rows = separable_rows(8, 3);
  CvOptions one;
  one.group_by_video = true;
  CvOptions many = one;
  many.threads = 4;
  const auto a = cross_validate(rows, one), b = cross_validate(rows, many);
  ASSERT_EQ(a.splits.size(), b.splits.size());
  for (std::size_t i = 0; i < a.splits.size(); ++i) {
    EXPECT_EQ(a.splits[i].plan.test, b.splits[i].plan.test);
    EXPECT_EQ(a.splits[i].cm, b.splits[i].cm);
  }
  EXPECT_EQ(a.average, b.average);
}

TEST(Reports, CsvLayout) {
  test::TempDir dir;
  const auto r = cross_validate(separable_rows(10, 1), {});
  write_report_csv(r, dir / "r.csv");
  std::ifstream in(dir / "r.csv");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 7u);
  EXPECT_EQ(lines[0], "split,sensitivity,specificity,precision,accuracy,f1,fpr,fnr");
  EXPECT_EQ(lines[1].substr(0, 2), "1,");
  EXPECT_EQ(lines[6], "average,100.00,100.00,100.00,100.00,100.00,0.00,0.00");
}

}  // namespace
}  // namespace falldet::eval
