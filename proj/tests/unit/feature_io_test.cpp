#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "falldet/error.hpp"
#include "falldet/feature_io.hpp"
#include "support/temp_dir.hpp"

namespace falldet {
namespace {

TEST(FeatureIo, ShortestFloatsRoundTrip) {
  test::TempDir dir;
  const FeatureRow a{"vid_1", 0, ingest::Label::kFall, {0.1f, 1e-7f, 3.4028235e38f, 0.0f}};
  const FeatureRow b{"vid_1", 1, ingest::Label::kFall, {-2.5f, 1.0f / 3.0f, 7.0f, 1e-30f}};
  {
    std::ofstream out(dir / "f.csv");
    write_feature_header(out, 4);
    write_feature_row(out, a);
    write_feature_row(out, b);
  }
  std::ifstream in(dir / "f.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "video_id,chunk_index,label,f0,f1,f2,f3");
  EXPECT_EQ(first, "vid_1,0,fall,0.1,1e-07,3.4028235e+38,0");
  const auto rows = read_features(dir / "f.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].values, b.values);
  EXPECT_EQ(rows[1].chunk_index, 1);
}

TEST(FeatureIo, RaggedAndEmpty) {
  test::TempDir dir;
  std::ofstream(dir / "r.csv") << "video_id,chunk_index,label,f0,f1\nv,0,adl,1,2\nv,1,adl,1\n";
  EXPECT_THROW(read_features(dir / "r.csv"), Error);
  std::ofstream(dir / "e.csv") << "video_id,chunk_index,label,f0\n";
  try {
    read_features(dir / "e.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
}

TEST(FeatureIo, ScanIgnoresTornLine) {
  test::TempDir dir;
  const std::string good = "video_id,chunk_index,label,f0\nv1,0,adl,1\nv2,0,fall,2\n";
  std::ofstream(dir / "t.csv") << good << "v3,0,fa";
  const auto scan = scan_feature_file(dir / "t.csv");
  EXPECT_EQ(scan.width, 1u);
  EXPECT_EQ(scan.video_ids, (std::set<std::string>{"v1", "v2"}));
  EXPECT_EQ(scan.complete_bytes, good.size());
  EXPECT_EQ(scan_feature_file(dir / "missing.csv").width, 0u);
}

}  // namespace
}  // namespace falldet
