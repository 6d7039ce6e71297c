#include <gtest/gtest.h>

#include <fstream>

#include "falldet/error.hpp"
#include "falldet/weight_store.hpp"
#include "support/temp_dir.hpp"

namespace falldet {
namespace {

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const std::filesystem::path& p, const std::vector<char>& bytes) {
  std::ofstream(p, std::ios::binary | std::ios::trunc).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ErrorCode load_code(const std::filesystem::path& p) {
  try {
    load_weights(p);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "load succeeded";
  return ErrorCode::kIo;
}

WeightStore sample_store() {
  WeightStore s;
  s.insert("a.weight", Tensor({2, 3}, std::vector<float>{1, 2, 3, 4, 5, 6}));
  s.insert("a.bias", Tensor({2}, std::vector<float>{-1.5f, 0.25f}));
  return s;
}

TEST(Crc32, KnownCheckValue) {
  // The standard CRC-32 check value for "123456789".
  const char text[] = "123456789";
  EXPECT_EQ(crc32(std::as_bytes(std::span(text, 9))), 0xCBF43926u);
  EXPECT_EQ(crc32({}), 0u);
}

TEST(WeightStore, RoundTrip) {
  test::TempDir dir;
  const auto store = sample_store();
  save_weights(store, dir / "w.c3dw");
  const auto loaded = load_weights(dir / "w.c3dw");
  ASSERT_EQ(loaded.size(), 2u);
  for (const auto& [name, blob] : store.blobs()) {
    EXPECT_EQ(loaded.at(name).shape, blob.shape);
    EXPECT_EQ(loaded.at(name).data, blob.data);
    EXPECT_EQ(loaded.at(name).crc, crc32_floats(blob.data));
  }
}

TEST(WeightStore, FileLayout) {
  test::TempDir dir;
  WeightStore s;
  s.insert("b", Tensor({1}, std::vector<float>{1.0f}));
  save_weights(s, dir / "w.c3dw");
  const auto bytes = slurp(dir / "w.c3dw");
  // magic 4 + version 4 + count 4 + name_len 2 + name 1 + ndim 1 + dim 4 + f32 4 + crc 4
  ASSERT_EQ(bytes.size(), 28u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "C3DW");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 1);
  EXPECT_EQ(bytes[12], 1);
  EXPECT_EQ(bytes[14], 'b');
}

TEST(WeightStore, TruncatedFileIsCorrupt) {
  test::TempDir dir;
  save_weights(sample_store(), dir / "w.c3dw");
  auto bytes = slurp(dir / "w.c3dw");
  bytes.resize(bytes.size() - 6);
  spit(dir / "w.c3dw", bytes);
  EXPECT_EQ(load_code(dir / "w.c3dw"), ErrorCode::kCorruption);
}

TEST(WeightStore, FlippedBitIsCorrupt) {
  test::TempDir dir;
  save_weights(sample_store(), dir / "w.c3dw");
  auto bytes = slurp(dir / "w.c3dw");
  bytes[bytes.size() - 8] ^= 0x01;  // inside the last float payload
  spit(dir / "w.c3dw", bytes);
  EXPECT_EQ(load_code(dir / "w.c3dw"), ErrorCode::kCorruption);
}

TEST(WeightStore, BadMagicAndVersion) {
  test::TempDir dir;
  save_weights(sample_store(), dir / "w.c3dw");
  auto bytes = slurp(dir / "w.c3dw");
  auto magic = bytes;
  magic[0] = 'X';
  spit(dir / "m.c3dw", magic);
  EXPECT_EQ(load_code(dir / "m.c3dw"), ErrorCode::kFormat);
  auto version = bytes;
  version[4] = 2;
  spit(dir / "v.c3dw", version);
  EXPECT_EQ(load_code(dir / "v.c3dw"), ErrorCode::kFormat);
}

TEST(WeightStore, TrailingBytesAreCorrupt) {
  test::TempDir dir;
  save_weights(sample_store(), dir / "w.c3dw");
  auto bytes = slurp(dir / "w.c3dw");
  bytes.push_back(0);
  spit(dir / "w.c3dw", bytes);
  EXPECT_EQ(load_code(dir / "w.c3dw"), ErrorCode::kCorruption);
}

TEST(WeightStore, MissingFile) {
  test::TempDir dir;
  EXPECT_EQ(load_code(dir / "none.c3dw"), ErrorCode::kIo);
}

}  // namespace
}  // namespace falldet
