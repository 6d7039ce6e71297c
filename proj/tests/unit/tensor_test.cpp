#include <gtest/gtest.h>

#include "falldet/error.hpp"
#include "falldet/tensor.hpp"

namespace falldet {
namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no falldet::Error thrown";
  return ErrorCode::kIo;
}

TEST(Tensor, NewFillsEveryElement) {
  const auto t = tensor_new({3, 16, 112, 112}, 0.0f);
  EXPECT_EQ(t.size(), 602112u);
  EXPECT_EQ(t.rank(), 4u);
  for (float v : t.data()) ASSERT_EQ(v, 0.0f);
}

TEST(Tensor, RejectsBadExtents) {
  EXPECT_EQ(code_of([] { tensor_new({0, 4}, 0.0f); }), ErrorCode::kInvalidShape);
  EXPECT_EQ(code_of([] { tensor_new({2, -1}, 0.0f); }), ErrorCode::kInvalidShape);
  EXPECT_EQ(code_of([] { tensor_new({}, 0.0f); }), ErrorCode::kInvalidShape);
  EXPECT_EQ(code_of([] { tensor_new({1, 1, 1, 1, 1, 1}, 0.0f); }), ErrorCode::kInvalidShape);
  EXPECT_EQ(code_of([] { Tensor({2, 2}, std::vector<float>(3)); }), ErrorCode::kShape);
}

TEST(Tensor, RowMajorOffsets) {
  Tensor t({2, 3, 4, 5}, 0.0f);
  const auto s = t.strides();
  EXPECT_EQ(s, (std::vector<std::size_t>{60, 20, 5, 1}));
  // Independent count: walk the index space in order and compare.
  std::size_t expected = 0;
  for (std::int64_t a = 0; a < 2; ++a)
    for (std::int64_t b = 0; b < 3; ++b)
      for (std::int64_t c = 0; c < 4; ++c)
        for (std::int64_t d = 0; d < 5; ++d) ASSERT_EQ(t.offset({a, b, c, d}), expected++);
  EXPECT_THROW(t.offset({2, 0, 0, 0}), Error);
  EXPECT_THROW(t.offset({0, 0, 0}), Error);
}

TEST(Tensor, ReshapeKeepsData) {
  std::vector<float> v(24);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(i);
  const Tensor t({2, 3, 4}, v);
  const auto r = reshape(t, {4, 6});
  EXPECT_EQ(r.shape(), (Shape{4, 6}));
  EXPECT_EQ(r.at({3, 5}), 23.0f);
  EXPECT_EQ(reshape(r, {2, 3, 4}), t);
  EXPECT_EQ(code_of([&] { reshape(t, {5, 5}); }), ErrorCode::kShape);
}

TEST(Tensor, ShapeToString) {
  EXPECT_EQ(shape_to_string({512, 1, 4, 4}), "(512,1,4,4)");
  EXPECT_EQ(shape_to_string({4096}), "(4096)");
}

}  // namespace
}  // namespace falldet
