#include <gtest/gtest.h>

#include "falldet/error.hpp"
#include "falldet/nn_ops.hpp"
#include "support/oracles.hpp"

namespace falldet::nn {
namespace {

using test::rel_error;

TEST(ConvShape, PaddedCubeKeepsExtents) {
  EXPECT_EQ(conv_output_shape({3, 16, 112, 112}, {}, 64), (Shape{64, 16, 112, 112}));
  EXPECT_EQ(conv_output_shape({512, 1, 4, 4}, {}, 512), (Shape{512, 1, 4, 4}));
}

TEST(ConvShape, EmptyOutputIsAnError) {
  const Conv3dParams p{{3, 3, 3}, {1, 1, 1}, {0, 0, 0}};
  EXPECT_THROW(conv_output_shape({1, 2, 5, 5}, p, 1), Error);
  EXPECT_THROW(conv_output_shape({1, 5, 5, 5}, {}, 0), Error);
}

TEST(PoolShape, C3dReductions) {
  const Pool3dParams pool1{{1, 2, 2}, {1, 2, 2}, false};
  const Pool3dParams pool2{{2, 2, 2}, {2, 2, 2}, false};
  const Pool3dParams pool5{{2, 2, 2}, {2, 2, 2}, true};
  EXPECT_EQ(pool_output_shape({64, 16, 112, 112}, pool1), (Shape{64, 16, 56, 56}));
  EXPECT_EQ(pool_output_shape({128, 16, 56, 56}, pool2), (Shape{128, 8, 28, 28}));
  EXPECT_EQ(pool_output_shape({512, 2, 7, 7}, pool5), (Shape{512, 1, 4, 4}));
  EXPECT_EQ(pool_output_shape({512, 2, 7, 7}, pool2), (Shape{512, 1, 3, 3}));
}

TEST(PoolShape, CeilNeverStartsPastTheEnd) {
  // x=5, k=2, s=3: ceil((5-2)/3)+1 = 2 and the second window starts at 3 < 5.
  EXPECT_EQ(pool_output_shape({1, 5, 5, 5}, {{2, 2, 2}, {3, 3, 3}, true}), (Shape{1, 2, 2, 2}));
  // x=4, k=1, s=3: ceil(3/3)+1 = 2, second window starts at 3 < 4.
  EXPECT_EQ(pool_output_shape({1, 4, 4, 4}, {{1, 1, 1}, {3, 3, 3}, true}), (Shape{1, 2, 2, 2}));
  // x=3, k=2, s=2: ceil(1/2)+1 = 2, second window starts at 2 < 3.
  EXPECT_EQ(pool_output_shape({1, 3, 3, 3}, {{2, 2, 2}, {2, 2, 2}, true}), (Shape{1, 2, 2, 2}));
}

TEST(Conv3d, BothEnginesMatchOracleOnRandomCases) {
  Rng rng(11);
  for (int i = 0; i < 60; ++i) {
    const auto c = test::random_conv_case(rng);
    Shape expected_shape;
    const auto ref = test::conv3d_oracle(c.input, c.weights, c.bias, c.params, &expected_shape);
    const auto naive = conv3d_naive(c.input, c.weights, c.bias, c.params);
    const auto opt = conv3d_optimized(c.input, c.weights, c.bias, c.params, 1 + i % 3);
    ASSERT_EQ(naive.shape(), expected_shape) << "case " << i;
    ASSERT_EQ(opt.shape(), expected_shape) << "case " << i;
    EXPECT_LE(rel_error(naive.data(), ref), 1e-5) << "case " << i;
    EXPECT_LE(rel_error(opt.data(), ref), 1e-5) << "case " << i;
  }
}

TEST(Conv3d, DeltaKernelCopiesInput) {
  Rng rng(3);
  const auto x = test::random_tensor({2, 4, 5, 6}, rng);
  // Identity mapping channel c -> c through the centre tap.
  Tensor w({2, 2, 3, 3, 3}, 0.0f);
  w.at({0, 0, 1, 1, 1}) = 1.0f;
  w.at({1, 1, 1, 1, 1}) = 1.0f;
  const std::vector<float> bias{0.0f, 0.0f};
  for (auto engine : {ConvEngine::kNaive, ConvEngine::kOptimized}) {
    const auto y = conv3d(x, w, bias, {}, {engine, 2});
    EXPECT_EQ(y, x);
  }
}

TEST(Conv3d, LinearInInput) {
  Rng rng(4);
  const auto a = test::random_tensor({3, 3, 6, 7}, rng);
  const auto b = test::random_tensor({3, 3, 6, 7}, rng);
  const auto w = test::random_tensor({5, 3, 3, 3, 3}, rng);
  const std::vector<float> zero(5, 0.0f);
  Tensor sum(a.shape(), 0.0f);
  for (std::size_t i = 0; i < sum.size(); ++i) sum.data()[i] = 2.0f * a.data()[i] - b.data()[i];
  const auto ya = conv3d(a, w, zero, {});
  const auto yb = conv3d(b, w, zero, {});
  const auto ys = conv3d(sum, w, zero, {});
  std::vector<float> combo(ya.size());
  for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = 2.0f * ya.data()[i] - yb.data()[i];
  EXPECT_LE(rel_error(ys.data(), combo), 1e-5);
}

TEST(Conv3d, ThreadCountDoesNotChangeBits) {
  Rng rng(5);
  const auto c = test::random_conv_case(rng);
  const auto one = conv3d_optimized(c.input, c.weights, c.bias, c.params, 1);
  const auto four = conv3d_optimized(c.input, c.weights, c.bias, c.params, 4);
  EXPECT_EQ(one, four);
}

TEST(Conv3d, OperandMismatches) {
  const Tensor x({3, 4, 4, 4}, 1.0f);
  const Tensor w({8, 2, 3, 3, 3}, 1.0f);
  const std::vector<float> bias(8, 0.0f);
  EXPECT_THROW(conv3d(x, w, bias, {}), Error);
  const Tensor w3({8, 3, 3, 3, 3}, 1.0f);
  EXPECT_THROW(conv3d(x, w3, std::vector<float>(7), {}), Error);
  EXPECT_THROW(conv3d(Tensor({3, 4, 4}, 1.0f), w3, bias, {}), Error);
}

TEST(MaxPool3d, MatchesOracleExactly) {
  Rng rng(12);
  for (int i = 0; i < 60; ++i) {
    const auto c = test::random_pool_case(rng);
    Shape expected_shape;
    const auto ref = test::maxpool3d_oracle(c.input, c.params, &expected_shape);
    const auto out = maxpool3d(c.input, c.params, 1 + i % 2);
    ASSERT_EQ(out.shape(), expected_shape) << "case " << i;
    EXPECT_TRUE(std::equal(ref.begin(), ref.end(), out.data().begin())) << "case " << i;
  }
}

TEST(MaxPool3d, CeilModeClipsTheLastWindow) {
  // One channel, depth 2, 7x7: value = 10*h + w in depth 0, negated in depth 1.
  Tensor x({1, 2, 7, 7}, 0.0f);
  for (std::int64_t h = 0; h < 7; ++h)
    for (std::int64_t w = 0; w < 7; ++w) {
      x.at({0, 0, h, w}) = static_cast<float>(10 * h + w);
      x.at({0, 1, h, w}) = -static_cast<float>(10 * h + w);
    }
  const auto y = maxpool3d(x, {{2, 2, 2}, {2, 2, 2}, true});
  ASSERT_EQ(y.shape(), (Shape{1, 1, 4, 4}));
  EXPECT_EQ(y.at({0, 0, 0, 0}), 11.0f);
  // Last window covers only row 6 / column 6.
  EXPECT_EQ(y.at({0, 0, 3, 3}), 66.0f);
  EXPECT_EQ(y.at({0, 0, 3, 0}), 61.0f);
  EXPECT_EQ(y.at({0, 0, 0, 3}), 16.0f);
}

TEST(MaxPool3d, AllNegativeWindowIsNotZero) {
  const Tensor x({1, 1, 3, 3}, -2.5f);
  const auto y = maxpool3d(x, {{1, 2, 2}, {1, 2, 2}, true});
  for (float v : y.data()) EXPECT_EQ(v, -2.5f);
}

TEST(Relu, ClampsNegatives) {
  const Tensor x({4}, std::vector<float>{-1.0f, 0.0f, 2.0f, -0.0f});
  const auto y = relu(x);
  EXPECT_EQ(y.data()[0], 0.0f);
  EXPECT_EQ(y.data()[2], 2.0f);
  Tensor z = x;
  relu_inplace(z);
  EXPECT_EQ(z, y);
}

TEST(Linear, MatchesOracleOnRandomCases) {
  Rng rng(13);
  for (int i = 0; i < 60; ++i) {
    const auto m = static_cast<std::int64_t>(1 + rng.below(40));
    const auto n = static_cast<std::int64_t>(1 + rng.below(300));
    const auto w = test::random_tensor({m, n}, rng);
    const auto x = test::random_values(static_cast<std::size_t>(n), rng);
    const auto b = test::random_values(static_cast<std::size_t>(m), rng);
    const auto ref = test::linear_oracle(x, w, b);
    const auto out = linear(x, w, b, 1 + i % 3);
    ASSERT_EQ(out.size(), ref.size());
    EXPECT_LE(rel_error(out, ref), 1e-5) << "case " << i;
  }
}

TEST(Linear, WidthMismatch) {
  const Tensor w({2, 3}, 1.0f);
  EXPECT_THROW(linear(std::vector<float>(4), w, std::vector<float>(2)), Error);
  EXPECT_THROW(linear(std::vector<float>(3), w, std::vector<float>(3)), Error);
}

}  // namespace
}  // namespace falldet::nn
