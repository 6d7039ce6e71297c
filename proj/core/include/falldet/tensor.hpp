#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace falldet {

/// Axis extents, outermost first. Signed so that callers can pass
/// computed (possibly non-positive) extents and get a proper error.
using Shape = std::vector<std::int64_t>;

inline constexpr std::size_t kMaxRank = 5;

std::string shape_to_string(const Shape& shape);

/// Product of extents. Throws kInvalidShape for rank 0, rank > 5 or any
/// extent < 1.
std::size_t checked_element_count(const Shape& shape);

/// Dense row-major float32 array of rank 1..5. Video activations use
/// (channels, depth, height, width); conv weights add a leading
/// output-channel axis.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, float fill);
  Tensor(Shape shape, std::vector<float> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::int64_t dim(std::size_t axis) const { return shape_.at(axis); }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  /// Row-major strides in elements.
  std::vector<std::size_t> strides() const;
  std::size_t offset(std::span<const std::int64_t> index) const;
  std::size_t offset(std::initializer_list<std::int64_t> index) const {
    return offset(std::span<const std::int64_t>(index.begin(), index.size()));
  }

  float at(std::initializer_list<std::int64_t> index) const { return data_[offset(index)]; }
  float& at(std::initializer_list<std::int64_t> index) { return data_[offset(index)]; }

  /// Same data, new extents. Throws kShape on element-count mismatch.
  Tensor reshaped(const Shape& new_shape) const&;
  Tensor reshaped(const Shape& new_shape) &&;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

Tensor tensor_new(const Shape& shape, float fill);
Tensor reshape(const Tensor& t, const Shape& new_shape);

}  // namespace falldet
