#include "falldet/tensor.hpp"

#include <sstream>

#include "falldet/error.hpp"

namespace falldet {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

std::size_t checked_element_count(const Shape& shape) {
  if (shape.empty() || shape.size() > kMaxRank) {
    throw Error(ErrorCode::kInvalidShape,
                "tensor rank must be 1.." + std::to_string(kMaxRank) + ", got " + shape_to_string(shape));
  }
  std::size_t count = 1;
  for (auto extent : shape) {
    if (extent < 1) {
      throw Error(ErrorCode::kInvalidShape, "non-positive extent in " + shape_to_string(shape));
    }
    count *= static_cast<std::size_t>(extent);
  }
  return count;
}

Tensor::Tensor(Shape shape, float fill)
    : shape_(std::move(shape)), data_(checked_element_count(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_element_count(shape_) != data_.size()) {
    throw Error(ErrorCode::kShape, "data length " + std::to_string(data_.size()) +
                                       " does not match shape " + shape_to_string(shape_));
  }
}

std::vector<std::size_t> Tensor::strides() const {
  std::vector<std::size_t> s(shape_.size(), 1);
  for (std::size_t i = shape_.size(); i-- > 1;) {
    s[i - 1] = s[i] * static_cast<std::size_t>(shape_[i]);
  }
  return s;
}

std::size_t Tensor::offset(std::span<const std::int64_t> index) const {
  if (index.size() != shape_.size()) {
    throw Error(ErrorCode::kShape, "index rank " + std::to_string(index.size()) + " for tensor of shape " +
                                       shape_to_string(shape_));
  }
  std::size_t flat = 0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= shape_[i]) {
      throw Error(ErrorCode::kShape, "index out of range on axis " + std::to_string(i));
    }
    flat = flat * static_cast<std::size_t>(shape_[i]) + static_cast<std::size_t>(index[i]);
  }
  return flat;
}

Tensor Tensor::reshaped(const Shape& new_shape) const& {
  Tensor copy = *this;
  return std::move(copy).reshaped(new_shape);
}

Tensor Tensor::reshaped(const Shape& new_shape) && {
  if (checked_element_count(new_shape) != data_.size()) {
    throw Error(ErrorCode::kShape, "cannot reshape " + shape_to_string(shape_) + " to " +
                                       shape_to_string(new_shape));
  }
  shape_ = new_shape;
  return std::move(*this);
}

Tensor tensor_new(const Shape& shape, float fill) { return Tensor(shape, fill); }

Tensor reshape(const Tensor& t, const Shape& new_shape) { return t.reshaped(new_shape); }

}  // namespace falldet
