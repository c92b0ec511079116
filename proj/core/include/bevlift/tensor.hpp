#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <vector>

#include "bevlift/errors.hpp"

namespace bevlift {

// Dense row-major multidimensional array. The float variant is the universal
// carrier for features, distributions and grids; the double variant backs
// gradient verification.
template <typename T>
class BasicTensor {
 public:
  BasicTensor() = default;

  explicit BasicTensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(checked_size(shape_), T{}) {}

  BasicTensor(std::vector<std::size_t> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != checked_size(shape_)) {
      throw ShapeMismatch("tensor data length does not match shape");
    }
  }

  static BasicTensor full(std::vector<std::size_t> shape, T value) {
    BasicTensor t(std::move(shape));
    for (auto& v : t.data_) v = value;
    return t;
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  T& operator[](std::size_t flat) { return data_[flat]; }
  const T& operator[](std::size_t flat) const { return data_[flat]; }

  std::size_t offset(std::initializer_list<std::size_t> idx) const {
    std::size_t flat = 0;
    std::size_t axis = 0;
    for (std::size_t i : idx) {
      flat = flat * shape_[axis] + i;
      ++axis;
    }
    return flat;
  }

  template <typename... Ix>
  T& at(Ix... idx) {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }
  template <typename... Ix>
  const T& at(Ix... idx) const {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  // Reinterpret as a new shape with the same element count.
  BasicTensor reshaped(std::vector<std::size_t> shape) const {
    BasicTensor t;
    if (checked_size(shape) != data_.size()) {
      throw ShapeMismatch("reshape changes element count");
    }
    t.shape_ = std::move(shape);
    t.data_ = data_;
    return t;
  }

  bool same_shape(const BasicTensor& other) const {
    return shape_ == other.shape_;
  }

 private:
  static std::size_t checked_size(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) {
      if (e == 0) throw ShapeMismatch("tensor extents must be positive");
      n *= e;
    }
    return shape.empty() ? 0 : n;
  }

  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

template <typename To, typename From>
BasicTensor<To> tensor_cast(const BasicTensor<From>& in) {
  BasicTensor<To> out(in.shape());
  auto src = in.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = static_cast<To>(src[i]);
  }
  return out;
}

}  // namespace bevlift
