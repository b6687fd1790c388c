#ifndef MI2GAN_CORE_TENSOR_HPP
#define MI2GAN_CORE_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <vector>

#include "mi2gan/core/common.hpp"

namespace mi2gan {

// Dense contiguous n-d array in row-major (NCHW for rank 4) layout.
// Copies are shallow (shared storage); use clone() for a deep copy.
// Ops never mutate their inputs; only optimizers write through data().
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
    numel_ = count(shape_);
    data_ = std::shared_ptr<T[]>(new T[numel_]());
  }

  // Allocation without zero-fill, for outputs that overwrite every element.
  static Tensor uninitialized(std::vector<int64_t> shape) {
    Tensor t;
    t.shape_ = std::move(shape);
    t.numel_ = count(t.shape_);
    t.data_ = std::shared_ptr<T[]>(new T[t.numel_]);
    return t;
  }

  static Tensor full(std::vector<int64_t> shape, T value) {
    Tensor t = uninitialized(std::move(shape));
    std::fill(t.data(), t.data() + t.numel_, value);
    return t;
  }

  static Tensor from_vector(std::vector<int64_t> shape, const std::vector<T>& values) {
    Tensor t = uninitialized(std::move(shape));
    check(t.numel_ == static_cast<int64_t>(values.size()),
          "from_vector: shape " + shape_str(t.shape_) + " does not match value count");
    std::copy(values.begin(), values.end(), t.data());
    return t;
  }

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t rank() const { return static_cast<int64_t>(shape_.size()); }
  int64_t dim(int64_t i) const { return shape_[static_cast<size_t>(i)]; }
  int64_t numel() const { return numel_; }
  bool empty() const { return numel_ == 0; }

  T* data() { return data_.get(); }
  const T* data() const { return data_.get(); }

  T& operator[](int64_t i) { return data_[i]; }
  const T& operator[](int64_t i) const { return data_[i]; }

  // Rank-4 helpers (n, c, h, w).
  int64_t index4(int64_t n, int64_t c, int64_t y, int64_t x) const {
    return ((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x;
  }
  T& at4(int64_t n, int64_t c, int64_t y, int64_t x) { return data_[index4(n, c, y, x)]; }
  const T& at4(int64_t n, int64_t c, int64_t y, int64_t x) const {
    return data_[index4(n, c, y, x)];
  }

  // Rank-2 helpers (n, f).
  T& at2(int64_t i, int64_t j) { return data_[i * shape_[1] + j]; }
  const T& at2(int64_t i, int64_t j) const { return data_[i * shape_[1] + j]; }

  Tensor clone() const {
    Tensor t = uninitialized(shape_);
    std::copy(data(), data() + numel_, t.data());
    return t;
  }

  // Same storage, new shape with equal element count.
  Tensor reshaped(std::vector<int64_t> shape) const {
    check(count(shape) == numel_, "reshaped: shape " + shape_str(shape) +
                                      " incompatible with numel " + std::to_string(numel_));
    Tensor t;
    t.shape_ = std::move(shape);
    t.numel_ = numel_;
    t.data_ = data_;
    return t;
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  bool shares_storage(const Tensor& other) const { return data_ == other.data_; }

  void fill(T value) { std::fill(data(), data() + numel_, value); }

  static int64_t count(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
      check(d >= 0, "negative dimension in shape " + shape_str(shape));
      n *= d;
    }
    return shape.empty() ? 0 : n;
  }

 private:
  std::vector<int64_t> shape_;
  int64_t numel_ = 0;
  std::shared_ptr<T[]> data_;
};

template <typename T>
bool all_finite(const Tensor<T>& t) {
  const T* p = t.data();
  for (int64_t i = 0; i < t.numel(); ++i) {
    if (!std::isfinite(static_cast<double>(p[i]))) return false;
  }
  return true;
}

template <typename T>
bool bitwise_equal(const Tensor<T>& a, const Tensor<T>& b) {
  if (!a.same_shape(b)) return false;
  const T* pa = a.data();
  const T* pb = b.data();
  for (int64_t i = 0; i < a.numel(); ++i) {
    if (pa[i] != pb[i]) return false;
  }
  return true;
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  check(a.same_shape(b), "max_abs_diff: shape mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
  double m = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  }
  return m;
}

}  // namespace mi2gan

#endif
