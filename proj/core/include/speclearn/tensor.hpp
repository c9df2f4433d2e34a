#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "speclearn/errors.hpp"

namespace speclearn {

// Dense row-major tensor. Deliberately minimal: rank-checked element access
// and raw storage; all heavy math happens in module code on data().
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(numel(shape_)), T(0));
  }

  Tensor(std::initializer_list<int64_t> shape)
      : Tensor(std::vector<int64_t>(shape)) {}

  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<int64_t> shape, T v) {
    Tensor t(std::move(shape));
    t.fill(v);
    return t;
  }

  const std::vector<int64_t>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  T& at(int64_t a, int64_t b) { return data_[static_cast<size_t>(a * shape_[1] + b)]; }
  const T& at(int64_t a, int64_t b) const {
    return data_[static_cast<size_t>(a * shape_[1] + b)];
  }

  T& at(int64_t a, int64_t b, int64_t c) {
    return data_[static_cast<size_t>((a * shape_[1] + b) * shape_[2] + c)];
  }
  const T& at(int64_t a, int64_t b, int64_t c) const {
    return data_[static_cast<size_t>((a * shape_[1] + b) * shape_[2] + c)];
  }

  T& at(int64_t a, int64_t b, int64_t c, int64_t d) {
    return data_[static_cast<size_t>(((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d)];
  }
  const T& at(int64_t a, int64_t b, int64_t c, int64_t d) const {
    return data_[static_cast<size_t>(((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d)];
  }

  T& at(int64_t a, int64_t b, int64_t c, int64_t d, int64_t e) {
    return data_[static_cast<size_t>(
        (((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d) * shape_[4] + e)];
  }
  const T& at(int64_t a, int64_t b, int64_t c, int64_t d, int64_t e) const {
    return data_[static_cast<size_t>(
        (((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d) * shape_[4] + e)];
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  void require_shape(const std::vector<int64_t>& s, const char* what) const {
    if (shape_ != s) throw DimensionError(std::string("unexpected shape for ") + what);
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape_);
    for (int64_t i = 0; i < size(); ++i) out[i] = static_cast<U>(data_[static_cast<size_t>(i)]);
    return out;
  }

  static int64_t numel(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
      if (d < 0) throw DimensionError("negative tensor dimension");
      n *= d;
    }
    return n;
  }

 private:
  std::vector<int64_t> shape_;
  std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace speclearn
