#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "fieldcast/core/error.hpp"

namespace fieldcast::nn {

// Dense row-major n-d array. Always contiguous, value semantics.
template <class T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int64_t> shape)
      : shape_(std::move(shape)), data_(checked_numel(shape_), T(0)) {}

  Tensor(std::vector<int64_t> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    require(static_cast<int64_t>(data_.size()) == checked_numel(shape_),
            "Tensor: data size does not match shape");
  }

  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<int64_t> shape, T v) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
  }

  static Tensor scalar(T v) { return Tensor({}, std::vector<T>{v}); }

  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  int rank() const { return static_cast<int>(shape_.size()); }
  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t size(int dim) const { return shape_.at(static_cast<size_t>(dim)); }
  bool defined() const { return !data_.empty() || !shape_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  T& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  T& at(int64_t i, int64_t j) { return data_[static_cast<size_t>(i * shape_[1] + j)]; }
  const T& at(int64_t i, int64_t j) const { return data_[static_cast<size_t>(i * shape_[1] + j)]; }

  T& at(int64_t c, int64_t h, int64_t w) {
    return data_[static_cast<size_t>((c * shape_[1] + h) * shape_[2] + w)];
  }
  const T& at(int64_t c, int64_t h, int64_t w) const {
    return data_[static_cast<size_t>((c * shape_[1] + h) * shape_[2] + w)];
  }

  T& at(int64_t c, int64_t t, int64_t h, int64_t w) {
    return data_[static_cast<size_t>(((c * shape_[1] + t) * shape_[2] + h) * shape_[3] + w)];
  }
  const T& at(int64_t c, int64_t t, int64_t h, int64_t w) const {
    return data_[static_cast<size_t>(((c * shape_[1] + t) * shape_[2] + h) * shape_[3] + w)];
  }

  // Same data, new shape; numel must match.
  Tensor reshaped(std::vector<int64_t> shape) const {
    Tensor t;
    t.shape_ = std::move(shape);
    require(checked_numel(t.shape_) == numel(), "Tensor::reshaped: numel mismatch");
    t.data_ = data_;
    return t;
  }

  template <class U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.size());
    for (size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return Tensor<U>(shape_, std::move(out));
  }

  void add_(const Tensor& other) {
    require(other.numel() == numel(), "Tensor::add_: numel mismatch");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  }

  void scale_(T s) {
    for (auto& v : data_) v *= s;
  }

  std::string shape_str() const {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
    os << ")";
    return os.str();
  }

 private:
  static int64_t checked_numel(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t s : shape) {
      require(s >= 0, "Tensor: negative dimension");
      n *= s;
    }
    return n;
  }

  std::vector<int64_t> shape_;
  std::vector<T> data_;
};

template <class T>
bool same_shape(const Tensor<T>& a, const Tensor<T>& b) {
  return a.shape() == b.shape();
}

}  // namespace fieldcast::nn
