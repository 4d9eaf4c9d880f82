#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dirnn {

struct dimension_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense row-major float32 buffer plus a shape. Storage is float32 throughout;
// every reduction that feeds a decision (dot, norms, losses, accuracy means)
// accumulates in double.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(numel_of(shape_), 0.0f);
  }

  Tensor(std::vector<int> shape, std::vector<float> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != numel_of(shape_))
      throw dimension_error("Tensor: data size does not match shape");
  }

  static std::size_t numel_of(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d <= 0) throw dimension_error("Tensor: non-positive dimension");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  const std::vector<int>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  // (i, j) into a [rows, cols] tensor.
  float& at2(int i, int j) {
    return data_[static_cast<std::size_t>(i) * shape_[1] + j];
  }
  float at2(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * shape_[1] + j];
  }

  // (c, y, x) into a [channels, height, width] tensor.
  float& at3(int c, int y, int x) {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }
  float at3(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }

  void fill(float v) { data_.assign(data_.size(), v); }

  Tensor reshaped(std::vector<int> shape) const {
    if (numel_of(shape) != data_.size())
      throw dimension_error("Tensor: reshape changes element count");
    return Tensor(std::move(shape), data_);
  }

 private:
  std::vector<int> shape_;
  std::vector<float> data_;
};

inline bool same_shape(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape();
}

inline std::string shape_string(const std::vector<int>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

inline double dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw dimension_error("dot: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

inline double l2_norm(const Tensor& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += static_cast<double>(a[i]) * static_cast<double>(a[i]);
  return std::sqrt(acc);
}

inline double l1_norm(const Tensor& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(static_cast<double>(a[i]));
  return acc;
}

inline double linf_norm(const Tensor& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a[i])));
  return m;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  if (!same_shape(a, b)) throw dimension_error("sub: shape mismatch");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  if (!same_shape(a, b)) throw dimension_error("add: shape mismatch");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

// x += s * d, in place.
inline void axpy(Tensor& x, float s, const Tensor& d) {
  if (!same_shape(x, d)) throw dimension_error("axpy: shape mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += s * d[i];
}

inline void scale(Tensor& x, float s) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= s;
}

// Pixel-range clamp used after every image-domain transformation.
inline void clamp01(Tensor& x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0f) x[i] = 0.0f;
    if (x[i] > 1.0f) x[i] = 1.0f;
  }
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw dimension_error("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  return m;
}

}  // namespace dirnn
