#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "got/error.hpp"

namespace got {

/// Dense row-major matrix. Double everywhere gradients are verified;
/// uint8_t serves as the adjacency-mask scalar.
template <typename T = double>
class Matrix {
  static_assert(std::is_arithmetic_v<T>);

 public:
  Matrix() = default;

  Matrix(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
    assert(rows >= 0 && cols >= 0);
  }

  static Matrix zeros(int rows, int cols) { return Matrix(rows, cols, T{}); }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<T>> rows) {
    Matrix m(static_cast<int>(rows.size()),
             rows.size() ? static_cast<int>(rows.begin()->size()) : 0);
    int i = 0;
    for (const auto& row : rows) {
      assert(static_cast<int>(row.size()) == m.cols_);
      int j = 0;
      for (T v : row) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  T& operator()(int i, int j) {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<size_t>(i) * cols_ + j];
  }
  const T& operator()(int i, int j) const {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<size_t>(i) * cols_ + j];
  }

  T* row_ptr(int i) { return data_.data() + static_cast<size_t>(i) * cols_; }
  const T* row_ptr(int i) const { return data_.data() + static_cast<size_t>(i) * cols_; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T& operator[](size_t k) { return data_[k]; }
  const T& operator[](size_t k) const { return data_[k]; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  std::string shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

template <typename T>
inline bool all_finite(const Matrix<T>& m) {
  for (size_t k = 0; k < m.size(); ++k)
    if (!std::isfinite(m[k])) return false;
  return true;
}

namespace detail {
inline void require(bool ok, const std::string& msg) {
  if (!ok) throw DimensionError(msg);
}
}  // namespace detail

/// out = a * b
template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  detail::require(a.cols() == b.rows(),
                  "matmul: lhs " + a.shape_str() + " incompatible with rhs " + b.shape_str());
  Matrix<T> out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    T* orow = out.row_ptr(i);
    for (int k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      if (aik == T{}) continue;
      const T* brow = b.row_ptr(k);
      for (int j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

/// out = a * b^T
template <typename T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b) {
  detail::require(a.cols() == b.cols(),
                  "matmul_nt: lhs " + a.shape_str() + " incompatible with rhs " + b.shape_str());
  Matrix<T> out(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    const T* arow = a.row_ptr(i);
    for (int j = 0; j < b.rows(); ++j) {
      const T* brow = b.row_ptr(j);
      T acc{};
      for (int k = 0; k < a.cols(); ++k) acc += arow[k] * brow[k];
      out(i, j) = acc;
    }
  }
  return out;
}

/// out = a^T * b
template <typename T>
Matrix<T> matmul_tn(const Matrix<T>& a, const Matrix<T>& b) {
  detail::require(a.rows() == b.rows(),
                  "matmul_tn: lhs " + a.shape_str() + " incompatible with rhs " + b.shape_str());
  Matrix<T> out(a.cols(), b.cols());
  for (int k = 0; k < a.rows(); ++k) {
    const T* arow = a.row_ptr(k);
    const T* brow = b.row_ptr(k);
    for (int i = 0; i < a.cols(); ++i) {
      const T aki = arow[i];
      if (aki == T{}) continue;
      T* orow = out.row_ptr(i);
      for (int j = 0; j < b.cols(); ++j) orow[j] += aki * brow[j];
    }
  }
  return out;
}

template <typename T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

template <typename T>
Matrix<T> add(const Matrix<T>& a, const Matrix<T>& b) {
  detail::require(a.same_shape(b), "add: " + a.shape_str() + " vs " + b.shape_str());
  Matrix<T> out = a;
  for (size_t k = 0; k < out.size(); ++k) out[k] += b[k];
  return out;
}

template <typename T>
Matrix<T> sub(const Matrix<T>& a, const Matrix<T>& b) {
  detail::require(a.same_shape(b), "sub: " + a.shape_str() + " vs " + b.shape_str());
  Matrix<T> out = a;
  for (size_t k = 0; k < out.size(); ++k) out[k] -= b[k];
  return out;
}

template <typename T>
Matrix<T> hadamard(const Matrix<T>& a, const Matrix<T>& b) {
  detail::require(a.same_shape(b), "hadamard: " + a.shape_str() + " vs " + b.shape_str());
  Matrix<T> out = a;
  for (size_t k = 0; k < out.size(); ++k) out[k] *= b[k];
  return out;
}

template <typename T>
Matrix<T> scale(const Matrix<T>& a, T s) {
  Matrix<T> out = a;
  for (size_t k = 0; k < out.size(); ++k) out[k] *= s;
  return out;
}

// ---------------------------------------------------------------------------
// Activations. GELU uses the tanh approximation; LeakyReLU keeps the slope
// explicit (0.2 in the graph attention layer).
// ---------------------------------------------------------------------------

template <typename T>
inline T leaky_relu(T x, T slope) {
  return x >= T{0} ? x : slope * x;
}

template <typename T>
inline T leaky_relu_grad(T x, T slope) {
  return x >= T{0} ? T{1} : slope;
}

namespace detail {
template <typename T>
inline constexpr T kGeluScale = T{0.7978845608028654};  // sqrt(2/pi)
template <typename T>
inline constexpr T kGeluCubic = T{0.044715};
}  // namespace detail

template <typename T>
inline T gelu(T x) {
  const T u = detail::kGeluScale<T> * (x + detail::kGeluCubic<T> * x * x * x);
  return T{0.5} * x * (T{1} + std::tanh(u));
}

template <typename T>
inline T gelu_grad(T x) {
  const T u = detail::kGeluScale<T> * (x + detail::kGeluCubic<T> * x * x * x);
  const T t = std::tanh(u);
  const T du = detail::kGeluScale<T> * (T{1} + T{3} * detail::kGeluCubic<T> * x * x);
  return T{0.5} * (T{1} + t) + T{0.5} * x * (T{1} - t * t) * du;
}

template <typename T>
inline T sigmoid(T x) {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

/// Softmax over the unmasked entries only. Masked-out entries are exactly
/// zero in the result; the unmasked entries are positive and sum to one.
/// Throws EmptySupportError when no entry survives the mask.
template <typename T>
std::vector<T> softmax_masked(const std::vector<T>& scores, const std::vector<uint8_t>& mask) {
  if (scores.size() != mask.size())
    throw DimensionError("softmax_masked: scores size " + std::to_string(scores.size()) +
                         " vs mask size " + std::to_string(mask.size()));
  T max_score = -std::numeric_limits<T>::infinity();
  bool any = false;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (mask[i]) {
      any = true;
      max_score = std::max(max_score, scores[i]);
    }
  }
  if (!any) throw EmptySupportError("softmax_masked: mask has empty support");
  std::vector<T> out(scores.size(), T{});
  T denom{};
  for (size_t i = 0; i < scores.size(); ++i) {
    if (mask[i]) {
      out[i] = std::exp(scores[i] - max_score);
      denom += out[i];
    }
  }
  for (size_t i = 0; i < scores.size(); ++i)
    if (mask[i]) out[i] /= denom;
  return out;
}

/// Deterministic RNG: fixed engine plus a hand-rolled Box-Muller transform,
/// so seeded draws are identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi) {
    assert(hi >= lo);
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(gen_() % span);
  }

  uint64_t next_u64() { return gen_(); }

  template <typename T = double>
  Matrix<T> randn(int rows, int cols, T stddev = T{1}) {
    Matrix<T> m(rows, cols);
    for (size_t k = 0; k < m.size(); ++k) m[k] = static_cast<T>(normal()) * stddev;
    return m;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace got
