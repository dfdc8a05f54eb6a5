#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gmx/numerics/error.hpp"

namespace gmx {

using Shape = std::vector<std::size_t>;

inline std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

inline std::size_t shape_volume(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

/// Dense row-major tensor of doubles.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape, double fill = 0.0) : shape_(std::move(shape)) {
    check_shape();
    data_.assign(shape_volume(shape_), fill);
  }

  Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape();
    if (data_.size() != shape_volume(shape_)) {
      throw DimensionError("tensor: data length " + std::to_string(data_.size()) +
                           " does not match shape " + shape_string(shape_));
    }
  }

  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return Tensor({rows, cols}, fill);
  }

  static Tensor vector(std::vector<double> values) {
    const std::size_t n = values.size();
    return Tensor({n}, std::move(values));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  std::size_t rows() const { return require_rank2().first; }
  std::size_t cols() const { return require_rank2().second; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * shape_[1] + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * shape_[1] + c]; }

  std::span<double> row(std::size_t r) {
    const std::size_t c = cols();
    return std::span<double>(data_).subspan(r * c, c);
  }
  std::span<const double> row(std::size_t r) const {
    const std::size_t c = cols();
    return std::span<const double>(data_).subspan(r * c, c);
  }

  /// Same data viewed under a new shape of equal volume.
  Tensor reshaped(Shape shape) const {
    Tensor out;
    out.shape_ = std::move(shape);
    out.check_shape();
    if (shape_volume(out.shape_) != data_.size()) {
      throw DimensionError("reshape: " + shape_string(shape_) + " -> " + shape_string(out.shape_));
    }
    out.data_ = data_;
    return out;
  }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  void check_shape() const {
    for (std::size_t d : shape_) {
      if (d == 0) throw DimensionError("tensor: zero dimension in shape " + shape_string(shape_));
    }
  }

  std::pair<std::size_t, std::size_t> require_rank2() const {
    if (shape_.size() != 2) throw DimensionError("expected a matrix, got shape " + shape_string(shape_));
    return {shape_[0], shape_[1]};
  }

  Shape shape_;
  std::vector<double> data_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b, std::string_view op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

inline void require_finite(const Tensor& t, std::string_view op) {
  if (!t.all_finite()) throw NumericError(std::string(op) + ": produced a non-finite value");
}

inline void require_finite(double v, std::string_view op) {
  if (!std::isfinite(v)) throw NumericError(std::string(op) + ": produced a non-finite value");
}

/// out = a * b for matrices a [n,k] and b [k,m].
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
    throw DimensionError("matmul: incompatible shapes " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor out = Tensor::matrix(n, m);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = po + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = pa[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = pb + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += aip * brow[j];
    }
  }
  return out;
}

/// Stacks rank-1 payloads (or any tensors, flattened) into a [n, d] matrix.
inline Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) throw DimensionError("stack_rows: no rows");
  const std::size_t d = rows.front().size();
  Tensor out = Tensor::matrix(rows.size(), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) {
      throw DimensionError("stack_rows: row " + std::to_string(i) + " has " +
                           std::to_string(rows[i].size()) + " values, expected " + std::to_string(d));
    }
    std::copy(rows[i].data().begin(), rows[i].data().end(), out.row(i).begin());
  }
  return out;
}

/// Rows `indices` of a matrix, in order.
inline Tensor gather_rows(const Tensor& m, std::span<const std::size_t> indices) {
  if (indices.empty()) throw DimensionError("gather_rows: no indices");
  Tensor out = Tensor::matrix(indices.size(), m.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = m.row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

inline Tensor concat_rows(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("concat_rows: " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
  }
  std::vector<double> data(a.values());
  data.insert(data.end(), b.values().begin(), b.values().end());
  return Tensor({a.rows() + b.rows(), a.cols()}, std::move(data));
}

/// Elementwise mean of equally shaped tensors, computed as
/// first + mean(other - first) so that identical inputs give the input back
/// bit-for-bit.
inline Tensor elementwise_mean(std::span<const Tensor> items) {
  if (items.empty()) throw DimensionError("elementwise_mean: empty list");
  const Tensor& base = items.front();
  for (const Tensor& t : items) require_same_shape(base, t, "elementwise_mean");
  const double k = static_cast<double>(items.size());
  Tensor out = base;
  for (std::size_t j = 0; j < base.size(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 1; i < items.size(); ++i) acc += items[i][j] - base[j];
    out[j] = base[j] + acc / k;
  }
  return out;
}

/// Convex combination x + lambda*(g - x). lambda = 0 and 1 return the
/// endpoints exactly; interior results are clamped into [min(x,g), max(x,g)].
inline Tensor convex_mix(const Tensor& x, const Tensor& g, double lambda) {
  require_same_shape(x, g, "convex_mix");
  if (lambda == 0.0) return x;
  if (lambda == 1.0) return g;
  Tensor out = x;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double v = x[j] + lambda * (g[j] - x[j]);
    out[j] = std::clamp(v, std::min(x[j], g[j]), std::max(x[j], g[j]));
  }
  return out;
}

}  // namespace gmx
