#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "gmx/numerics/error.hpp"
#include "gmx/numerics/tensor.hpp"

namespace gmx {

namespace detail {

/// 1 - cos(a, b); a zero vector is treated as orthogonal to everything.
inline double cosine_distance(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    dot += a[j] * b[j];
    na += a[j] * a[j];
    nb += b[j] * b[j];
  }
  if (na == 0.0 || nb == 0.0) return 1.0;
  return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

inline std::vector<int> nearest_centroid(const Tensor& features, const Tensor& centroids) {
  std::vector<int> labels(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
      const double d = cosine_distance(features.row(i), centroids.row(c));
      if (d < best) {  // strict: ties go to the lowest class index
        best = d;
        labels[i] = static_cast<int>(c);
      }
    }
  }
  return labels;
}

}  // namespace detail

/// Two-round nearest-centroid pseudo-labels. Round 1 uses probability-
/// weighted centroids, round 2 centroids of the round-1 hard labels. A
/// class with no weight in round 2 keeps its round-1 centroid.
inline std::vector<int> pseudo_label_centroids(const Tensor& features, const Tensor& probabilities) {
  if (features.rank() != 2 || probabilities.rank() != 2 || features.rows() != probabilities.rows()) {
    throw DimensionError("pseudo labels: features " + shape_string(features.shape()) + " and probabilities " +
                         shape_string(probabilities.shape()) + " are not row-aligned");
  }
  const std::size_t n = features.rows(), d = features.cols(), c = probabilities.cols();
  Tensor centroids = Tensor::matrix(c, d);
  for (std::size_t k = 0; k < c; ++k) {
    double weight = 0.0;
    auto row = centroids.row(k);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = probabilities(i, k);
      weight += p;
      const auto f = features.row(i);
      for (std::size_t j = 0; j < d; ++j) row[j] += p * f[j];
    }
    if (weight > 0.0) {
      for (double& v : row) v /= weight;
    }
  }
  const std::vector<int> round1 = detail::nearest_centroid(features, centroids);

  Tensor refined = centroids;
  for (std::size_t k = 0; k < c; ++k) {
    std::size_t count = 0;
    std::vector<double> sum(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (round1[i] != static_cast<int>(k)) continue;
      ++count;
      const auto f = features.row(i);
      for (std::size_t j = 0; j < d; ++j) sum[j] += f[j];
    }
    if (count == 0) continue;
    auto row = refined.row(k);
    for (std::size_t j = 0; j < d; ++j) row[j] = sum[j] / static_cast<double>(count);
  }
  return detail::nearest_centroid(features, refined);
}

}  // namespace gmx
