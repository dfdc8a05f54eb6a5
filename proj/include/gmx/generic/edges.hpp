#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gmx/numerics/error.hpp"
#include "gmx/numerics/tensor.hpp"

namespace gmx {

enum class EdgeOperator { Sobel };

/// Edge-map settings. Only Sobel with per-image max normalization and
/// gray-map replication is implemented.
struct EdgeParams {
  EdgeOperator op = EdgeOperator::Sobel;
  bool normalize = true;
};

/// Unnormalized Sobel gradient magnitude of the channel-mean gray image,
/// shape [H, W]. Borders replicate the nearest pixel.
inline Tensor sobel_magnitude(const Tensor& image) {
  if (image.rank() != 3) throw KindError("sobel: expected an HxWxC image, got " + shape_string(image.shape()));
  const std::size_t h = image.shape()[0], w = image.shape()[1], c = image.shape()[2];
  std::vector<double> gray(h * w, 0.0);
  for (std::size_t i = 0; i < h * w; ++i) {
    double s = 0.0;
    for (std::size_t ch = 0; ch < c; ++ch) s += image[i * c + ch];
    gray[i] = s / static_cast<double>(c);
  }
  auto at = [&](long y, long x) {
    y = std::clamp(y, 0L, static_cast<long>(h) - 1);
    x = std::clamp(x, 0L, static_cast<long>(w) - 1);
    return gray[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
  };
  Tensor mag({h, w});
  for (long y = 0; y < static_cast<long>(h); ++y) {
    for (long x = 0; x < static_cast<long>(w); ++x) {
      const double gx = (at(y - 1, x + 1) + 2.0 * at(y, x + 1) + at(y + 1, x + 1)) -
                        (at(y - 1, x - 1) + 2.0 * at(y, x - 1) + at(y + 1, x - 1));
      const double gy = (at(y + 1, x - 1) + 2.0 * at(y + 1, x) + at(y + 1, x + 1)) -
                        (at(y - 1, x - 1) + 2.0 * at(y - 1, x) + at(y - 1, x + 1));
      mag[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] = std::sqrt(gx * gx + gy * gy);
    }
  }
  return mag;
}

/// Edge representation of an image: Sobel magnitude scaled by its
/// per-image maximum into [0,1] (all zero when the maximum is 0), copied to
/// every channel.
inline Tensor sobel_edges(const Tensor& image, const EdgeParams& params = {}) {
  const Tensor mag = sobel_magnitude(image);
  const std::size_t h = image.shape()[0], w = image.shape()[1], c = image.shape()[2];
  const double mx = *std::max_element(mag.data().begin(), mag.data().end());
  Tensor out(image.shape());
  for (std::size_t i = 0; i < h * w; ++i) {
    double v = mag[i];
    if (params.normalize) v = mx > 0.0 ? std::min(v / mx, 1.0) : 0.0;
    for (std::size_t ch = 0; ch < c; ++ch) out[i * c + ch] = v;
  }
  return out;
}

}  // namespace gmx
