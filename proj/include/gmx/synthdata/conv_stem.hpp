#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gmx/numerics/error.hpp"
#include "gmx/numerics/rng.hpp"
#include "gmx/synthdata/dataset.hpp"

namespace gmx {

/// Fixed (untrained) 3x3 convolution, 8 output channels, stride 2, zero
/// padding 1, ReLU. Turns an HxWxC image into a flat ceil(H/2)*ceil(W/2)*8
/// vector. Kernels are drawn once from a fixed seed.
class ConvStem {
 public:
  static constexpr std::size_t kOutChannels = 8;

  explicit ConvStem(std::size_t in_channels, std::uint64_t seed = 0x5eedc0deULL) : in_channels_(in_channels) {
    Rng rng(seed);
    const double limit = std::sqrt(6.0 / static_cast<double>(9 * in_channels + 9 * kOutChannels));
    weights_.resize(kOutChannels * 9 * in_channels);
    for (double& w : weights_) w = rng.uniform(-limit, limit);
  }

  PayloadKind output_kind(const PayloadKind& in) const {
    return PayloadKind::vector(((in.height + 1) / 2) * ((in.width + 1) / 2) * kOutChannels);
  }

  Tensor apply(const Tensor& image) const {
    if (image.rank() != 3 || image.shape()[2] != in_channels_) {
      throw KindError("conv stem: expected an HxWx" + std::to_string(in_channels_) + " image, got " +
                      shape_string(image.shape()));
    }
    const std::size_t h = image.shape()[0], w = image.shape()[1], c = in_channels_;
    const std::size_t oh = (h + 1) / 2, ow = (w + 1) / 2;
    Tensor out({oh * ow * kOutChannels});
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        for (std::size_t k = 0; k < kOutChannels; ++k) {
          double acc = 0.0;
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const long y = static_cast<long>(2 * oy) + dy, x = static_cast<long>(2 * ox) + dx;
              if (y < 0 || x < 0 || y >= static_cast<long>(h) || x >= static_cast<long>(w)) continue;
              const std::size_t tap = static_cast<std::size_t>((dy + 1) * 3 + (dx + 1));
              for (std::size_t ch = 0; ch < c; ++ch) {
                acc += weights_[(k * 9 + tap) * c + ch] *
                       image[(static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)) * c + ch];
              }
            }
          }
          out[(oy * ow + ox) * kOutChannels + k] = acc > 0.0 ? acc : 0.0;
        }
      }
    }
    return out;
  }

  DomainDataset apply(const DomainDataset& ds) const {
    if (!ds.kind.is_image()) throw KindError("conv stem: dataset payloads are not images");
    DomainDataset out = ds;
    out.kind = output_kind(ds.kind);
    for (LabeledSample& s : out.samples) s.payload = apply(s.payload);
    return out;
  }

 private:
  std::size_t in_channels_;
  std::vector<double> weights_;
};

}  // namespace gmx
