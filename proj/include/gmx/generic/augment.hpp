#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gmx/generic/dft.hpp"
#include "gmx/numerics/error.hpp"
#include "gmx/numerics/rng.hpp"
#include "gmx/numerics/tensor.hpp"

namespace gmx {

struct IdentityAug {};

/// Mixes color channels through (1-strength)*I + strength*R, where R is a
/// random row-stochastic 3x3 matrix.
struct PaletteRemap {
  double strength = 1.0;
};

/// Reorders channels; an empty permutation draws one from the seed.
struct ChannelPermute {
  std::vector<std::size_t> permutation;
};

/// Replaces the Fourier amplitude of every frequency with index distance
/// < radius from DC by the reference image's amplitude, keeping the phase.
struct LowFreqSwap {
  std::optional<Tensor> reference;
  double radius = 3.0;
  /// Per-channel amplitude spectrum of `reference`; filled by
  /// make_augmentation, recomputed on the fly when empty.
  std::vector<std::vector<double>> reference_amplitude;
};

namespace detail {

inline std::vector<std::vector<double>> amplitude_spectrum(const Tensor& img) {
  const std::size_t h = img.shape()[0], w = img.shape()[1], c = img.shape()[2];
  const Dft2d dft(h, w);
  std::vector<std::vector<double>> out(c, std::vector<double>(h * w));
  std::vector<Complex> grid(h * w);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < h * w; ++i) grid[i] = Complex(img[i * c + ch], 0.0);
    const std::vector<Complex> f = dft.forward(grid);
    for (std::size_t i = 0; i < h * w; ++i) out[ch][i] = std::abs(f[i]);
  }
  return out;
}

}  // namespace detail

/// Blends toward a bright, slightly tinted haze that thickens toward the top.
struct AdditiveFog {
  double strength = 0.5;
};

/// Scales deviations from the image mean by a factor in [1-range, 1+range].
struct ContrastJitter {
  double range = 0.5;
};

using AugmentationKind =
    std::variant<IdentityAug, PaletteRemap, ChannelPermute, LowFreqSwap, AdditiveFog, ContrastJitter>;

inline std::string augmentation_name(const AugmentationKind& k) {
  static constexpr std::string_view names[] = {"identity",      "palette_remap", "channel_permute",
                                               "low_freq_swap", "additive_fog",  "contrast_jitter"};
  return std::string(names[k.index()]);
}

/// A smooth random color field used as the style reference of
/// low_freq_swap.
inline Tensor make_style_reference(std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> base(c), ay(c), ax(c), fy(c), fx(c), py(c), px(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    base[ch] = rng.uniform(0.3, 0.7);
    ay[ch] = rng.uniform(0.1, 0.25);
    ax[ch] = rng.uniform(0.1, 0.25);
    fy[ch] = rng.uniform(0.5, 2.0);
    fx[ch] = rng.uniform(0.5, 2.0);
    py[ch] = rng.uniform(0.0, 6.283185307179586);
    px[ch] = rng.uniform(0.0, 6.283185307179586);
  }
  Tensor out({h, w, c});
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double v = base[ch] +
                         ay[ch] * std::sin(6.283185307179586 * fy[ch] * static_cast<double>(y) / h + py[ch]) +
                         ax[ch] * std::cos(6.283185307179586 * fx[ch] * static_cast<double>(x) / w + px[ch]);
        out[(y * w + x) * c + ch] = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return out;
}

/// Builds an augmentation with default parameters from its name. Image
/// dimensions and seed are used for the low_freq_swap reference.
inline AugmentationKind make_augmentation(std::string_view name, std::size_t h, std::size_t w, std::size_t c,
                                          std::uint64_t seed) {
  if (name == "identity") return IdentityAug{};
  if (name == "palette_remap") return PaletteRemap{};
  if (name == "channel_permute") return ChannelPermute{};
  if (name == "low_freq_swap") {
    LowFreqSwap p{make_style_reference(h, w, c, seed), 3.0, {}};
    p.reference_amplitude = detail::amplitude_spectrum(*p.reference);
    return p;
  }
  if (name == "additive_fog") return AdditiveFog{};
  if (name == "contrast_jitter") return ContrastJitter{};
  throw ConfigError("unknown augmentation '" + std::string(name) + "'");
}

namespace detail {

inline void require_image(const Tensor& x, std::string_view what) {
  if (x.rank() != 3) {
    throw KindError(std::string(what) + ": needs an image payload, got shape " + shape_string(x.shape()));
  }
}

inline Tensor low_freq_swap(const Tensor& x, const LowFreqSwap& p) {
  require_image(x, "low_freq_swap");
  if (!p.reference) throw ConfigError("low_freq_swap: missing reference image");
  require_same_shape(x, *p.reference, "low_freq_swap");
  if (p.radius < 0.0) throw ConfigError("low_freq_swap: radius must be non-negative");
  const std::size_t h = x.shape()[0], w = x.shape()[1], c = x.shape()[2];
  std::vector<bool> swapped(h * w, false);
  bool any = false;
  for (std::size_t u = 0; u < h; ++u) {
    for (std::size_t v = 0; v < w; ++v) {
      const double fu = u <= h / 2 ? static_cast<double>(u) : static_cast<double>(u) - static_cast<double>(h);
      const double fv = v <= w / 2 ? static_cast<double>(v) : static_cast<double>(v) - static_cast<double>(w);
      if (std::sqrt(fu * fu + fv * fv) < p.radius) swapped[u * w + v] = any = true;
    }
  }
  if (!any) return x;
  const Dft2d dft(h, w);
  const std::vector<std::vector<double>> computed =
      p.reference_amplitude.size() == c ? std::vector<std::vector<double>>{} : amplitude_spectrum(*p.reference);
  const std::vector<std::vector<double>>& amp = computed.empty() ? p.reference_amplitude : computed;
  Tensor out = x;
  std::vector<Complex> grid(h * w);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < h * w; ++i) grid[i] = Complex(x[i * c + ch], 0.0);
    std::vector<Complex> fx = dft.forward(grid);
    for (std::size_t i = 0; i < h * w; ++i) {
      if (swapped[i]) fx[i] = std::polar(amp[ch][i], std::arg(fx[i]));
    }
    const std::vector<Complex> back = dft.inverse(fx);
    for (std::size_t i = 0; i < h * w; ++i) out[i * c + ch] = std::clamp(back[i].real(), 0.0, 1.0);
  }
  return out;
}

}  // namespace detail

/// Label-preserving augmentation. Randomness comes only from `seed`;
/// image outputs are clamped to [0,1]. Only identity and contrast_jitter
/// accept vector payloads.
inline Tensor apply_augmentation(const Tensor& x, const AugmentationKind& kind, std::uint64_t seed) {
  Rng rng(seed);
  return std::visit(
      [&](const auto& p) -> Tensor {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, IdentityAug>) {
          return x;
        } else if constexpr (std::is_same_v<P, PaletteRemap>) {
          detail::require_image(x, "palette_remap");
          const std::size_t c = x.shape()[2];
          std::vector<double> m(c * c);
          for (std::size_t r = 0; r < c; ++r) {
            double s = 0.0;
            for (std::size_t k = 0; k < c; ++k) s += (m[r * c + k] = rng.uniform(0.05, 1.0));
            for (std::size_t k = 0; k < c; ++k) {
              m[r * c + k] = p.strength * m[r * c + k] / s + (r == k ? 1.0 - p.strength : 0.0);
            }
          }
          Tensor out = x;
          const std::size_t pixels = x.size() / c;
          for (std::size_t i = 0; i < pixels; ++i) {
            for (std::size_t r = 0; r < c; ++r) {
              double v = 0.0;
              for (std::size_t k = 0; k < c; ++k) v += m[r * c + k] * x[i * c + k];
              out[i * c + r] = std::clamp(v, 0.0, 1.0);
            }
          }
          return out;
        } else if constexpr (std::is_same_v<P, ChannelPermute>) {
          detail::require_image(x, "channel_permute");
          const std::size_t c = x.shape()[2];
          std::vector<std::size_t> perm = p.permutation;
          if (perm.empty()) perm = rng.permutation(c);
          std::vector<std::size_t> check = perm;
          std::sort(check.begin(), check.end());
          for (std::size_t k = 0; k < check.size(); ++k) {
            if (check.size() != c || check[k] != k) throw ConfigError("channel_permute: not a permutation of channels");
          }
          Tensor out = x;
          const std::size_t pixels = x.size() / c;
          for (std::size_t i = 0; i < pixels; ++i) {
            for (std::size_t k = 0; k < c; ++k) out[i * c + k] = x[i * c + perm[k]];
          }
          return out;
        } else if constexpr (std::is_same_v<P, LowFreqSwap>) {
          return detail::low_freq_swap(x, p);
        } else if constexpr (std::is_same_v<P, AdditiveFog>) {
          detail::require_image(x, "additive_fog");
          const std::size_t h = x.shape()[0], w = x.shape()[1], c = x.shape()[2];
          const double strength = p.strength * rng.uniform(0.6, 1.0);
          std::vector<double> tint(c);
          for (double& t : tint) t = rng.uniform(0.75, 0.95);
          Tensor out = x;
          for (std::size_t y = 0; y < h; ++y) {
            const double a = strength * (0.5 + 0.5 * (1.0 - static_cast<double>(y) / static_cast<double>(h)));
            for (std::size_t xx = 0; xx < w; ++xx) {
              for (std::size_t ch = 0; ch < c; ++ch) {
                const std::size_t i = (y * w + xx) * c + ch;
                out[i] = std::clamp((1.0 - a) * x[i] + a * tint[ch], 0.0, 1.0);
              }
            }
          }
          return out;
        } else {
          if (p.range < 0.0 || p.range > 1.0) throw ConfigError("contrast_jitter: range must lie in [0,1]");
          const double factor = rng.uniform(1.0 - p.range, 1.0 + p.range);
          double mean = 0.0;
          for (double v : x.data()) mean += v;
          mean /= static_cast<double>(x.size());
          Tensor out = x;
          const bool image = x.rank() == 3;
          for (double& v : out.data()) {
            v = mean + factor * (v - mean);
            if (image) v = std::clamp(v, 0.0, 1.0);
          }
          return out;
        }
      },
      kind);
}

}  // namespace gmx
