#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>

#include "gmx/numerics/error.hpp"
#include "gmx/numerics/rng.hpp"
#include "gmx/synthdata/dataset.hpp"

namespace gmx {

enum class ShapeClass { Square = 0, Circle = 1, Triangle = 2, Cross = 3 };
inline constexpr int kShapeClassCount = 4;

enum class TextureKind { Flat, Stripes, Checker, Noise };

inline std::string_view to_string(TextureKind t) {
  switch (t) {
    case TextureKind::Flat: return "flat";
    case TextureKind::Stripes: return "stripes";
    case TextureKind::Checker: return "checker";
    case TextureKind::Noise: return "noise";
  }
  return "?";
}

inline TextureKind parse_texture(std::string_view s) {
  for (TextureKind t : {TextureKind::Flat, TextureKind::Stripes, TextureKind::Checker, TextureKind::Noise}) {
    if (to_string(t) == s) return t;
  }
  throw ConfigError("unknown texture kind '" + std::string(s) + "'");
}

using Rgb = std::array<double, 3>;

/// Appearance of one domain: a foreground palette (one color per class
/// slot) and a textured background.
struct DomainStyle {
  std::array<Rgb, kShapeClassCount> palette{};
  Rgb background{};
  TextureKind texture = TextureKind::Flat;
  double texture_amplitude = 0.0;
  double texture_period = 4.0;
};

inline DomainStyle default_source_style() {
  DomainStyle s;
  s.palette = {Rgb{0.90, 0.15, 0.15}, Rgb{0.15, 0.80, 0.20}, Rgb{0.20, 0.30, 0.95}, Rgb{0.95, 0.85, 0.10}};
  s.background = {0.22, 0.22, 0.26};
  s.texture = TextureKind::Stripes;
  s.texture_amplitude = 0.06;
  s.texture_period = 6.0;
  return s;
}

inline DomainStyle default_target_style() {
  DomainStyle s;
  s.palette = {Rgb{0.75, 0.30, 0.45}, Rgb{0.25, 0.65, 0.55}, Rgb{0.45, 0.35, 0.80}, Rgb{0.85, 0.60, 0.25}};
  s.background = {0.30, 0.28, 0.25};
  s.texture = TextureKind::Checker;
  s.texture_amplitude = 0.06;
  s.texture_period = 4.0;
  return s;
}

struct ShapeTextureConfig {
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t channels = 3;
  DomainStyle source_style = default_source_style();
  DomainStyle target_style = default_target_style();
  double texture_class_corr = 0.5;
  double noise = 0.02;
  double color_jitter = 0.05;
  double min_size = 0.35;  // shape size as a fraction of min(height, width)
  double max_size = 0.50;
  double max_offset = 3.0;  // center jitter in pixels
  std::size_t samples_per_class = 100;
  std::uint64_t seed = 1;

  void validate() const {
    if (height < 16 || width < 16) throw ConfigError("shape_texture: image must be at least 16x16");
    if (channels != 3) throw ConfigError("shape_texture: channels must be 3");
    if (texture_class_corr < 0.0 || texture_class_corr > 1.0) {
      throw ConfigError("shape_texture: texture_class_corr must lie in [0,1]");
    }
    if (noise < 0.0) throw ConfigError("shape_texture: noise must be non-negative");
    if (samples_per_class == 0) throw ConfigError("shape_texture: samples_per_class must be positive");
    if (!(min_size > 0.0 && min_size <= max_size && max_size < 1.0)) {
      throw ConfigError("shape_texture: need 0 < min_size <= max_size < 1");
    }
  }

  std::string describe() const {
    std::ostringstream os;
    os << "shape_texture h=" << height << " w=" << width << " corr=" << texture_class_corr
       << " noise=" << noise << " per_class=" << samples_per_class << " seed=" << seed;
    return os.str();
  }
};

namespace detail {

/// Inside test for a shape of nominal area size^2 centered at (cy, cx).
/// Pixel centers are sampled; there is no antialiasing.
inline bool inside_shape(ShapeClass cls, double py, double px, double cy, double cx, double size) {
  const double dy = py - cy, dx = px - cx;
  switch (cls) {
    case ShapeClass::Square: {
      const double h = size / 2.0;
      return std::abs(dx) <= h && std::abs(dy) <= h;
    }
    case ShapeClass::Circle: {
      const double r = size / std::sqrt(std::numbers::pi);
      return dx * dx + dy * dy <= r * r;
    }
    case ShapeClass::Triangle: {
      // Equilateral, apex up, centroid at the center.
      const double side = size * std::sqrt(4.0 / std::sqrt(3.0));
      const double height = side * std::sqrt(3.0) / 2.0;
      const double top = -2.0 * height / 3.0, bottom = height / 3.0;
      if (dy < top || dy > bottom) return false;
      const double half_width = (dy - top) / height * side / 2.0;
      return std::abs(dx) <= half_width;
    }
    case ShapeClass::Cross: {
      const double span = size * 3.0 / std::sqrt(5.0);
      const double arm = span / 6.0;
      const double half = span / 2.0;
      return (std::abs(dx) <= arm && std::abs(dy) <= half) || (std::abs(dy) <= arm && std::abs(dx) <= half);
    }
  }
  return false;
}

inline double texture_value(const DomainStyle& style, std::size_t y, std::size_t x, Rng& rng) {
  const double a = style.texture_amplitude;
  const double p = style.texture_period;
  switch (style.texture) {
    case TextureKind::Flat: return 0.0;
    case TextureKind::Stripes:
      return a * std::sin(2.0 * std::numbers::pi * static_cast<double>(x + y) / p);
    case TextureKind::Checker: {
      const auto cell = static_cast<std::size_t>(static_cast<double>(y) / p) +
                        static_cast<std::size_t>(static_cast<double>(x) / p);
      return (cell % 2 == 0) ? a : -a;
    }
    case TextureKind::Noise: return a * rng.normal();
  }
  return 0.0;
}

inline DomainDataset render_domain(const ShapeTextureConfig& cfg, const DomainStyle& style, DomainRole role,
                                   Rng rng, std::vector<int>& labels_out) {
  DomainDataset ds;
  ds.class_count = kShapeClassCount;
  ds.kind = PayloadKind::image(cfg.height, cfg.width, cfg.channels);
  ds.role = role;
  ds.provenance = cfg.describe() + " role=" + std::string(to_string(role));
  const std::size_t total = cfg.samples_per_class * kShapeClassCount;
  const double extent = static_cast<double>(std::min(cfg.height, cfg.width));
  labels_out.clear();
  for (std::size_t i = 0; i < total; ++i) {
    const int cls = static_cast<int>(i % kShapeClassCount);
    const double size = extent * rng.uniform(cfg.min_size, cfg.max_size);
    const double cy = static_cast<double>(cfg.height) / 2.0 - 0.5 + rng.uniform(-cfg.max_offset, cfg.max_offset);
    const double cx = static_cast<double>(cfg.width) / 2.0 - 0.5 + rng.uniform(-cfg.max_offset, cfg.max_offset);
    const bool tied = rng.bernoulli(cfg.texture_class_corr);
    const std::size_t slot = tied ? static_cast<std::size_t>(cls) : rng.index(kShapeClassCount);
    Rgb fg = style.palette[slot];
    for (double& c : fg) c = std::clamp(c + rng.uniform(-cfg.color_jitter, cfg.color_jitter), 0.0, 1.0);

    Tensor img({cfg.height, cfg.width, cfg.channels});
    for (std::size_t y = 0; y < cfg.height; ++y) {
      for (std::size_t x = 0; x < cfg.width; ++x) {
        const bool fg_pixel = inside_shape(static_cast<ShapeClass>(cls), static_cast<double>(y),
                                           static_cast<double>(x), cy, cx, size);
        const double tex = fg_pixel ? 0.0 : texture_value(style, y, x, rng);
        for (std::size_t c = 0; c < cfg.channels; ++c) {
          double v = fg_pixel ? fg[c] : style.background[c] + tex;
          if (cfg.noise > 0.0) v += cfg.noise * rng.normal();
          img[(y * cfg.width + x) * cfg.channels + c] = std::clamp(v, 0.0, 1.0);
        }
      }
    }
    labels_out.push_back(cls);
    ds.samples.push_back({std::move(img), std::nullopt});
  }
  return ds;
}

}  // namespace detail

struct ShapeTextureData {
  DomainDataset source;
  DomainDataset target;
  EvalLabels target_eval_labels;
};

/// Renders the labeled source domain and the unlabeled target domain.
/// Class = shape; foreground color follows the class with probability
/// texture_class_corr and is drawn uniformly from the palette otherwise.
/// All four shapes share the same nominal area.
inline ShapeTextureData gen_shape_texture(const ShapeTextureConfig& cfg) {
  cfg.validate();
  const Rng root(cfg.seed);
  ShapeTextureData out;
  std::vector<int> labels;
  out.source = detail::render_domain(cfg, cfg.source_style, DomainRole::Source, root.substream("source"), labels);
  for (std::size_t i = 0; i < labels.size(); ++i) out.source.samples[i].label = labels[i];
  out.target = detail::render_domain(cfg, cfg.target_style, DomainRole::Target, root.substream("target"), labels);
  out.target_eval_labels.labels = labels;
  return out;
}

}  // namespace gmx
