#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "gmx/numerics/error.hpp"
#include "gmx/numerics/rng.hpp"
#include "gmx/synthdata/dataset.hpp"

namespace gmx {

struct MoonsConfig {
  std::size_t samples = 400;
  double noise = 0.1;
  double angle = 0.0;  // radians, target rotation about the source centroid
  std::uint64_t seed = 1;

  void validate() const {
    if (samples < 2) throw ConfigError("moons: need at least two samples");
    if (noise < 0.0) throw ConfigError("moons: noise must be non-negative");
    if (!(angle >= 0.0 && angle < 2.0 * std::numbers::pi)) throw ConfigError("moons: angle must lie in [0, 2pi)");
  }
};

struct MoonsData {
  DomainDataset source;
  DomainDataset target;
  EvalLabels target_eval_labels;
  std::array<double, 2> centroid{};
};

/// Rotates a 2-D point about `center` by `angle` radians.
inline std::array<double, 2> rotate_about(const std::array<double, 2>& p, const std::array<double, 2>& center,
                                          double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  const double x = p[0] - center[0], y = p[1] - center[1];
  return {center[0] + c * x - s * y, center[1] + s * x + c * y};
}

/// Standard two moons: class 0 on the upper arc (cos t, sin t), class 1 on
/// the lower arc (1 - cos t, 0.5 - sin t), t ~ U[0, pi]. The target holds the
/// same points rotated by cfg.angle about the source centroid.
inline MoonsData gen_two_moons(const MoonsConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  MoonsData out;
  for (DomainDataset* ds : {&out.source, &out.target}) {
    ds->class_count = 2;
    ds->kind = PayloadKind::vector(2);
    ds->provenance = "two_moons seed=" + std::to_string(cfg.seed);
  }
  out.source.role = DomainRole::Source;
  out.target.role = DomainRole::Target;
  std::vector<std::array<double, 2>> points;
  std::vector<int> labels;
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const int cls = static_cast<int>(i % 2);
    const double t = rng.uniform(0.0, std::numbers::pi);
    std::array<double, 2> p = cls == 0 ? std::array<double, 2>{std::cos(t), std::sin(t)}
                                       : std::array<double, 2>{1.0 - std::cos(t), 0.5 - std::sin(t)};
    if (cfg.noise > 0.0) {
      p[0] += cfg.noise * rng.normal();
      p[1] += cfg.noise * rng.normal();
    }
    points.push_back(p);
    labels.push_back(cls);
  }
  for (const auto& p : points) {
    out.centroid[0] += p[0];
    out.centroid[1] += p[1];
  }
  out.centroid[0] /= static_cast<double>(points.size());
  out.centroid[1] /= static_cast<double>(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out.source.samples.push_back({Tensor::vector({points[i][0], points[i][1]}), labels[i]});
    const auto q = cfg.angle == 0.0 ? points[i] : rotate_about(points[i], out.centroid, cfg.angle);
    out.target.samples.push_back({Tensor::vector({q[0], q[1]}), std::nullopt});
  }
  out.target_eval_labels.labels = labels;
  return out;
}

}  // namespace gmx
