#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gmx/numerics/error.hpp"
#include "gmx/numerics/tensor.hpp"

namespace gmx {

enum class OptimizerKind { SgdMomentum, Adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double lr = 1e-3;
  double momentum = 0.9;  // sgd-momentum only
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const {
    if (!(lr > 0.0)) throw ConfigError("optimizer: lr must be positive");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("optimizer: momentum must lie in [0,1)");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
      throw ConfigError("optimizer: betas must lie in [0,1)");
    }
    if (!(eps > 0.0)) throw ConfigError("optimizer: eps must be positive");
  }
};

struct OptimizerState {
  std::vector<Tensor> first;   // momentum buffer / Adam m
  std::vector<Tensor> second;  // Adam v
  std::uint64_t step = 0;
};

/// One in-place update. `active[i] == false` leaves parameter i (and its
/// state) untouched; an empty mask updates everything.
inline void optimizer_step(std::span<Tensor* const> params, std::span<const Tensor> grads,
                           OptimizerState& state, const OptimizerConfig& cfg,
                           std::span<const bool> active = {}) {
  cfg.validate();
  if (params.size() != grads.size()) {
    throw DimensionError("optimizer: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
  }
  if (!active.empty() && active.size() != params.size()) throw DimensionError("optimizer: mask size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) require_same_shape(*params[i], grads[i], "optimizer");
  if (state.first.empty()) {
    for (Tensor* p : params) {
      state.first.emplace_back(p->shape());
      state.second.emplace_back(p->shape());
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!active.empty() && !active[i]) continue;
    auto p = params[i]->data();
    const auto g = grads[i].data();
    auto m = state.first[i].data();
    if (cfg.kind == OptimizerKind::SgdMomentum) {
      for (std::size_t j = 0; j < p.size(); ++j) {
        m[j] = cfg.momentum * m[j] + g[j];
        p[j] -= cfg.lr * m[j];
      }
    } else {
      auto v = state.second[i].data();
      for (std::size_t j = 0; j < p.size(); ++j) {
        m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
        v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
        p[j] -= cfg.lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + cfg.eps);
      }
    }
    require_finite(*params[i], "optimizer_step");
  }
}

}  // namespace gmx
