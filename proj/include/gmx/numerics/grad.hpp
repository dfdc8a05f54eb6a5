#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gmx/numerics/error.hpp"
#include "gmx/numerics/loss.hpp"
#include "gmx/numerics/mlp.hpp"
#include "gmx/numerics/tensor.hpp"

namespace gmx {

/// Feature-space interpolation applied between backbone and classifier:
/// z_m = z + lambda * (z_g - z), where z_g is the elementwise mean of the
/// backbone features of `branch_inputs` (or `constant_generic` when set).
/// With detach_generic, no gradient reaches the parameters through z_g.
struct MixedFeatures {
  double lambda = 0.0;
  std::vector<Tensor> branch_inputs;
  std::optional<Tensor> constant_generic;
  bool detach_generic = true;
};

struct GradientRecord {
  double loss = 0.0;
  LossValue components;
  std::vector<Tensor> grads;  // aligned with ModelBundle::parameters()
};

/// Loss and exact parameter gradients of loss(f_c(mix(h(batch)))).
inline GradientRecord value_and_grad(const ModelBundle& model, const Tensor& batch,
                                     const LossSpec& loss, const MixedFeatures* mix = nullptr) {
  model.validate();
  if (mix && !(mix->lambda >= 0.0 && mix->lambda <= 1.0)) {
    throw ConfigError("feature mixup: lambda must lie in [0,1]");
  }
  if (mix && mix->lambda == 0.0) mix = nullptr;  // z_m = z
  MlpCache backbone_cache;
  Tensor z = mlp_forward(model.backbone, batch, &backbone_cache, "backbone");

  std::vector<MlpCache> branch_caches;
  Tensor z_g;
  double lambda = 0.0;
  bool generic_has_grad = false;
  if (mix) {
    lambda = mix->lambda;
    if (mix->constant_generic) {
      z_g = *mix->constant_generic;
    } else {
      if (mix->branch_inputs.empty()) throw ConfigError("feature mixup: no branch inputs");
      std::vector<Tensor> zs;
      generic_has_grad = !mix->detach_generic;
      if (generic_has_grad) branch_caches.resize(mix->branch_inputs.size());
      for (std::size_t i = 0; i < mix->branch_inputs.size(); ++i) {
        zs.push_back(mlp_forward(model.backbone, mix->branch_inputs[i],
                                 generic_has_grad ? &branch_caches[i] : nullptr, "backbone"));
      }
      z_g = elementwise_mean(zs);
    }
    require_same_shape(z, z_g, "feature mixup");
  }
  const Tensor z_m = mix ? convex_mix(z, z_g, lambda) : z;

  MlpCache classifier_cache;
  const Tensor logits = mlp_forward(model.classifier, z_m, &classifier_cache, "classifier");
  LossValue value = evaluate_loss(logits, loss);

  GradientRecord rec;
  rec.loss = value.total;
  rec.grads = model.zero_like();
  Tensor grad_zm = mlp_backward(model.classifier, classifier_cache, value.grad_logits, rec.grads,
                                model.backbone_tensor_count());
  Tensor grad_z = grad_zm;
  if (mix && lambda != 0.0) {
    for (double& g : grad_z.data()) g *= (1.0 - lambda);
  }
  mlp_backward(model.backbone, backbone_cache, std::move(grad_z), rec.grads, 0, false);
  if (generic_has_grad && lambda != 0.0) {
    const double share = lambda / static_cast<double>(branch_caches.size());
    for (const MlpCache& cache : branch_caches) {
      Tensor g = grad_zm;
      for (double& v : g.data()) v *= share;
      mlp_backward(model.backbone, cache, std::move(g), rec.grads, 0, false);
    }
  }
  for (const Tensor& g : rec.grads) require_finite(g, "value_and_grad");
  value.grad_logits = Tensor();
  rec.components = std::move(value);
  return rec;
}

/// Loss value only (no gradients); used by finite-difference checks.
inline double loss_value(const ModelBundle& model, const Tensor& batch, const LossSpec& loss,
                         const MixedFeatures* mix = nullptr) {
  Tensor z = mlp_forward(model.backbone, batch, nullptr, "backbone");
  if (mix && mix->lambda != 0.0) {
    Tensor z_g;
    if (mix->constant_generic) {
      z_g = *mix->constant_generic;
    } else {
      std::vector<Tensor> zs;
      for (const Tensor& in : mix->branch_inputs) zs.push_back(mlp_forward(model.backbone, in));
      z_g = elementwise_mean(zs);
    }
    z = convex_mix(z, z_g, mix->lambda);
  }
  return evaluate_loss(mlp_forward(model.classifier, z, nullptr, "classifier"), loss).total;
}

}  // namespace gmx
