#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gmx/generic/augment.hpp"
#include "gmx/generic/edges.hpp"
#include "gmx/numerics/error.hpp"
#include "gmx/numerics/grad.hpp"
#include "gmx/numerics/mlp.hpp"
#include "gmx/numerics/rng.hpp"
#include "gmx/numerics/tensor.hpp"
#include "gmx/synthdata/dataset.hpp"

namespace gmx {

enum class MixupMode { Edge, Feature };

inline std::string_view to_string(MixupMode m) { return m == MixupMode::Edge ? "edge" : "feature"; }

inline MixupMode parse_mixup_mode(std::string_view s) {
  if (s == "edge") return MixupMode::Edge;
  if (s == "feature") return MixupMode::Feature;
  throw ConfigError("unknown mixup mode '" + std::string(s) + "'");
}

inline void check_lambda(double lambda, std::string_view op) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError(std::string(op) + ": lambda must lie in [0,1], got " + std::to_string(lambda));
  }
}

/// Mixup between original samples and their generic-domain counterparts.
/// Feature mode averages the backbone features of K sub-domains: the
/// original sample plus the first K-1 entries of `augmentations`.
struct MixupConfig {
  double lambda = 0.1;
  MixupMode mode = MixupMode::Edge;
  std::size_t k = 5;
  std::vector<std::string> augmentations = {"palette_remap", "channel_permute", "low_freq_swap", "additive_fog"};
  bool stop_gradient = true;
  std::uint64_t augmentation_seed = 0xa11ceULL;

  void validate() const {
    check_lambda(lambda, "mixup");
    if (mode == MixupMode::Feature) {
      if (k < 1) throw ConfigError("mixup: k must be at least 1");
      if (augmentations.size() + 1 < k) {
        throw ConfigError("mixup: feature mode needs at least k-1 = " + std::to_string(k - 1) + " augmentations");
      }
    }
  }
};

inline Tensor edge_mixup(const Tensor& x, double lambda, const EdgeParams& params = {}) {
  check_lambda(lambda, "edge_mixup");
  if (lambda == 0.0) return x;
  return convex_mix(x, sobel_edges(x, params), lambda);
}

/// z_g: elementwise mean of the sub-domain features.
inline Tensor feature_generic(std::span<const Tensor> z_aug) {
  if (z_aug.empty()) throw ConfigError("feature_generic: need at least one sub-domain");
  return elementwise_mean(z_aug);
}

inline Tensor feature_mixup(const Tensor& z, const Tensor& z_g, double lambda) {
  check_lambda(lambda, "feature_mixup");
  return convex_mix(z, z_g, lambda);
}

struct FeatureMixupBatch {
  Tensor z;
  std::vector<Tensor> z_aug;
  Tensor z_g;
  Tensor z_m;
  bool generic_detached = true;
};

/// Produces feature-mixup batches. Augmentations are recomputed on every
/// call because the features depend on the current backbone.
class FeatureMixupProducer {
 public:
  FeatureMixupProducer(MixupConfig cfg, PayloadKind kind) : cfg_(std::move(cfg)), kind_(kind) {
    cfg_.validate();
    const Rng root(cfg_.augmentation_seed);
    for (std::size_t i = 0; i + 1 < cfg_.k; ++i) {
      const std::string& name = cfg_.augmentations[i];
      augs_.push_back(kind_.is_image()
                          ? make_augmentation(name, kind_.height, kind_.width, kind_.channels,
                                              root.substream(name).next_u64())
                          : make_augmentation(name, 1, 1, 1, 0));
    }
  }

  const MixupConfig& config() const { return cfg_; }
  std::size_t k() const { return cfg_.k; }

  /// K input batches for the rows `indices` of `ds`: the originals first,
  /// then one batch per augmentation. Per-sample randomness is keyed by
  /// (round_seed, dataset index, augmentation index).
  std::vector<Tensor> branch_inputs(const DomainDataset& ds, std::span<const std::size_t> indices,
                                    std::uint64_t round_seed) const {
    std::vector<Tensor> out;
    out.push_back(ds.batch(indices));
    const Rng root(round_seed);
    const std::size_t n = indices.empty() ? ds.size() : indices.size();
    for (std::size_t a = 0; a < augs_.size(); ++a) {
      Tensor batch = Tensor::matrix(n, kind_.flat_size());
      for (std::size_t r = 0; r < n; ++r) {
        const std::size_t idx = indices.empty() ? r : indices[r];
        const std::uint64_t seed = root.substream(idx * cfg_.k + a + 1).next_u64();
        const Tensor aug = apply_augmentation(ds.samples[idx].payload, augs_[a], seed);
        std::copy(aug.data().begin(), aug.data().end(), batch.row(r).begin());
      }
      out.push_back(std::move(batch));
    }
    return out;
  }

  /// Mixing descriptor consumed by value_and_grad.
  MixedFeatures mixed_features(const DomainDataset& ds, std::span<const std::size_t> indices,
                               std::uint64_t round_seed) const {
    MixedFeatures mix;
    mix.lambda = cfg_.lambda;
    mix.detach_generic = cfg_.stop_gradient;
    // At lambda = 0, z_m = z and value_and_grad skips the generic branch.
    if (cfg_.lambda != 0.0) mix.branch_inputs = branch_inputs(ds, indices, round_seed);
    return mix;
  }

  /// Forward-only batch with every intermediate.
  FeatureMixupBatch features(const ModelBundle& model, const DomainDataset& ds,
                             std::span<const std::size_t> indices, std::uint64_t round_seed) const {
    FeatureMixupBatch b;
    const std::vector<Tensor> inputs = branch_inputs(ds, indices, round_seed);
    for (const Tensor& in : inputs) b.z_aug.push_back(mlp_forward(model.backbone, in, nullptr, "backbone"));
    b.z = b.z_aug.front();
    b.z_g = feature_generic(b.z_aug);
    b.z_m = feature_mixup(b.z, b.z_g, cfg_.lambda);
    b.generic_detached = cfg_.stop_gradient;
    return b;
  }

 private:
  MixupConfig cfg_;
  PayloadKind kind_;
  std::vector<AugmentationKind> augs_;
};

using MixupDomain = std::variant<DomainDataset, FeatureMixupProducer>;

/// Converts a dataset into its mixup domain: a materialized dataset in edge
/// mode, a per-batch producer in feature mode.
inline MixupDomain build_mixup_dataset(const DomainDataset& ds, const MixupConfig& cfg) {
  cfg.validate();
  if (cfg.mode == MixupMode::Feature) return FeatureMixupProducer(cfg, ds.kind);
  if (!ds.kind.is_image()) throw KindError("edge mixup: dataset payloads are not images");
  DomainDataset out = ds;
  out.role = mixup_role(ds.role);
  for (LabeledSample& s : out.samples) s.payload = edge_mixup(s.payload, cfg.lambda);
  return out;
}

}  // namespace gmx
