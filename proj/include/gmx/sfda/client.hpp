#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <optional>
#include <variant>
#include <vector>

#include "gmx/generic/mixup.hpp"
#include "gmx/numerics/grad.hpp"
#include "gmx/numerics/loss.hpp"
#include "gmx/numerics/optimizer.hpp"
#include "gmx/sfda/evaluate.hpp"
#include "gmx/sfda/pseudo_label.hpp"
#include "gmx/sfda/train_log.hpp"
#include "gmx/sfda/vendor.hpp"

namespace gmx {

struct ClientConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  OptimizerConfig optimizer = {OptimizerKind::Adam, 1e-4};
  std::optional<MixupConfig> mixup = MixupConfig{};
  std::size_t refresh_interval = 1;  // epochs between pseudo-label refreshes
  double w_ent = 1.0;
  double w_div = 1.0;
  double w_pl = 0.3;
  bool freeze_classifier = true;
  std::optional<std::size_t> finetune_iterations;  // default: finetune_fraction of the adaptation steps
  double finetune_fraction = 0.1;
  std::uint64_t seed = 1;

  void validate() const {
    if (batch_size == 0) throw ConfigError("client: batch_size must be positive");
    if (refresh_interval == 0) throw ConfigError("client: refresh_interval must be positive");
    if (w_ent < 0.0 || w_div < 0.0 || w_pl < 0.0) throw ConfigError("client: loss weights must be non-negative");
    if (finetune_fraction < 0.0) throw ConfigError("client: finetune_fraction must be non-negative");
    optimizer.validate();
    if (mixup) mixup->validate();
  }

  std::size_t finetune_steps(std::size_t adaptation_steps) const {
    if (finetune_iterations) return *finetune_iterations;
    return static_cast<std::size_t>(std::llround(finetune_fraction * static_cast<double>(adaptation_steps)));
  }
};

struct ClientResult {
  ModelBundle model;
  TrainLog log;
  std::size_t adaptation_steps = 0;
  std::size_t finetune_steps = 0;
};

namespace detail {

/// Pseudo-labels for every sample from the features the classifier sees.
inline std::vector<int> refresh_pseudo_labels(const ModelBundle& model, const DomainDataset& data,
                                              const FeatureMixupProducer* producer, std::uint64_t round_seed) {
  Tensor z;
  if (producer) {
    z = producer->features(model, data, {}, round_seed).z_m;
  } else {
    z = mlp_forward(model.backbone, data.batch(), nullptr, "backbone");
  }
  const Tensor probs = softmax(mlp_forward(model.classifier, z, nullptr, "classifier"));
  return pseudo_label_centroids(z, probs);
}

struct StepTotals {
  double total = 0.0, ent = 0.0, div = 0.0, pl = 0.0;
  std::size_t count = 0;

  void add(const GradientRecord& r) {
    total += r.loss;
    ent += r.components.entropy;
    div += r.components.diversity;
    pl += r.components.pseudo_label;
    ++count;
  }
  TrainLogRow row(std::size_t epoch) const {
    const double n = count ? static_cast<double>(count) : 1.0;
    TrainLogRow out;
    out.epoch = epoch;
    out.loss_total = total / n;
    out.loss_ent = ent / n;
    out.loss_div = div / n;
    out.loss_pl = pl / n;
    return out;
  }
};

}  // namespace detail

/// Source-free adaptation of the backbone on the target mixup domain with
/// an information-maximization + centroid pseudo-label objective, then a
/// short finetune on the original target data.
///
/// The target dataset must be unlabeled; ground truth reaches this function
/// only through `probe`, which returns accuracies and nothing else.
inline ClientResult client_adapt(const ModelBundle& model, const DomainDataset& target, const ClientConfig& cfg,
                                 const EvalProbe* probe = nullptr) {
  cfg.validate();
  model.validate();
  if (is_source_like(target.role)) throw RoleError("client_adapt: dataset role is source-like, expected a target role");
  if (target.has_labels()) {
    throw RoleError("client_adapt: quarantine violation: target dataset (" + std::string(to_string(target.role)) +
                    ") carries labels");
  }
  if (target.size() == 0) throw DimensionError("client_adapt: empty target dataset");
  const auto t0 = std::chrono::steady_clock::now();
  const Rng root(cfg.seed);

  std::optional<MixupDomain> mixed;
  if (cfg.mixup) mixed = build_mixup_dataset(target, *cfg.mixup);
  const DomainDataset& adapt_data =
      mixed && std::holds_alternative<DomainDataset>(*mixed) ? std::get<DomainDataset>(*mixed) : target;
  const FeatureMixupProducer* producer = mixed ? std::get_if<FeatureMixupProducer>(&*mixed) : nullptr;

  ClientResult out{model, {}, 0, 0};
  std::vector<bool> active_vec(model.tensor_count(), true);
  if (cfg.freeze_classifier) {
    for (std::size_t i = model.backbone_tensor_count(); i < active_vec.size(); ++i) active_vec[i] = false;
  }
  const std::unique_ptr<bool[]> active(new bool[active_vec.size()]);
  for (std::size_t i = 0; i < active_vec.size(); ++i) active[i] = active_vec[i];
  const std::span<const bool> mask(active.get(), active_vec.size());

  OptimizerState opt;
  const Rng shuffle = root.substream("shuffle");
  const Rng augment = root.substream("augment");
  const Rng pl_rounds = root.substream("pseudo-label");
  std::vector<int> pseudo;
  auto step_on = [&](const DomainDataset& data, const std::vector<std::size_t>& idx, const FeatureMixupProducer* prod,
                     std::uint64_t aug_seed) {
    CompositeLoss loss{cfg.w_ent, cfg.w_div, cfg.w_pl, {}, 0.0};
    for (std::size_t i : idx) loss.pseudo_labels.push_back(pseudo[i]);
    GradientRecord rec;
    if (prod) {
      const MixedFeatures mix = prod->mixed_features(target, idx, aug_seed);
      rec = value_and_grad(out.model, data.batch(idx), loss, &mix);
    } else {
      rec = value_and_grad(out.model, data.batch(idx), loss);
    }
    auto params = out.model.parameters();
    optimizer_step(params, rec.grads, opt, cfg.optimizer, mask);
    return rec;
  };

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch % cfg.refresh_interval == 0) {
      pseudo = detail::refresh_pseudo_labels(out.model, adapt_data, producer, pl_rounds.substream(epoch).next_u64());
    }
    detail::StepTotals totals;
    for (const auto& idx : detail::epoch_batches(target.size(), cfg.batch_size, shuffle.substream(epoch))) {
      totals.add(step_on(adapt_data, idx, producer, augment.substream(step).next_u64()));
      ++step;
    }
    TrainLogRow row = totals.row(epoch + 1);
    if (probe) row.tgt_acc = probe->measure(out.model);
    out.log.rows.push_back(row);
  }
  out.adaptation_steps = step;

  // Finetune on the original target domain.
  out.finetune_steps = cfg.finetune_steps(step);
  if (out.finetune_steps > 0) {
    pseudo = detail::refresh_pseudo_labels(out.model, target, nullptr, 0);
    const Rng ft_shuffle = root.substream("finetune");
    detail::StepTotals totals;
    std::size_t done = 0;
    for (std::size_t round = 0; done < out.finetune_steps; ++round) {
      for (const auto& idx : detail::epoch_batches(target.size(), cfg.batch_size, ft_shuffle.substream(round))) {
        if (done == out.finetune_steps) break;
        totals.add(step_on(target, idx, nullptr, 0));
        ++done;
      }
    }
    TrainLogRow row = totals.row(cfg.epochs + 1);
    if (probe) row.tgt_acc = probe->measure(out.model);
    out.log.rows.push_back(row);
  }
  out.log.wall_seconds = detail::seconds_since(t0);
  return out;
}

}  // namespace gmx
