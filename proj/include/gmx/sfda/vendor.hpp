#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gmx/generic/mixup.hpp"
#include "gmx/numerics/grad.hpp"
#include "gmx/numerics/mlp.hpp"
#include "gmx/numerics/optimizer.hpp"
#include "gmx/numerics/rng.hpp"
#include "gmx/sfda/evaluate.hpp"
#include "gmx/sfda/train_log.hpp"
#include "gmx/synthdata/dataset.hpp"

namespace gmx {

/// Backbone h: input -> hidden... -> feat_dim (activation after every
/// layer). Classifier f_c: feat_dim -> classes, linear.
struct ModelConfig {
  std::vector<std::size_t> hidden = {64};
  std::size_t feat_dim = 32;
  Activation activation = Activation::Relu;

  void validate() const {
    if (feat_dim == 0) throw ConfigError("model: feat_dim must be positive");
    for (std::size_t h : hidden) {
      if (h == 0) throw ConfigError("model: hidden widths must be positive");
    }
  }
};

inline ModelBundle build_model(const ModelConfig& cfg, std::size_t input_dim, int classes, Rng rng) {
  cfg.validate();
  if (classes < 2) throw ConfigError("model: need at least two classes");
  std::vector<std::size_t> widths = {input_dim};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(cfg.feat_dim);
  const MlpSpec backbone = make_mlp_spec(widths, cfg.activation, cfg.activation);
  const MlpSpec classifier =
      make_mlp_spec({cfg.feat_dim, static_cast<std::size_t>(classes)}, Activation::Identity, Activation::Identity, true);
  return init_model(backbone, classifier, rng);
}

namespace detail {

/// Shuffled minibatches of [0, n) for one epoch.
inline std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size, Rng rng) {
  const std::vector<std::size_t> order = rng.permutation(n);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    out.emplace_back(order.begin() + static_cast<long>(start), order.begin() + static_cast<long>(end));
  }
  return out;
}

inline std::size_t batches_per_epoch(std::size_t n, std::size_t batch_size) {
  return (n + batch_size - 1) / batch_size;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

struct VendorConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  OptimizerConfig optimizer;
  double label_smoothing = 0.1;
  std::optional<MixupConfig> mixup = MixupConfig{};  // nullopt: plain supervised training
  ModelConfig model;
  std::uint64_t seed = 1;

  void validate() const {
    if (epochs == 0) throw ConfigError("vendor: epochs must be positive");
    if (batch_size == 0) throw ConfigError("vendor: batch_size must be positive");
    if (label_smoothing < 0.0 || label_smoothing >= 1.0) throw ConfigError("vendor: label_smoothing must lie in [0,1)");
    optimizer.validate();
    model.validate();
    if (mixup) mixup->validate();
  }
};

struct VendorResult {
  ModelBundle model;
  TrainLog log;
};

/// Supervised training of h and f_c on the source mixup domain D_{s_m}.
/// Randomness is split into independent substreams (init, shuffle,
/// augment) so that a lambda = 0 run reproduces plain training bitwise.
inline VendorResult vendor_train(const DomainDataset& source, const VendorConfig& cfg,
                                 const EvalProbe* probe = nullptr) {
  cfg.validate();
  if (!is_source_like(source.role)) throw RoleError("vendor_train: dataset role is not source-like");
  if (source.size() == 0) throw DimensionError("vendor_train: empty source dataset");
  const std::vector<int> labels = source.labels();  // throws RoleError on unlabeled data
  const auto t0 = std::chrono::steady_clock::now();
  const Rng root(cfg.seed);

  std::optional<MixupDomain> mixed;
  if (cfg.mixup) mixed = build_mixup_dataset(source, *cfg.mixup);
  const DomainDataset& train_data =
      mixed && std::holds_alternative<DomainDataset>(*mixed) ? std::get<DomainDataset>(*mixed) : source;
  const FeatureMixupProducer* producer = mixed ? std::get_if<FeatureMixupProducer>(&*mixed) : nullptr;

  VendorResult out{build_model(cfg.model, source.kind.flat_size(), source.class_count, root.substream("init")), {}};
  OptimizerState opt;
  const Rng shuffle = root.substream("shuffle");
  const Rng augment = root.substream("augment");
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double total = 0.0;
    const auto batches = detail::epoch_batches(source.size(), cfg.batch_size, shuffle.substream(epoch));
    for (const auto& idx : batches) {
      CrossEntropyLoss loss{{}, cfg.label_smoothing};
      for (std::size_t i : idx) loss.labels.push_back(labels[i]);
      const Tensor batch = train_data.batch(idx);
      GradientRecord rec;
      if (producer) {
        const MixedFeatures mix = producer->mixed_features(source, idx, augment.substream(step).next_u64());
        rec = value_and_grad(out.model, batch, loss, &mix);
      } else {
        rec = value_and_grad(out.model, batch, loss);
      }
      auto params = out.model.parameters();
      optimizer_step(params, rec.grads, opt, cfg.optimizer);
      total += rec.loss;
      ++step;
    }
    TrainLogRow row;
    row.epoch = epoch + 1;
    row.loss_total = total / static_cast<double>(batches.size());
    row.src_acc = evaluate(out.model, source);
    if (probe) row.tgt_acc = probe->measure(out.model);
    out.log.rows.push_back(row);
  }
  out.log.wall_seconds = detail::seconds_since(t0);
  return out;
}

}  // namespace gmx
