#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmx/numerics/grad.hpp"
#include "gmx/numerics/loss.hpp"
#include "gmx/numerics/mlp.hpp"
#include "gmx/numerics/optimizer.hpp"
#include "gmx/numerics/rng.hpp"

namespace gmx {

enum class HypothesisFamily { Linear, Mlp };

inline std::string_view to_string(HypothesisFamily f) { return f == HypothesisFamily::Linear ? "linear" : "mlp"; }

inline HypothesisFamily parse_family(std::string_view s) {
  if (s == "linear") return HypothesisFamily::Linear;
  if (s == "mlp") return HypothesisFamily::Mlp;
  throw ConfigError("unknown hypothesis family '" + std::string(s) + "'");
}

/// Hypothesis class and training budget used to approximate the sup/min
/// over H. Every original-vs-mixup comparison uses one instance of this.
struct DomainClassifierConfig {
  HypothesisFamily family = HypothesisFamily::Linear;
  std::vector<std::size_t> hidden = {32};  // mlp family only
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double lr = 0.01;
  double eval_fraction = 0.5;
  std::uint64_t seed = 7;

  void validate() const {
    if (epochs == 0) throw ConfigError("classifier: epochs must be positive");
    if (batch_size == 0) throw ConfigError("classifier: batch_size must be positive");
    if (!(lr > 0.0)) throw ConfigError("classifier: lr must be positive");
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0)) throw ConfigError("classifier: eval_fraction must lie in (0,1)");
    if (family == HypothesisFamily::Mlp && hidden.empty()) throw ConfigError("classifier: mlp family needs hidden widths");
  }
};

/// Softmax classifier on standardized features.
struct FeatureClassifier {
  std::vector<double> mean;
  std::vector<double> scale;
  Mlp net;

  Tensor standardize(const Tensor& feats) const {
    if (feats.rank() != 2 || feats.cols() != mean.size()) {
      throw DimensionError("classifier: expected " + std::to_string(mean.size()) + " feature columns, got shape " +
                           shape_string(feats.shape()));
    }
    Tensor out = feats;
    for (std::size_t i = 0; i < out.rows(); ++i) {
      auto r = out.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) r[j] = (r[j] - mean[j]) / scale[j];
    }
    return out;
  }

  Tensor logits(const Tensor& feats) const { return mlp_forward(net, standardize(feats), nullptr, "classifier"); }
  std::vector<int> predict(const Tensor& feats) const { return argmax_rows(logits(feats)); }
};

/// Minibatch Adam on unsmoothed cross-entropy.
inline FeatureClassifier train_feature_classifier(const Tensor& feats, std::span<const int> labels, int classes,
                                                  const DomainClassifierConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (feats.rank() != 2 || feats.rows() == 0) throw DimensionError("classifier: need a non-empty feature matrix");
  if (labels.size() != feats.rows()) throw DimensionError("classifier: labels do not match features");
  const std::size_t n = feats.rows(), d = feats.cols();
  FeatureClassifier clf;
  clf.mean.assign(d, 0.0);
  clf.scale.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) clf.mean[j] += feats(i, j);
  }
  for (double& m : clf.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) clf.scale[j] += (feats(i, j) - clf.mean[j]) * (feats(i, j) - clf.mean[j]);
  }
  for (double& s : clf.scale) {
    s = std::sqrt(s / static_cast<double>(n));
    if (!(s > 1e-12)) s = 1.0;
  }

  std::vector<std::size_t> widths = {d};
  if (cfg.family == HypothesisFamily::Mlp) widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(static_cast<std::size_t>(classes));
  Rng root(seed);
  Rng init = root.substream("init");
  clf.net = init_mlp(make_mlp_spec(widths, Activation::Relu, Activation::Identity, true), init);

  const Tensor x = clf.standardize(feats);
  OptimizerConfig opt_cfg{OptimizerKind::Adam, cfg.lr};
  OptimizerState opt;
  const Rng shuffle = root.substream("shuffle");
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<std::size_t> order = shuffle.substream(epoch).permutation(n);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      CrossEntropyLoss loss{{}, 0.0};
      for (std::size_t i : idx) loss.labels.push_back(labels[i]);
      MlpCache cache;
      const Tensor logits = mlp_forward(clf.net, gather_rows(x, idx), &cache, "domain classifier");
      LossValue value = evaluate_loss(logits, loss);
      std::vector<Tensor> grads;
      std::vector<Tensor*> params;
      for (DenseLayer& layer : clf.net.layers) {
        grads.emplace_back(layer.weight.shape());
        grads.emplace_back(layer.bias.shape());
        params.push_back(&layer.weight);
        params.push_back(&layer.bias);
      }
      mlp_backward(clf.net, cache, std::move(value.grad_logits), grads, 0, false);
      optimizer_step(params, grads, opt, opt_cfg);
    }
  }
  return clf;
}

/// Fraction of predictions that differ from `truth`.
inline double error_rate(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size() || truth.empty()) throw DimensionError("error rate: size mismatch");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

}  // namespace gmx
