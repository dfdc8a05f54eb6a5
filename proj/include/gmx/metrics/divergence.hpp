#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gmx/metrics/classifier.hpp"
#include "gmx/numerics/error.hpp"
#include "gmx/numerics/rng.hpp"
#include "gmx/numerics/tensor.hpp"

namespace gmx {

struct DivergenceEstimate {
  double d_H = 0.0;
  double stderr_ = 0.0;
  double rate_source = 0.0;  // fraction of source samples classified as target
  double rate_target = 0.0;
  std::size_t n_source = 0;
  std::size_t n_target = 0;
};

struct KappaEstimate {
  double kappa = 0.0;
  double eps_s = 0.0;
  double eps_t = 0.0;
  double stderr_ = 0.0;
  std::size_t n_source = 0;
  std::size_t n_target = 0;
};

struct Gammas {
  double gamma_T = 0.0;
  double gamma_D = 0.0;
};

/// gamma_T = 1 - d_H, gamma_D = 1 - kappa / 2.
inline Gammas gammas(double d_H, double kappa) {
  if (!(d_H >= 0.0 && d_H <= 1.0)) throw ConfigError("gammas: d_H must lie in [0,1], got " + std::to_string(d_H));
  if (!(kappa >= 0.0 && kappa <= 2.0)) throw ConfigError("gammas: kappa must lie in [0,2], got " + std::to_string(kappa));
  return {1.0 - d_H, 1.0 - 0.5 * kappa};
}

/// Terms of the target-risk bound and the derived trade-off metrics.
struct MetricsReport {
  double d_H = 0.0;
  double kappa = 0.0;
  double gamma_T = 1.0;
  double gamma_D = 1.0;
  double eps_s = 0.0;
  double eps_t = 0.0;
  double bound = 0.0;  // eps_s + d_H + kappa
  double stderr_dH = 0.0;
  double stderr_kappa = 0.0;
  std::size_t n_source = 0;
  std::size_t n_target = 0;
  std::uint64_t seed = 0;
};

inline MetricsReport make_report(const DivergenceEstimate& d, const KappaEstimate& k, double eps_s, double eps_t,
                                 std::uint64_t seed) {
  const Gammas g = gammas(d.d_H, k.kappa);
  MetricsReport r;
  r.d_H = d.d_H;
  r.kappa = k.kappa;
  r.gamma_T = g.gamma_T;
  r.gamma_D = g.gamma_D;
  r.eps_s = eps_s;
  r.eps_t = eps_t;
  r.bound = eps_s + d.d_H + k.kappa;
  r.stderr_dH = d.stderr_;
  r.stderr_kappa = k.stderr_;
  r.n_source = d.n_source;
  r.n_target = d.n_target;
  r.seed = seed;
  return r;
}

namespace detail {

inline void require_features(const Tensor& a, const Tensor& b, std::string_view op) {
  if (a.rank() != 2 || b.rank() != 2) throw DimensionError(std::string(op) + ": features must be matrices");
  if (a.rows() == 0 || b.rows() == 0) throw DimensionError(std::string(op) + ": empty feature set");
  if (a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": feature dims differ (" + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()) + ")");
  }
}

/// Random partition of [0, n) into (train, eval) with eval_fraction held out.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> holdout(std::size_t n, double eval_fraction,
                                                                             Rng rng) {
  std::vector<std::size_t> order = rng.permutation(n);
  auto n_eval = static_cast<std::size_t>(std::llround(eval_fraction * static_cast<double>(n)));
  n_eval = std::clamp<std::size_t>(n_eval, 1, n > 1 ? n - 1 : 1);
  std::vector<std::size_t> eval(order.begin(), order.begin() + static_cast<long>(n_eval));
  std::vector<std::size_t> train(order.begin() + static_cast<long>(n_eval), order.end());
  std::sort(train.begin(), train.end());
  std::sort(eval.begin(), eval.end());
  return {train, eval};
}

inline std::vector<int> gather(std::span<const int> v, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

inline int infer_classes(std::span<const int> a, std::span<const int> b) {
  int c = 0;
  for (std::span<const int> v : {a, b}) {
    for (int y : v) {
      if (y < 0) throw ConfigError("labels must be non-negative");
      c = std::max(c, y + 1);
    }
  }
  return std::max(c, 2);
}

}  // namespace detail

/// Binary domain classifier (label 1 = target) trained on equally many
/// source and target rows; the larger set is subsampled.
inline FeatureClassifier fit_domain_classifier(const Tensor& feats_source, const Tensor& feats_target,
                                               const DomainClassifierConfig& cfg) {
  detail::require_features(feats_source, feats_target, "domain classifier");
  const Rng root(cfg.seed);
  const std::size_t m = std::min(feats_source.rows(), feats_target.rows());
  auto pick = [&](const Tensor& f, std::string_view label) {
    if (f.rows() == m) return f;
    std::vector<std::size_t> idx = root.substream(label).permutation(f.rows());
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    return gather_rows(f, idx);
  };
  const Tensor x = concat_rows(pick(feats_source, "balance-source"), pick(feats_target, "balance-target"));
  std::vector<int> y(2 * m, 0);
  std::fill(y.begin() + static_cast<long>(m), y.end(), 1);
  return train_feature_classifier(x, y, 2, cfg, root.substream("domain").next_u64());
}

/// |Pr_t[f_d = 1] - Pr_s[f_d = 1]| on held-out features, with binomial stderr.
inline DivergenceEstimate estimate_dH(const FeatureClassifier& clf, const Tensor& feats_source,
                                      const Tensor& feats_target) {
  detail::require_features(feats_source, feats_target, "estimate_dH");
  auto rate = [&](const Tensor& f) {
    const std::vector<int> p = clf.predict(f);
    return static_cast<double>(std::count(p.begin(), p.end(), 1)) / static_cast<double>(p.size());
  };
  DivergenceEstimate e;
  e.rate_source = rate(feats_source);
  e.rate_target = rate(feats_target);
  e.n_source = feats_source.rows();
  e.n_target = feats_target.rows();
  e.d_H = std::clamp(std::abs(e.rate_target - e.rate_source), 0.0, 1.0);
  e.stderr_ = std::sqrt(e.rate_source * (1.0 - e.rate_source) / static_cast<double>(e.n_source) +
                        e.rate_target * (1.0 - e.rate_target) / static_cast<double>(e.n_target));
  return e;
}

/// Held-out d_H: each side is split by cfg.eval_fraction, the classifier is
/// fit on the training parts and evaluated on the rest.
inline DivergenceEstimate domain_divergence(const Tensor& feats_source, const Tensor& feats_target,
                                            const DomainClassifierConfig& cfg) {
  detail::require_features(feats_source, feats_target, "domain divergence");
  const Rng root(cfg.seed);
  const auto [s_train, s_eval] = detail::holdout(feats_source.rows(), cfg.eval_fraction, root.substream("holdout-s"));
  const auto [t_train, t_eval] = detail::holdout(feats_target.rows(), cfg.eval_fraction, root.substream("holdout-t"));
  const FeatureClassifier clf =
      fit_domain_classifier(gather_rows(feats_source, s_train), gather_rows(feats_target, t_train), cfg);
  return estimate_dH(clf, gather_rows(feats_source, s_eval), gather_rows(feats_target, t_eval));
}

/// kappa from explicit train/eval parts: one task classifier trained on the
/// union of both training parts, kappa = eps_s + eps_t on the eval parts.
inline KappaEstimate estimate_kappa_split(const Tensor& train_s, std::span<const int> y_train_s, const Tensor& train_t,
                                          std::span<const int> y_train_t, const Tensor& eval_s,
                                          std::span<const int> y_eval_s, const Tensor& eval_t,
                                          std::span<const int> y_eval_t, const DomainClassifierConfig& cfg) {
  detail::require_features(train_s, train_t, "estimate_kappa");
  detail::require_features(eval_s, eval_t, "estimate_kappa");
  if (y_train_t.empty() || y_eval_t.empty()) throw RoleError("estimate_kappa: missing target eval labels");
  if (y_train_s.size() != train_s.rows() || y_train_t.size() != train_t.rows() || y_eval_s.size() != eval_s.rows() ||
      y_eval_t.size() != eval_t.rows()) {
    throw DimensionError("estimate_kappa: labels do not match features");
  }
  const int classes = std::max(detail::infer_classes(y_train_s, y_train_t), detail::infer_classes(y_eval_s, y_eval_t));
  std::vector<int> y(y_train_s.begin(), y_train_s.end());
  y.insert(y.end(), y_train_t.begin(), y_train_t.end());
  const FeatureClassifier clf = train_feature_classifier(concat_rows(train_s, train_t), y, classes, cfg,
                                                         Rng(cfg.seed).substream("joint").next_u64());
  KappaEstimate k;
  k.eps_s = error_rate(clf.predict(eval_s), y_eval_s);
  k.eps_t = error_rate(clf.predict(eval_t), y_eval_t);
  k.kappa = std::clamp(k.eps_s + k.eps_t, 0.0, 2.0);
  k.n_source = eval_s.rows();
  k.n_target = eval_t.rows();
  k.stderr_ = std::sqrt(k.eps_s * (1.0 - k.eps_s) / static_cast<double>(k.n_source) +
                        k.eps_t * (1.0 - k.eps_t) / static_cast<double>(k.n_target));
  return k;
}

/// Held-out kappa with an internal split of each domain.
inline KappaEstimate estimate_kappa(const Tensor& feats_source, std::span<const int> labels_source,
                                    const Tensor& feats_target, std::span<const int> labels_target,
                                    const DomainClassifierConfig& cfg) {
  if (labels_target.empty()) throw RoleError("estimate_kappa: missing target eval labels");
  detail::require_features(feats_source, feats_target, "estimate_kappa");
  if (labels_source.size() != feats_source.rows() || labels_target.size() != feats_target.rows()) {
    throw DimensionError("estimate_kappa: labels do not match features");
  }
  const Rng root(cfg.seed);
  const auto [s_train, s_eval] = detail::holdout(feats_source.rows(), cfg.eval_fraction, root.substream("holdout-s"));
  const auto [t_train, t_eval] = detail::holdout(feats_target.rows(), cfg.eval_fraction, root.substream("holdout-t"));
  return estimate_kappa_split(gather_rows(feats_source, s_train), detail::gather(labels_source, s_train),
                              gather_rows(feats_target, t_train), detail::gather(labels_target, t_train),
                              gather_rows(feats_source, s_eval), detail::gather(labels_source, s_eval),
                              gather_rows(feats_target, t_eval), detail::gather(labels_target, t_eval), cfg);
}

}  // namespace gmx
