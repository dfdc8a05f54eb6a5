#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "gmx/generic/mixup.hpp"
#include "gmx/metrics/classifier.hpp"
#include "gmx/metrics/divergence.hpp"
#include "gmx/sfda/pipeline.hpp"
#include "gmx/synthdata/benchmark.hpp"
#include "gmx/synthdata/io.hpp"

namespace gmx {

struct TradeoffConfig {
  PipelineConfig pipeline;
  DomainClassifierConfig domain_classifier;
  DomainClassifierConfig task_classifier;
};

/// One lambda of the curve. `mixup` holds the metrics of the mixup domains,
/// `original` those of the original domains, both measured on the same
/// frozen vendor backbone with the same hypothesis class.
struct TradeoffRow {
  double lambda = 0.0;
  MixupMode mode = MixupMode::Edge;
  MetricsReport mixup;
  MetricsReport original;
  double source_acc = 0.0;
  double target_acc_before = 0.0;
  double target_acc = 0.0;  // after adaptation when the client runs
  std::uint64_t seed = 0;
};

/// Backbone features of each domain split, original and mixup.
struct DomainFeatures {
  Tensor source_train, target_train, source_eval, target_eval;
};

namespace detail {

inline Tensor mixup_features(const ModelBundle& model, const DomainDataset& ds, const MixupConfig& mix,
                             std::uint64_t round_seed) {
  MixupDomain d = build_mixup_dataset(ds, mix);
  if (const auto* producer = std::get_if<FeatureMixupProducer>(&d)) {
    return producer->features(model, ds, {}, round_seed).z_m;
  }
  return mlp_forward(model.backbone, std::get<DomainDataset>(d).batch(), nullptr, "backbone");
}

inline double classifier_error(const ModelBundle& model, const Tensor& features, std::span<const int> truth) {
  return error_rate(argmax_rows(mlp_forward(model.classifier, features, nullptr, "classifier")), truth);
}

}  // namespace detail

inline DomainFeatures original_features(const ModelBundle& model, const BenchmarkData& data) {
  auto h = [&](const DomainDataset& ds) { return mlp_forward(model.backbone, ds.batch(), nullptr, "backbone"); };
  return {h(data.source_train), h(data.target_train), h(data.source_eval), h(data.target_eval)};
}

inline DomainFeatures mixup_domain_features(const ModelBundle& model, const BenchmarkData& data, const MixupConfig& mix,
                                            std::uint64_t seed) {
  const Rng root(seed);
  auto f = [&](const DomainDataset& ds, std::string_view label) {
    return detail::mixup_features(model, ds, mix, root.substream(label).next_u64());
  };
  return {f(data.source_train, "s-train"), f(data.target_train, "t-train"), f(data.source_eval, "s-eval"),
          f(data.target_eval, "t-eval")};
}

/// Metrics of one feature set. d_H uses `domain_clf` (trained elsewhere);
/// kappa trains a joint task classifier on the train parts.
inline MetricsReport measure_domains(const ModelBundle& model, const BenchmarkData& data, const DomainFeatures& f,
                                     const FeatureClassifier& domain_clf, const DomainClassifierConfig& task_cfg,
                                     std::uint64_t seed) {
  const std::vector<int> ys_train = data.source_train.labels(), ys_eval = data.source_eval.labels();
  const DivergenceEstimate d = estimate_dH(domain_clf, f.source_eval, f.target_eval);
  const KappaEstimate k = estimate_kappa_split(f.source_train, ys_train, f.target_train, data.target_train_labels.labels,
                                               f.source_eval, ys_eval, f.target_eval, data.target_eval_labels.labels,
                                               task_cfg);
  return make_report(d, k, detail::classifier_error(model, f.source_eval, ys_eval),
                     detail::classifier_error(model, f.target_eval, data.target_eval_labels.labels), seed);
}

/// Metrics of a frozen model on the original domains and on the mixup
/// domains built with `mix`. The domain classifier is trained on original
/// train features in both cases.
inline std::pair<MetricsReport, MetricsReport> measure_model(const ModelBundle& model, const BenchmarkData& data,
                                                             const std::optional<MixupConfig>& mix,
                                                             const TradeoffConfig& cfg, std::uint64_t seed) {
  DomainClassifierConfig dcfg = cfg.domain_classifier;
  dcfg.seed = Rng(cfg.domain_classifier.seed).substream(seed).next_u64();
  DomainClassifierConfig tcfg = cfg.task_classifier;
  tcfg.seed = Rng(cfg.task_classifier.seed).substream(seed).next_u64();
  const DomainFeatures orig = original_features(model, data);
  const FeatureClassifier domain_clf = fit_domain_classifier(orig.source_train, orig.target_train, dcfg);
  const MetricsReport original = measure_domains(model, data, orig, domain_clf, tcfg, seed);
  if (!mix) return {original, original};
  const DomainFeatures mixed = mixup_domain_features(model, data, *mix, Rng(seed).substream("metrics-mixup").next_u64());
  return {measure_domains(model, data, mixed, domain_clf, tcfg, seed), original};
}

/// Vendor (and optionally client) training at one lambda followed by the
/// frozen-backbone measurements. Vendor and client mixup share `lambda`.
inline TradeoffRow tradeoff_point(const BenchmarkData& data, MixupMode mode, double lambda, const TradeoffConfig& cfg,
                                  std::uint64_t seed) {
  check_lambda(lambda, "tradeoff");
  PipelineConfig pc = cfg.pipeline;
  MixupConfig mix = pc.vendor.mixup.value_or(MixupConfig{});
  mix.mode = mode;
  mix.lambda = lambda;
  pc.vendor.mixup = mix;
  MixupConfig client_mix = pc.client.mixup.value_or(mix);
  client_mix.mode = mode;
  client_mix.lambda = lambda;
  pc.client.mixup = client_mix;
  const PipelineResult r = run_pipeline(data, pc, seed);
  TradeoffRow row;
  row.lambda = lambda;
  row.mode = mode;
  row.seed = seed;
  std::tie(row.mixup, row.original) = measure_model(r.vendor_model, data, mix, cfg, seed);
  row.source_acc = r.source_acc;
  row.target_acc_before = r.target_acc_before;
  row.target_acc = r.target_acc_after;
  return row;
}

/// Rows in grid order, one per lambda.
inline std::vector<TradeoffRow> tradeoff_curve(const BenchmarkData& data, MixupMode mode,
                                               std::span<const double> lambda_grid, const TradeoffConfig& cfg,
                                               std::uint64_t seed) {
  if (lambda_grid.empty()) throw ConfigError("tradeoff: lambda grid is empty");
  for (double l : lambda_grid) check_lambda(l, "tradeoff");
  std::vector<TradeoffRow> rows;
  for (double l : lambda_grid) rows.push_back(tradeoff_point(data, mode, l, cfg, seed));
  return rows;
}

inline std::string metrics_csv_header() { return "lambda,mode,gamma_T,gamma_D,d_H,kappa,eps_s,eps_t,target_acc,seed\n"; }

inline std::string metrics_csv_row(double lambda, MixupMode mode, const MetricsReport& m, double target_acc,
                                   std::uint64_t seed) {
  return format_fixed(lambda) + ',' + std::string(to_string(mode)) + ',' + format_fixed(m.gamma_T) + ',' +
         format_fixed(m.gamma_D) + ',' + format_fixed(m.d_H) + ',' + format_fixed(m.kappa) + ',' +
         format_fixed(m.eps_s) + ',' + format_fixed(m.eps_t) + ',' + format_fixed(target_acc) + ',' +
         std::to_string(seed) + '\n';
}

inline std::string tradeoff_csv(std::span<const TradeoffRow> rows) {
  std::string out = metrics_csv_header();
  for (const TradeoffRow& r : rows) out += metrics_csv_row(r.lambda, r.mode, r.mixup, r.target_acc, r.seed);
  return out;
}

}  // namespace gmx
