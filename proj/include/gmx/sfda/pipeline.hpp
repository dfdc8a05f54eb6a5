#pragma once

#include <cstdint>

#include "gmx/numerics/rng.hpp"
#include "gmx/sfda/client.hpp"
#include "gmx/sfda/evaluate.hpp"
#include "gmx/sfda/vendor.hpp"
#include "gmx/synthdata/benchmark.hpp"

namespace gmx {

struct PipelineConfig {
  VendorConfig vendor;
  ClientConfig client;
  bool run_client = true;
};

struct PipelineResult {
  ModelBundle vendor_model;
  ModelBundle adapted_model;
  TrainLog vendor_log;
  TrainLog client_log;
  double source_acc = 0.0;         // vendor model, source eval split
  double target_acc_before = 0.0;  // vendor model, target eval split
  double target_acc_after = 0.0;   // adapted model (vendor model when the client is skipped)
};

/// Vendor training on the source train split, client adaptation on the
/// unlabeled target train split, evaluation on both eval splits. The vendor
/// and client seeds are derived from `seed`.
inline PipelineResult run_pipeline(const BenchmarkData& data, const PipelineConfig& cfg, std::uint64_t seed) {
  const Rng root(seed);
  VendorConfig vendor = cfg.vendor;
  vendor.seed = root.substream("vendor").next_u64();
  ClientConfig client = cfg.client;
  client.seed = root.substream("client").next_u64();

  const EvalProbe probe(data.target_eval, data.target_eval_labels);
  PipelineResult out;
  VendorResult v = vendor_train(data.source_train, vendor, &probe);
  out.vendor_model = v.model;
  out.vendor_log = std::move(v.log);
  out.source_acc = evaluate(out.vendor_model, data.source_eval);
  out.target_acc_before = probe.measure(out.vendor_model);
  if (cfg.run_client) {
    ClientResult c = client_adapt(out.vendor_model, data.target_train, client, &probe);
    out.adapted_model = std::move(c.model);
    out.client_log = std::move(c.log);
  } else {
    out.adapted_model = out.vendor_model;
  }
  out.target_acc_after = probe.measure(out.adapted_model);
  return out;
}

}  // namespace gmx
