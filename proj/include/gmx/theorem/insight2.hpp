#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "gmx/metrics/tradeoff.hpp"
#include "gmx/synthdata/benchmark.hpp"
#include "gmx/synthdata/io.hpp"

namespace gmx {

struct Insight2Seed {
  std::uint64_t seed = 0;
  MetricsReport mixup;
  MetricsReport original;
};

/// d_H + kappa of the mixup domains (lhs) against the original domains
/// (rhs), averaged over seeds, each pair measured on one frozen backbone
/// trained on the source mixup domain.
struct Insight2Report {
  double lambda = 0.0;
  MixupMode mode = MixupMode::Feature;
  double tolerance = 0.02;
  std::vector<Insight2Seed> per_seed;
  double lhs = 0.0;
  double rhs = 0.0;

  double difference() const { return lhs - rhs; }
  bool pass() const { return lhs <= rhs + tolerance; }
};

inline Insight2Report insight2_check(const BenchmarkSpec& bench, const TradeoffConfig& cfg, MixupMode mode,
                                     double lambda, const std::vector<std::uint64_t>& seeds, double tolerance = 0.02) {
  check_lambda(lambda, "insight2");
  if (seeds.empty()) throw ConfigError("insight2: need at least one seed");
  Insight2Report report;
  report.lambda = lambda;
  report.mode = mode;
  report.tolerance = tolerance;
  for (std::uint64_t seed : seeds) {
    const BenchmarkData data = make_benchmark(bench, seed);
    MixupConfig mix = cfg.pipeline.vendor.mixup.value_or(MixupConfig{});
    mix.mode = mode;
    mix.lambda = lambda;
    VendorConfig vendor = cfg.pipeline.vendor;
    vendor.mixup = mix;
    vendor.seed = Rng(seed).substream("vendor").next_u64();
    const ModelBundle model = vendor_train(data.source_train, vendor).model;
    Insight2Seed s;
    s.seed = seed;
    std::tie(s.mixup, s.original) = measure_model(model, data, mix, cfg, seed);
    report.lhs += s.mixup.d_H + s.mixup.kappa;
    report.rhs += s.original.d_H + s.original.kappa;
    report.per_seed.push_back(s);
  }
  report.lhs /= static_cast<double>(seeds.size());
  report.rhs /= static_cast<double>(seeds.size());
  return report;
}

inline std::string insight2_csv(const Insight2Report& r) {
  std::string out = "lambda,mode,seed,dH_mix,kappa_mix,dH_orig,kappa_orig,lhs,rhs\n";
  for (const Insight2Seed& s : r.per_seed) {
    out += format_fixed(r.lambda) + ',' + std::string(to_string(r.mode)) + ',' + std::to_string(s.seed) + ',' +
           format_fixed(s.mixup.d_H) + ',' + format_fixed(s.mixup.kappa) + ',' + format_fixed(s.original.d_H) + ',' +
           format_fixed(s.original.kappa) + ',' + format_fixed(s.mixup.d_H + s.mixup.kappa) + ',' +
           format_fixed(s.original.d_H + s.original.kappa) + '\n';
  }
  return out;
}

inline std::string insight2_summary(const Insight2Report& r) {
  std::ostringstream os;
  os << (r.pass() ? "PASS" : "FAIL") << " insight2 mode=" << to_string(r.mode) << " lambda=" << format_fixed(r.lambda)
     << ": mixup d_H+kappa " << format_fixed(r.lhs) << " vs original " << format_fixed(r.rhs) << " (tolerance "
     << format_fixed(r.tolerance) << ")\n";
  return os.str();
}

}  // namespace gmx
