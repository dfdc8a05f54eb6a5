#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmx/cli/config.hpp"
#include "gmx/metrics/tradeoff.hpp"
#include "gmx/numerics/checkpoint.hpp"
#include "gmx/sfda/pipeline.hpp"
#include "gmx/synthdata/benchmark.hpp"
#include "gmx/synthdata/io.hpp"
#include "gmx/theorem/insight2.hpp"
#include "gmx/theorem/lab.hpp"

namespace gmx {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitAssumption = 3 };

/// Command-line flags shared by every subcommand. Overrides are applied on
/// top of the config file and recorded in the manifest.
struct CliOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> seeds;
  std::optional<std::vector<double>> lambda_grid;
};

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return out;
}

struct ManifestFile {
  std::string path;  // relative to the output directory
  std::uint64_t bytes = 0;
  std::string fnv1a;
};

struct ManifestAssertion {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Record of one run: what went in, what came out, how long it took.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::map<std::string, std::string> overrides;
  std::vector<ManifestFile> files;
  std::vector<std::pair<std::string, double>> timings;
  std::vector<ManifestAssertion> assertions;

  bool all_pass() const {
    for (const ManifestAssertion& a : assertions) {
      if (!a.pass) return false;
    }
    return true;
  }

  std::string to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["seeds"] = seeds;
    j["overrides"] = overrides;
    j["files"] = nlohmann::ordered_json::array();
    for (const ManifestFile& f : files) j["files"].push_back({{"path", f.path}, {"bytes", f.bytes}, {"fnv1a", f.fnv1a}});
    j["timings_seconds"] = nlohmann::ordered_json::object();
    for (const auto& [name, s] : timings) j["timings_seconds"][name] = s;
    j["assertions"] = nlohmann::ordered_json::array();
    for (const ManifestAssertion& a : assertions) {
      j["assertions"].push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
    }
    j["all_pass"] = all_pass();
    return j.dump(2) + "\n";
  }
};

/// Output directory plus the manifest being assembled for it.
class RunContext {
 public:
  RunContext(std::string command, const CliOptions& opts) : out_(opts.out) {
    manifest_.command = std::move(command);
    if (out_.empty()) throw ConfigError("--out is required");
    std::error_code ec;
    std::filesystem::create_directories(out_, ec);
    if (ec || !std::filesystem::is_directory(out_)) {
      throw IoError("cannot create output directory " + out_.string());
    }
    config_text_ = read_text_file(opts.config);
    manifest_.config_hash = hex64(fnv1a64(config_text_));
    config_ = parse_config(config_text_, opts.config.parent_path());
    if (opts.seed) {
      config_.seed = *opts.seed;
      manifest_.overrides["seed"] = std::to_string(*opts.seed);
    }
    if (opts.seeds) {
      if (*opts.seeds == 0) throw ConfigError("--seeds must be at least 1");
      config_.seeds = *opts.seeds;
      manifest_.overrides["seeds"] = std::to_string(*opts.seeds);
    }
    if (opts.lambda_grid) {
      if (opts.lambda_grid->empty()) throw ConfigError("--lambda-grid is empty");
      for (double l : *opts.lambda_grid) check_lambda(l, "--lambda-grid");
      config_.lambda_grid = *opts.lambda_grid;
      config_.theorem.lambda_grid = *opts.lambda_grid;
      std::string joined;
      for (double l : *opts.lambda_grid) joined += (joined.empty() ? "" : ",") + format_double(l);
      manifest_.overrides["lambda_grid"] = joined;
    }
    manifest_.seeds = config_.seed_list();
    write("config.cfg", config_text_, false);
  }

  const ExperimentConfig& config() const { return config_; }
  RunManifest& manifest() { return manifest_; }
  const std::filesystem::path& out() const { return out_; }

  /// Writes `rel` under the output directory and lists it in the manifest.
  void write(const std::string& rel, const std::string& bytes, bool list = true) {
    const std::filesystem::path p = out_ / rel;
    if (p.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(p.parent_path(), ec);
      if (ec) throw IoError("cannot create directory " + p.parent_path().string());
    }
    write_text_file(p, bytes);
    if (list) manifest_.files.push_back({rel, bytes.size(), hex64(fnv1a64(bytes))});
  }

  void checkpoint(const std::string& rel, const ModelBundle& model) { write(rel, encode_checkpoint(model.parameters())); }

  void assertion(std::string name, bool pass, std::string detail) {
    manifest_.assertions.push_back({std::move(name), pass, std::move(detail)});
  }

  template <class F>
  auto timed(const std::string& name, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&] {
      manifest_.timings.emplace_back(name,
                                     std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    };
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      finish();
    } else {
      auto r = fn();
      finish();
      return r;
    }
  }

  /// File name inside the per-seed subdirectory, or at top level for a
  /// single-seed run.
  std::string seeded(std::uint64_t seed, const std::string& name) const {
    return config_.seeds == 1 ? name : "seed_" + std::to_string(seed) + "/" + name;
  }

  int finish() {
    write_text_file(out_ / "manifest.json", manifest_.to_json());
    return manifest_.all_pass() ? kExitOk : kExitFailure;
  }

 private:
  std::filesystem::path out_;
  std::string config_text_;
  ExperimentConfig config_;
  RunManifest manifest_;
};

/// Benchmark domains for one seed: loaded from data.* files when the config
/// names them, generated otherwise.
inline BenchmarkDomains load_or_generate(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (!cfg.data_source) return generate_domains(cfg.benchmark, seed);
  BenchmarkDomains d;
  d.source = load_dataset(*cfg.data_source);
  d.target = load_dataset(*cfg.data_target, d.source.class_count);
  d.target_labels = decode_eval_labels(read_text_file(*cfg.data_target_labels));
  if (d.source.role != DomainRole::Source || !d.source.has_labels()) {
    throw IoError("data.source: expected a labeled source-role dataset");
  }
  if (is_source_like(d.target.role) || d.target.has_labels()) {
    throw IoError("data.target: expected an unlabeled target-role dataset");
  }
  for (int y : d.target_labels.labels) {
    if (y >= d.source.class_count) throw IoError("data.target_labels: label out of the source class range");
  }
  return d;
}

inline BenchmarkData benchmark_for(const ExperimentConfig& cfg, std::uint64_t seed) {
  return split_benchmark(load_or_generate(cfg, seed), cfg.benchmark.train_fraction, seed);
}

inline std::string accuracy_csv_header() { return "seed,source_acc,target_acc_before,target_acc_after\n"; }

inline std::string accuracy_csv_row(std::uint64_t seed, double src, double before, double after) {
  return std::to_string(seed) + ',' + format_fixed(src) + ',' + format_fixed(before) + ',' + format_fixed(after) + '\n';
}

/// gen-data: source and target datasets plus the target eval-label sidecar.
inline int cmd_gen_data(const CliOptions& opts) {
  RunContext ctx("gen-data", opts);
  const ExperimentConfig& cfg = ctx.config();
  for (std::uint64_t seed : cfg.seed_list()) {
    const BenchmarkDomains d = ctx.timed("generate seed " + std::to_string(seed),
                                         [&] { return generate_domains(cfg.benchmark, seed); });
    ctx.write(ctx.seeded(seed, "source.gmxdata"), encode_dataset(d.source));
    ctx.write(ctx.seeded(seed, "target.gmxdata"), encode_dataset(d.target));
    ctx.write(ctx.seeded(seed, "target_labels.csv"), encode_eval_labels(d.target_labels));
  }
  return ctx.finish();
}

/// pipeline: vendor training, client adaptation with finetune, evaluation,
/// and the metrics row of the frozen vendor backbone.
inline int cmd_pipeline(const CliOptions& opts) {
  RunContext ctx("pipeline", opts);
  const ExperimentConfig& cfg = ctx.config();
  const PipelineConfig pc = cfg.pipeline();
  const std::optional<MixupConfig> mix = cfg.mixup_enabled ? std::optional<MixupConfig>(cfg.mixup) : std::nullopt;
  std::string metrics = metrics_csv_header(), accuracy = accuracy_csv_header();
  for (std::uint64_t seed : cfg.seed_list()) {
    const std::string tag = "seed " + std::to_string(seed);
    const BenchmarkData data = benchmark_for(cfg, seed);
    const PipelineResult r = ctx.timed("pipeline " + tag, [&] { return run_pipeline(data, pc, seed); });
    const auto [m, orig] = ctx.timed("metrics " + tag, [&] { return measure_model(r.vendor_model, data, mix, cfg.tradeoff, seed); });
    (void)orig;
    metrics += metrics_csv_row(mix ? mix->lambda : 0.0, cfg.mixup.mode, m, r.target_acc_after, seed);
    accuracy += accuracy_csv_row(seed, r.source_acc, r.target_acc_before, r.target_acc_after);
    ctx.write(ctx.seeded(seed, "vendor_log.csv"), train_log_csv(r.vendor_log));
    if (pc.run_client) ctx.write(ctx.seeded(seed, "client_log.csv"), train_log_csv(r.client_log));
    ctx.checkpoint(ctx.seeded(seed, "vendor.ckpt"), r.vendor_model);
    ctx.checkpoint(ctx.seeded(seed, "adapted.ckpt"), r.adapted_model);
  }
  ctx.write("metrics.csv", metrics);
  ctx.write("accuracy.csv", accuracy);
  return ctx.finish();
}

namespace detail {

struct MeanSe {
  double mean = 0.0, se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& v) {
  MeanSe out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return out;
}

}  // namespace detail

inline std::string sweep_summary_header() {
  return "lambda,mode,n_seeds,gamma_T_mean,gamma_T_se,gamma_D_mean,gamma_D_se,d_H_mean,d_H_se,kappa_mean,kappa_se,"
         "source_acc_mean,source_acc_se,target_acc_before_mean,target_acc_before_se,target_acc_mean,target_acc_se\n";
}

/// Per-(mode, lambda) means and standard errors over seeds, in input order.
inline std::string sweep_summary_csv(const std::vector<TradeoffRow>& rows) {
  std::string out = sweep_summary_header();
  std::vector<std::pair<MixupMode, double>> keys;
  for (const TradeoffRow& r : rows) {
    if (std::find(keys.begin(), keys.end(), std::pair{r.mode, r.lambda}) == keys.end()) keys.emplace_back(r.mode, r.lambda);
  }
  for (const auto& [mode, lambda] : keys) {
    std::vector<std::vector<double>> cols(7);
    for (const TradeoffRow& r : rows) {
      if (r.mode != mode || r.lambda != lambda) continue;
      const double vals[] = {r.mixup.gamma_T, r.mixup.gamma_D, r.mixup.d_H, r.mixup.kappa,
                             r.source_acc,    r.target_acc_before, r.target_acc};
      for (std::size_t i = 0; i < cols.size(); ++i) cols[i].push_back(vals[i]);
    }
    out += format_fixed(lambda) + ',' + std::string(to_string(mode)) + ',' + std::to_string(cols[0].size());
    for (const auto& c : cols) {
      const detail::MeanSe s = detail::mean_se(c);
      out += ',' + format_fixed(s.mean) + ',' + format_fixed(s.se);
    }
    out += '\n';
  }
  return out;
}

/// sweep: one pipeline plus metrics evaluation per (mode, lambda, seed);
/// vendor and client share each grid lambda.
inline int cmd_sweep(const CliOptions& opts) {
  RunContext ctx("sweep", opts);
  const ExperimentConfig& cfg = ctx.config();
  if (cfg.lambda_grid.empty()) throw ConfigError("sweep: lambda grid is empty");
  TradeoffConfig tc = cfg.tradeoff;
  tc.pipeline = cfg.pipeline();
  if (!tc.pipeline.vendor.mixup) tc.pipeline.vendor.mixup = cfg.mixup;
  std::map<std::uint64_t, BenchmarkData> data;
  for (std::uint64_t seed : cfg.seed_list()) data.emplace(seed, benchmark_for(cfg, seed));
  std::vector<TradeoffRow> rows;
  for (MixupMode mode : cfg.sweep_modes) {
    for (double lambda : cfg.lambda_grid) {
      for (std::uint64_t seed : cfg.seed_list()) {
        rows.push_back(ctx.timed(std::string(to_string(mode)) + " lambda=" + format_fixed(lambda, 3) +
                                     " seed=" + std::to_string(seed),
                                 [&] { return tradeoff_point(data.at(seed), mode, lambda, tc, seed); }));
      }
    }
  }
  ctx.write("sweep.csv", tradeoff_csv(rows));
  ctx.write("sweep_summary.csv", sweep_summary_csv(rows));
  return ctx.finish();
}

/// metrics: vendor-only training at the configured mixup, then the metric
/// report on the mixup domains and on the original domains.
inline int cmd_metrics(const CliOptions& opts) {
  RunContext ctx("metrics", opts);
  const ExperimentConfig& cfg = ctx.config();
  PipelineConfig pc = cfg.pipeline();
  pc.run_client = false;
  const std::optional<MixupConfig> mix = cfg.mixup_enabled ? std::optional<MixupConfig>(cfg.mixup) : std::nullopt;
  const double lambda = mix ? mix->lambda : 0.0;
  std::string mixed = metrics_csv_header(), original = metrics_csv_header();
  for (std::uint64_t seed : cfg.seed_list()) {
    const std::string tag = "seed " + std::to_string(seed);
    const BenchmarkData data = benchmark_for(cfg, seed);
    const PipelineResult r = ctx.timed("vendor " + tag, [&] { return run_pipeline(data, pc, seed); });
    const auto [m, o] = ctx.timed("metrics " + tag, [&] { return measure_model(r.vendor_model, data, mix, cfg.tradeoff, seed); });
    mixed += metrics_csv_row(lambda, cfg.mixup.mode, m, r.target_acc_before, seed);
    original += metrics_csv_row(lambda, cfg.mixup.mode, o, r.target_acc_before, seed);
  }
  ctx.write("metrics_mixup.csv", mixed);
  ctx.write("metrics_original.csv", original);
  return ctx.finish();
}

/// theorem: Monte-Carlo verification of the linear-classifier theorem and,
/// when enabled, the d_H + kappa comparison on the benchmark.
inline int cmd_theorem(const CliOptions& opts) {
  RunContext ctx("theorem", opts);
  const ExperimentConfig& cfg = ctx.config();
  TheoremSetup setup = cfg.theorem;
  setup.seed = cfg.seed;
  const TheoremReport report = ctx.timed("theorem", [&] { return verify_theorem1(setup); });
  ctx.write("theorem.csv", theorem_csv(report));
  std::string summary = theorem_summary(report);
  for (const TheoremCheck& c : report.checks) {
    ctx.assertion(c.name + " at lambda=" + format_fixed(c.lambda), c.pass, c.detail);
  }
  if (cfg.insight2_enabled) {
    TradeoffConfig tc = cfg.tradeoff;
    tc.pipeline = cfg.pipeline();
    if (!tc.pipeline.vendor.mixup) tc.pipeline.vendor.mixup = cfg.mixup;
    const Insight2Report r = ctx.timed("insight2", [&] {
      return insight2_check(cfg.benchmark, tc, cfg.insight2_mode, cfg.insight2_lambda, cfg.seed_list(),
                            cfg.insight2_tolerance);
    });
    ctx.write("insight2.csv", insight2_csv(r));
    summary += insight2_summary(r);
    if (cfg.insight2_assert) {
      ctx.assertion("insight2", r.pass(), format_fixed(r.lhs) + " vs " + format_fixed(r.rhs));
    }
  }
  ctx.write("summary.txt", summary);
  std::cout << summary;
  return ctx.finish();
}

/// Maps the library's exception types onto the exit-code contract.
template <class F>
int run_guarded(F&& fn, std::ostream& err = std::cerr) {
  try {
    return fn();
  } catch (const AssumptionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace gmx
