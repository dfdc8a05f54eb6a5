#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gmx/generic/mixup.hpp"
#include "gmx/metrics/tradeoff.hpp"
#include "gmx/numerics/error.hpp"
#include "gmx/synthdata/benchmark.hpp"
#include "gmx/theorem/setup.hpp"

namespace gmx {

inline constexpr int kConfigSchema = 1;

/// Everything one CLI run needs. Parsed from a flat `key = value` file.
struct ExperimentConfig {
  int schema = kConfigSchema;
  std::uint64_t seed = 1;
  std::size_t seeds = 1;
  BenchmarkSpec benchmark;
  TradeoffConfig tradeoff;
  bool mixup_enabled = true;
  MixupConfig mixup;                    // vendor side
  std::optional<double> client_lambda;  // defaults to mixup.lambda
  std::vector<double> lambda_grid = {0.0, 0.1, 0.25, 0.5, 0.8, 1.0};
  std::vector<MixupMode> sweep_modes = {MixupMode::Edge};
  TheoremSetup theorem;
  bool insight2_enabled = false;
  MixupMode insight2_mode = MixupMode::Feature;
  double insight2_lambda = 0.1;
  double insight2_tolerance = 0.02;
  bool insight2_assert = false;
  std::optional<std::filesystem::path> data_source;
  std::optional<std::filesystem::path> data_target;
  std::optional<std::filesystem::path> data_target_labels;

  std::vector<std::uint64_t> seed_list() const {
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < seeds; ++i) out.push_back(seed + i);
    return out;
  }

  /// Pipeline settings with the mixup configs applied to vendor and client.
  PipelineConfig pipeline() const {
    PipelineConfig p = tradeoff.pipeline;
    if (!mixup_enabled) {
      p.vendor.mixup.reset();
      p.client.mixup.reset();
      return p;
    }
    p.vendor.mixup = mixup;
    MixupConfig client = mixup;
    client.lambda = client_lambda.value_or(mixup.lambda);
    p.client.mixup = client;
    return p;
  }
};

namespace cfgparse {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string item = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double to_double(std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

inline std::uint64_t to_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ConfigError("expected a non-negative integer, got '" + std::string(s) + "'");
  }
  return v;
}

inline std::size_t to_size(std::string_view s) { return static_cast<std::size_t>(to_u64(s)); }

inline bool to_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("expected true or false, got '" + std::string(s) + "'");
}

inline std::vector<double> to_doubles(std::string_view s) {
  std::vector<double> out;
  for (const std::string& item : split_list(s)) out.push_back(to_double(item));
  if (out.empty()) throw ConfigError("expected a non-empty comma-separated list");
  return out;
}

inline std::vector<std::size_t> to_sizes(std::string_view s) {
  std::vector<std::size_t> out;
  for (const std::string& item : split_list(s)) out.push_back(to_size(item));
  return out;
}

inline OptimizerKind to_optimizer(std::string_view s) {
  if (s == "adam") return OptimizerKind::Adam;
  if (s == "sgd") return OptimizerKind::SgdMomentum;
  throw ConfigError("expected adam or sgd, got '" + std::string(s) + "'");
}

inline Rgb to_rgb(std::string_view s) {
  const std::vector<double> v = to_doubles(s);
  if (v.size() != 3) throw ConfigError("expected three comma-separated channel values");
  return {v[0], v[1], v[2]};
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

inline void add_style(std::map<std::string, Setter>& t, const std::string& prefix, DomainStyle ShapeTextureConfig::*member) {
  t[prefix + ".texture"] = [member](ExperimentConfig& c, const std::string& v) {
    (c.benchmark.shape_texture.*member).texture = parse_texture(v);
  };
  t[prefix + ".background"] = [member](ExperimentConfig& c, const std::string& v) {
    (c.benchmark.shape_texture.*member).background = to_rgb(v);
  };
  t[prefix + ".texture_amplitude"] = [member](ExperimentConfig& c, const std::string& v) {
    (c.benchmark.shape_texture.*member).texture_amplitude = to_double(v);
  };
  t[prefix + ".texture_period"] = [member](ExperimentConfig& c, const std::string& v) {
    (c.benchmark.shape_texture.*member).texture_period = to_double(v);
  };
  for (std::size_t k = 0; k < 4; ++k) {
    t[prefix + ".palette" + std::to_string(k)] = [member, k](ExperimentConfig& c, const std::string& v) {
      (c.benchmark.shape_texture.*member).palette[k] = to_rgb(v);
    };
  }
}

inline void add_optimizer(std::map<std::string, Setter>& t, const std::string& prefix,
                          std::function<OptimizerConfig&(ExperimentConfig&)> get) {
  t[prefix + ".optimizer"] = [get](ExperimentConfig& c, const std::string& v) { get(c).kind = to_optimizer(v); };
  t[prefix + ".lr"] = [get](ExperimentConfig& c, const std::string& v) { get(c).lr = to_double(v); };
  t[prefix + ".momentum"] = [get](ExperimentConfig& c, const std::string& v) { get(c).momentum = to_double(v); };
  t[prefix + ".beta1"] = [get](ExperimentConfig& c, const std::string& v) { get(c).beta1 = to_double(v); };
  t[prefix + ".beta2"] = [get](ExperimentConfig& c, const std::string& v) { get(c).beta2 = to_double(v); };
}

inline void add_classifier(std::map<std::string, Setter>& t, const std::string& prefix,
                           std::function<DomainClassifierConfig&(ExperimentConfig&)> get) {
  t[prefix + ".family"] = [get](ExperimentConfig& c, const std::string& v) { get(c).family = parse_family(v); };
  t[prefix + ".hidden"] = [get](ExperimentConfig& c, const std::string& v) { get(c).hidden = to_sizes(v); };
  t[prefix + ".epochs"] = [get](ExperimentConfig& c, const std::string& v) { get(c).epochs = to_size(v); };
  t[prefix + ".batch_size"] = [get](ExperimentConfig& c, const std::string& v) { get(c).batch_size = to_size(v); };
  t[prefix + ".lr"] = [get](ExperimentConfig& c, const std::string& v) { get(c).lr = to_double(v); };
  t[prefix + ".eval_fraction"] = [get](ExperimentConfig& c, const std::string& v) { get(c).eval_fraction = to_double(v); };
  t[prefix + ".seed"] = [get](ExperimentConfig& c, const std::string& v) { get(c).seed = to_u64(v); };
}

inline void add_gaussian(std::map<std::string, Setter>& t, const std::string& name, DiagGaussian TheoremSetup::*member) {
  t["theorem." + name + ".mean"] = [member](ExperimentConfig& c, const std::string& v) {
    (c.theorem.*member).mean = to_doubles(v);
  };
  t["theorem." + name + ".var"] = [member](ExperimentConfig& c, const std::string& v) {
    (c.theorem.*member).var = to_doubles(v);
  };
}

/// Every recognized key and how it is applied.
inline const std::map<std::string, Setter>& field_table() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    using C = ExperimentConfig;
    using S = const std::string&;
    t["schema"] = [](C& c, S v) { c.schema = static_cast<int>(to_u64(v)); };
    t["seed"] = [](C& c, S v) { c.seed = to_u64(v); };
    t["seeds"] = [](C& c, S v) { c.seeds = to_size(v); };

    t["benchmark.generator"] = [](C& c, S v) { c.benchmark.generator = parse_generator(v); };
    t["benchmark.train_fraction"] = [](C& c, S v) { c.benchmark.train_fraction = to_double(v); };
    t["shape_texture.height"] = [](C& c, S v) { c.benchmark.shape_texture.height = to_size(v); };
    t["shape_texture.width"] = [](C& c, S v) { c.benchmark.shape_texture.width = to_size(v); };
    t["shape_texture.channels"] = [](C& c, S v) { c.benchmark.shape_texture.channels = to_size(v); };
    t["shape_texture.texture_class_corr"] = [](C& c, S v) { c.benchmark.shape_texture.texture_class_corr = to_double(v); };
    t["shape_texture.noise"] = [](C& c, S v) { c.benchmark.shape_texture.noise = to_double(v); };
    t["shape_texture.color_jitter"] = [](C& c, S v) { c.benchmark.shape_texture.color_jitter = to_double(v); };
    t["shape_texture.min_size"] = [](C& c, S v) { c.benchmark.shape_texture.min_size = to_double(v); };
    t["shape_texture.max_size"] = [](C& c, S v) { c.benchmark.shape_texture.max_size = to_double(v); };
    t["shape_texture.max_offset"] = [](C& c, S v) { c.benchmark.shape_texture.max_offset = to_double(v); };
    t["shape_texture.samples_per_class"] = [](C& c, S v) { c.benchmark.shape_texture.samples_per_class = to_size(v); };
    add_style(t, "shape_texture.source", &ShapeTextureConfig::source_style);
    add_style(t, "shape_texture.target", &ShapeTextureConfig::target_style);
    t["moons.samples"] = [](C& c, S v) { c.benchmark.moons.samples = to_size(v); };
    t["moons.noise"] = [](C& c, S v) { c.benchmark.moons.noise = to_double(v); };
    t["moons.angle_deg"] = [](C& c, S v) { c.benchmark.moons.angle = to_double(v) * std::numbers::pi / 180.0; };
    t["gaussian.dim"] = [](C& c, S v) { c.benchmark.gaussian.dim = to_size(v); };
    t["gaussian.classes"] = [](C& c, S v) { c.benchmark.gaussian.classes = static_cast<int>(to_size(v)); };
    t["gaussian.separation"] = [](C& c, S v) { c.benchmark.gaussian.separation = to_double(v); };
    t["gaussian.shift"] = [](C& c, S v) { c.benchmark.gaussian.shift = to_double(v); };
    t["gaussian.sd"] = [](C& c, S v) { c.benchmark.gaussian.sd = to_double(v); };
    t["gaussian.samples_per_class"] = [](C& c, S v) { c.benchmark.gaussian.samples_per_class = to_size(v); };
    t["data.source"] = [](C& c, S v) { c.data_source = v; };
    t["data.target"] = [](C& c, S v) { c.data_target = v; };
    t["data.target_labels"] = [](C& c, S v) { c.data_target_labels = v; };

    t["model.hidden"] = [](C& c, S v) { c.tradeoff.pipeline.vendor.model.hidden = to_sizes(v); };
    t["model.feat_dim"] = [](C& c, S v) { c.tradeoff.pipeline.vendor.model.feat_dim = to_size(v); };
    t["model.activation"] = [](C& c, S v) { c.tradeoff.pipeline.vendor.model.activation = parse_activation(v); };

    t["mixup.enabled"] = [](C& c, S v) { c.mixup_enabled = to_bool(v); };
    t["mixup.mode"] = [](C& c, S v) { c.mixup.mode = parse_mixup_mode(v); };
    t["mixup.lambda"] = [](C& c, S v) { c.mixup.lambda = to_double(v); };
    t["mixup.client_lambda"] = [](C& c, S v) { c.client_lambda = to_double(v); };
    t["mixup.k"] = [](C& c, S v) { c.mixup.k = to_size(v); };
    t["mixup.augmentations"] = [](C& c, S v) { c.mixup.augmentations = split_list(v); };
    t["mixup.stop_gradient"] = [](C& c, S v) { c.mixup.stop_gradient = to_bool(v); };
    t["mixup.augmentation_seed"] = [](C& c, S v) { c.mixup.augmentation_seed = to_u64(v); };

    t["vendor.epochs"] = [](C& c, S v) { c.tradeoff.pipeline.vendor.epochs = to_size(v); };
    t["vendor.batch_size"] = [](C& c, S v) { c.tradeoff.pipeline.vendor.batch_size = to_size(v); };
    t["vendor.label_smoothing"] = [](C& c, S v) { c.tradeoff.pipeline.vendor.label_smoothing = to_double(v); };
    add_optimizer(t, "vendor", [](C& c) -> OptimizerConfig& { return c.tradeoff.pipeline.vendor.optimizer; });

    t["client.enabled"] = [](C& c, S v) { c.tradeoff.pipeline.run_client = to_bool(v); };
    t["client.epochs"] = [](C& c, S v) { c.tradeoff.pipeline.client.epochs = to_size(v); };
    t["client.batch_size"] = [](C& c, S v) { c.tradeoff.pipeline.client.batch_size = to_size(v); };
    t["client.refresh_interval"] = [](C& c, S v) { c.tradeoff.pipeline.client.refresh_interval = to_size(v); };
    t["client.w_ent"] = [](C& c, S v) { c.tradeoff.pipeline.client.w_ent = to_double(v); };
    t["client.w_div"] = [](C& c, S v) { c.tradeoff.pipeline.client.w_div = to_double(v); };
    t["client.w_pl"] = [](C& c, S v) { c.tradeoff.pipeline.client.w_pl = to_double(v); };
    t["client.freeze_classifier"] = [](C& c, S v) { c.tradeoff.pipeline.client.freeze_classifier = to_bool(v); };
    t["client.finetune_iterations"] = [](C& c, S v) { c.tradeoff.pipeline.client.finetune_iterations = to_size(v); };
    t["client.finetune_fraction"] = [](C& c, S v) { c.tradeoff.pipeline.client.finetune_fraction = to_double(v); };
    add_optimizer(t, "client", [](C& c) -> OptimizerConfig& { return c.tradeoff.pipeline.client.optimizer; });

    add_classifier(t, "metrics.domain", [](C& c) -> DomainClassifierConfig& { return c.tradeoff.domain_classifier; });
    add_classifier(t, "metrics.task", [](C& c) -> DomainClassifierConfig& { return c.tradeoff.task_classifier; });

    t["sweep.lambda_grid"] = [](C& c, S v) { c.lambda_grid = to_doubles(v); };
    t["sweep.modes"] = [](C& c, S v) {
      c.sweep_modes.clear();
      for (const std::string& m : split_list(v)) c.sweep_modes.push_back(parse_mixup_mode(m));
      if (c.sweep_modes.empty()) throw ConfigError("expected at least one mode");
    };

    add_gaussian(t, "p_s", &TheoremSetup::p_s);
    add_gaussian(t, "p_t", &TheoremSetup::p_t);
    add_gaussian(t, "p_sg", &TheoremSetup::p_sg);
    add_gaussian(t, "p_tg", &TheoremSetup::p_tg);
    t["theorem.independence"] = [](C& c, S v) { c.theorem.independence = parse_independence(v); };
    t["theorem.samples"] = [](C& c, S v) { c.theorem.samples = to_size(v); };
    t["theorem.lambda_grid"] = [](C& c, S v) { c.theorem.lambda_grid = to_doubles(v); };
    t["theorem.direction"] = [](C& c, S v) { c.theorem.direction = to_doubles(v); };
    t["theorem.fd_weight"] = [](C& c, S v) {
      if (!c.theorem.f_d) c.theorem.f_d = LinearFd{};
      c.theorem.f_d->weight = to_doubles(v);
    };
    t["theorem.fd_bias"] = [](C& c, S v) {
      if (!c.theorem.f_d) c.theorem.f_d = LinearFd{};
      c.theorem.f_d->bias = to_double(v);
    };
    t["theorem.assert_assumptions"] = [](C& c, S v) { c.theorem.assert_assumptions = to_bool(v); };

    t["insight2.enabled"] = [](C& c, S v) { c.insight2_enabled = to_bool(v); };
    t["insight2.mode"] = [](C& c, S v) { c.insight2_mode = parse_mixup_mode(v); };
    t["insight2.lambda"] = [](C& c, S v) { c.insight2_lambda = to_double(v); };
    t["insight2.tolerance"] = [](C& c, S v) { c.insight2_tolerance = to_double(v); };
    t["insight2.assert"] = [](C& c, S v) { c.insight2_assert = to_bool(v); };
    return t;
  }();
  return table;
}

}  // namespace cfgparse

/// Checks cross-field constraints; errors name the offending field.
inline void validate_config(const ExperimentConfig& c) {
  auto guard = [](std::string_view field, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      throw ConfigError("config field '" + std::string(field) + "': " + e.what());
    }
  };
  if (c.schema != kConfigSchema) {
    throw ConfigError("config field 'schema': unsupported version " + std::to_string(c.schema) + " (expected " +
                      std::to_string(kConfigSchema) + ")");
  }
  if (c.seeds == 0) throw ConfigError("config field 'seeds': must be at least 1");
  guard("shape_texture", [&] { c.benchmark.shape_texture.validate(); });
  guard("moons", [&] { c.benchmark.moons.validate(); });
  guard("benchmark.train_fraction", [&] {
    if (!(c.benchmark.train_fraction > 0.0 && c.benchmark.train_fraction < 1.0)) {
      throw ConfigError("must lie in (0,1)");
    }
  });
  guard("mixup", [&] { c.mixup.validate(); });
  guard("mixup.client_lambda", [&] { check_lambda(c.client_lambda.value_or(c.mixup.lambda), "client mixup"); });
  guard("vendor", [&] {
    VendorConfig v = c.tradeoff.pipeline.vendor;
    v.mixup.reset();
    v.validate();
  });
  guard("client", [&] {
    ClientConfig cl = c.tradeoff.pipeline.client;
    cl.mixup.reset();
    cl.validate();
  });
  guard("metrics.domain", [&] { c.tradeoff.domain_classifier.validate(); });
  guard("metrics.task", [&] { c.tradeoff.task_classifier.validate(); });
  guard("sweep.lambda_grid", [&] {
    for (double l : c.lambda_grid) check_lambda(l, "sweep");
  });
  guard("theorem", [&] { c.theorem.validate(); });
  guard("insight2.lambda", [&] { check_lambda(c.insight2_lambda, "insight2"); });
  const bool any_data = c.data_source || c.data_target || c.data_target_labels;
  if (any_data && !(c.data_source && c.data_target && c.data_target_labels)) {
    throw ConfigError("config fields 'data.source', 'data.target', 'data.target_labels' must be given together");
  }
}

/// Parses config text. Relative data paths resolve against `base_dir`.
inline ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {}) {
  ExperimentConfig c;
  bool saw_schema = false;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = cfgparse::trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = "config line " + std::to_string(number);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value', got '" + body + "'");
    const std::string key = cfgparse::trim(body.substr(0, eq));
    const std::string value = cfgparse::trim(body.substr(eq + 1));
    const auto& table = cfgparse::field_table();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(where + ": unknown field '" + key + "'");
    if (auto prev = seen.find(key); prev != seen.end()) {
      throw ConfigError(where + ": field '" + key + "' already set on line " + std::to_string(prev->second));
    }
    seen[key] = number;
    if (value.empty()) throw ConfigError(where + ": field '" + key + "' has no value");
    try {
      it->second(c, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": field '" + key + "': " + e.what());
    }
    saw_schema |= key == "schema";
  }
  if (!saw_schema) throw ConfigError("config field 'schema' is required (schema = " + std::to_string(kConfigSchema) + ")");
  for (auto* p : {&c.data_source, &c.data_target, &c.data_target_labels}) {
    if (*p && p->value().is_relative() && !base_dir.empty()) *p = base_dir / p->value();
  }
  validate_config(c);
  return c;
}

}  // namespace gmx
