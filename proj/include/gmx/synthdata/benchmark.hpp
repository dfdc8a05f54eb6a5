#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "gmx/numerics/error.hpp"
#include "gmx/synthdata/dataset.hpp"
#include "gmx/synthdata/gaussian.hpp"
#include "gmx/synthdata/moons.hpp"
#include "gmx/synthdata/shape_texture.hpp"
#include "gmx/synthdata/split.hpp"

namespace gmx {

enum class GeneratorKind { ShapeTexture, TwoMoons, Gaussian };

inline std::string_view to_string(GeneratorKind g) {
  switch (g) {
    case GeneratorKind::ShapeTexture: return "shape_texture";
    case GeneratorKind::TwoMoons: return "two_moons";
    case GeneratorKind::Gaussian: return "gaussian";
  }
  return "?";
}

inline GeneratorKind parse_generator(std::string_view s) {
  for (GeneratorKind g : {GeneratorKind::ShapeTexture, GeneratorKind::TwoMoons, GeneratorKind::Gaussian}) {
    if (to_string(g) == s) return g;
  }
  throw ConfigError("unknown generator '" + std::string(s) + "'");
}

/// Two-domain Gaussian task: class k centered at separation * e_k (first
/// coordinates), the target shifted by `shift` along every axis.
struct GaussianBenchmarkConfig {
  std::size_t dim = 2;
  int classes = 2;
  double separation = 4.0;
  double shift = 1.5;
  double sd = 1.0;
  std::size_t samples_per_class = 100;
};

struct BenchmarkSpec {
  GeneratorKind generator = GeneratorKind::ShapeTexture;
  ShapeTextureConfig shape_texture;
  MoonsConfig moons;
  GaussianBenchmarkConfig gaussian;
  double train_fraction = 0.5;
};

/// Source/target domains split into train and eval parts. Target labels
/// exist only in the EvalLabels members.
struct BenchmarkData {
  DomainDataset source_train;
  DomainDataset source_eval;
  DomainDataset target_train;
  DomainDataset target_eval;
  EvalLabels target_train_labels;
  EvalLabels target_eval_labels;
};

inline GaussianDomainConfig gaussian_benchmark_cells(const GaussianBenchmarkConfig& g, std::uint64_t seed) {
  if (g.classes < 2 || static_cast<std::size_t>(g.classes) > g.dim + 1) {
    throw ConfigError("gaussian benchmark: need 2 <= classes <= dim + 1");
  }
  GaussianDomainConfig cfg;
  cfg.class_count = g.classes;
  cfg.samples_per_cell = g.samples_per_class;
  cfg.seed = seed;
  for (DomainRole role : {DomainRole::Source, DomainRole::Target}) {
    for (int k = 0; k < g.classes; ++k) {
      GaussianCell cell;
      cell.role = role;
      cell.label = k;
      cell.mean.assign(g.dim, role == DomainRole::Target ? g.shift : 0.0);
      if (k > 0) cell.mean[static_cast<std::size_t>(k - 1)] += g.separation;
      cell.variance.assign(g.dim, g.sd * g.sd);
      cfg.cells.push_back(cell);
    }
  }
  return cfg;
}

/// Full (unsplit) source and target domains of a benchmark.
struct BenchmarkDomains {
  DomainDataset source;
  DomainDataset target;
  EvalLabels target_labels;
};

inline BenchmarkDomains generate_domains(const BenchmarkSpec& spec, std::uint64_t seed) {
  BenchmarkDomains out;
  switch (spec.generator) {
    case GeneratorKind::ShapeTexture: {
      ShapeTextureConfig cfg = spec.shape_texture;
      cfg.seed = seed;
      ShapeTextureData d = gen_shape_texture(cfg);
      out = {std::move(d.source), std::move(d.target), std::move(d.target_eval_labels)};
      break;
    }
    case GeneratorKind::TwoMoons: {
      MoonsConfig cfg = spec.moons;
      cfg.seed = seed;
      MoonsData d = gen_two_moons(cfg);
      out = {std::move(d.source), std::move(d.target), std::move(d.target_eval_labels)};
      break;
    }
    case GeneratorKind::Gaussian: {
      GaussianDomains d = gen_gaussian_domains(gaussian_benchmark_cells(spec.gaussian, seed));
      out = {std::move(d.datasets.at(DomainRole::Source)), std::move(d.datasets.at(DomainRole::Target)),
             std::move(d.eval_labels.at(DomainRole::Target))};
      break;
    }
  }
  return out;
}

/// Stratified train/eval split of both domains, keyed by `seed`.
inline BenchmarkData split_benchmark(const BenchmarkDomains& d, double train_fraction, std::uint64_t seed) {
  if (d.target_labels.size() != d.target.size()) {
    throw DimensionError("benchmark: target labels do not match the target dataset");
  }
  const Rng root(seed);
  DatasetSplit s = split(d.source, train_fraction, root.substream("split-source").next_u64());
  DatasetSplit t = split(d.target, train_fraction, root.substream("split-target").next_u64(), &d.target_labels);
  BenchmarkData out;
  out.source_train = std::move(s.train);
  out.source_eval = std::move(s.eval);
  out.target_train = std::move(t.train);
  out.target_eval = std::move(t.eval);
  out.target_train_labels = std::move(*t.train_labels);
  out.target_eval_labels = std::move(*t.eval_labels);
  return out;
}

inline BenchmarkData make_benchmark(const BenchmarkSpec& spec, std::uint64_t seed) {
  return split_benchmark(generate_domains(spec, seed), spec.train_fraction, seed);
}

}  // namespace gmx
