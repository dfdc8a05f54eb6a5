#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gmx/numerics/error.hpp"
#include "gmx/numerics/rng.hpp"
#include "gmx/synthdata/dataset.hpp"

namespace gmx {

/// One (domain, class) cell: N(mean, diag(variance)).
struct GaussianCell {
  DomainRole role = DomainRole::Source;
  int label = 0;
  std::vector<double> mean;
  std::vector<double> variance;
};

struct GaussianDomainConfig {
  std::vector<GaussianCell> cells;
  int class_count = 2;
  std::size_t samples_per_cell = 100;
  std::uint64_t seed = 1;

  void validate() const {
    if (cells.empty()) throw ConfigError("gaussian: no cells");
    if (samples_per_cell == 0) throw ConfigError("gaussian: samples_per_cell must be positive");
    const std::size_t d = cells.front().mean.size();
    if (d == 0) throw ConfigError("gaussian: empty mean vector");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const GaussianCell& c = cells[i];
      const std::string at = "gaussian: cell " + std::to_string(i);
      if (c.mean.size() != d || c.variance.size() != d) throw ConfigError(at + " has inconsistent dimension");
      for (double v : c.variance) {
        if (!(v >= 0.0)) throw ConfigError(at + " has a negative variance");
      }
      if (c.label < 0 || c.label >= class_count) throw ConfigError(at + " label out of range");
    }
  }
};

struct GaussianDomains {
  std::map<DomainRole, DomainDataset> datasets;
  std::map<DomainRole, EvalLabels> eval_labels;  // target-like roles only
};

/// Samples every cell; source-like roles carry labels, target-like roles
/// get their labels in eval_labels.
inline GaussianDomains gen_gaussian_domains(const GaussianDomainConfig& cfg) {
  cfg.validate();
  const Rng root(cfg.seed);
  const std::size_t d = cfg.cells.front().mean.size();
  GaussianDomains out;
  for (std::size_t ci = 0; ci < cfg.cells.size(); ++ci) {
    const GaussianCell& cell = cfg.cells[ci];
    Rng rng = root.substream(ci);
    DomainDataset& ds = out.datasets[cell.role];
    ds.role = cell.role;
    ds.class_count = cfg.class_count;
    ds.kind = PayloadKind::vector(d);
    ds.provenance = "gaussian seed=" + std::to_string(cfg.seed);
    for (std::size_t n = 0; n < cfg.samples_per_cell; ++n) {
      Tensor p({d});
      for (std::size_t j = 0; j < d; ++j) {
        p[j] = cell.variance[j] == 0.0 ? cell.mean[j] : rng.normal(cell.mean[j], std::sqrt(cell.variance[j]));
      }
      LabeledSample s{std::move(p), std::nullopt};
      if (is_source_like(cell.role)) {
        s.label = cell.label;
      } else {
        out.eval_labels[cell.role].labels.push_back(cell.label);
      }
      ds.samples.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace gmx
