#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "gmx/numerics/error.hpp"
#include "gmx/numerics/rng.hpp"
#include "gmx/synthdata/dataset.hpp"

namespace gmx {

struct DatasetSplit {
  DomainDataset train;
  DomainDataset eval;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> eval_indices;
  // Present when eval labels were supplied for an unlabeled dataset.
  std::optional<EvalLabels> train_labels;
  std::optional<EvalLabels> eval_labels;
};

/// Disjoint train/eval split with `fraction` of each class in train.
/// Stratifies by the sample labels, or by `eval_labels` for unlabeled data,
/// and keeps the original sample order inside each part.
inline DatasetSplit split(const DomainDataset& ds, double fraction, std::uint64_t seed,
                          const EvalLabels* eval_labels = nullptr) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split: fraction must lie in (0,1)");
  if (eval_labels && eval_labels->size() != ds.size()) {
    throw DimensionError("split: eval labels do not match dataset size");
  }
  const std::size_t n = ds.size();
  std::vector<int> strata(n, 0);
  int strata_count = 1;
  if (ds.has_labels()) {
    strata = ds.labels();
    strata_count = ds.class_count;
  } else if (eval_labels) {
    strata = eval_labels->labels;
    strata_count = ds.class_count;
  }
  Rng rng(seed);
  std::vector<bool> in_train(n, false);
  for (int s = 0; s < strata_count; ++s) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (strata[i] == s) members.push_back(i);
    }
    rng.shuffle(members);
    const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size())));
    for (std::size_t k = 0; k < take; ++k) in_train[members[k]] = true;
  }
  DatasetSplit out;
  for (DomainDataset* part : {&out.train, &out.eval}) {
    part->class_count = ds.class_count;
    part->kind = ds.kind;
    part->role = ds.role;
    part->provenance = ds.provenance;
  }
  if (eval_labels) {
    out.train_labels.emplace();
    out.eval_labels.emplace();
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& part = in_train[i] ? out.train : out.eval;
    (in_train[i] ? out.train_indices : out.eval_indices).push_back(i);
    part.samples.push_back(ds.samples[i]);
    if (eval_labels) {
      (in_train[i] ? *out.train_labels : *out.eval_labels).labels.push_back(eval_labels->labels[i]);
    }
  }
  return out;
}

}  // namespace gmx
