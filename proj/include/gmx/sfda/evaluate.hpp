#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gmx/numerics/error.hpp"
#include "gmx/numerics/loss.hpp"
#include "gmx/numerics/mlp.hpp"
#include "gmx/synthdata/dataset.hpp"

namespace gmx {

/// Predicted classes for every sample of `ds`.
inline std::vector<int> predict(const ModelBundle& model, const DomainDataset& ds) {
  if (ds.size() == 0) throw DimensionError("predict: empty dataset");
  return argmax_rows(forward(model, ds.batch()).logits);
}

inline double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size() || truth.empty()) {
    throw DimensionError("accuracy: " + std::to_string(predicted.size()) + " predictions for " +
                         std::to_string(truth.size()) + " labels");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

/// Top-1 accuracy against the labels stored in a source-like dataset.
inline double evaluate(const ModelBundle& model, const DomainDataset& ds) {
  if (!ds.has_labels()) throw RoleError("evaluate: dataset has no labels; pass its EvalLabels");
  const std::vector<int> truth = ds.labels();
  return accuracy(predict(model, ds), truth);
}

/// Top-1 accuracy of an unlabeled dataset against its quarantined labels.
inline double evaluate(const ModelBundle& model, const DomainDataset& ds, const EvalLabels& labels) {
  if (labels.size() != ds.size()) throw RoleError("evaluate: eval labels do not match the dataset");
  return accuracy(predict(model, ds), labels.labels);
}

/// Experimenter-side view of a target dataset with its labels. Training
/// loops only ever call `measure`; they never see the labels themselves.
class EvalProbe {
 public:
  EvalProbe(const DomainDataset& data, const EvalLabels& labels) : data_(&data), labels_(&labels) {
    if (labels.size() != data.size()) throw RoleError("eval probe: labels do not match the dataset");
  }
  double measure(const ModelBundle& model) const { return evaluate(model, *data_, *labels_); }

 private:
  const DomainDataset* data_;
  const EvalLabels* labels_;
};

}  // namespace gmx
