#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmx/numerics/error.hpp"
#include "gmx/numerics/tensor.hpp"

namespace gmx {

enum class DomainRole { Source, Target, SourceGeneric, TargetGeneric, SourceMixup, TargetMixup };

inline std::string_view to_string(DomainRole r) {
  switch (r) {
    case DomainRole::Source: return "source";
    case DomainRole::Target: return "target";
    case DomainRole::SourceGeneric: return "source-generic";
    case DomainRole::TargetGeneric: return "target-generic";
    case DomainRole::SourceMixup: return "source-mixup";
    case DomainRole::TargetMixup: return "target-mixup";
  }
  return "?";
}

inline DomainRole parse_role(std::string_view s) {
  for (DomainRole r : {DomainRole::Source, DomainRole::Target, DomainRole::SourceGeneric,
                       DomainRole::TargetGeneric, DomainRole::SourceMixup, DomainRole::TargetMixup}) {
    if (to_string(r) == s) return r;
  }
  throw ConfigError("unknown domain role '" + std::string(s) + "'");
}

inline bool is_source_like(DomainRole r) {
  return r == DomainRole::Source || r == DomainRole::SourceGeneric || r == DomainRole::SourceMixup;
}

inline DomainRole mixup_role(DomainRole r) {
  return is_source_like(r) ? DomainRole::SourceMixup : DomainRole::TargetMixup;
}

struct PayloadKind {
  enum class Kind { Vector, Image };
  Kind kind = Kind::Vector;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::size_t length = 0;  // vector payloads

  static PayloadKind vector(std::size_t d) { return {Kind::Vector, 0, 0, 0, d}; }
  static PayloadKind image(std::size_t h, std::size_t w, std::size_t c) { return {Kind::Image, h, w, c, 0}; }

  bool is_image() const { return kind == Kind::Image; }
  std::size_t flat_size() const { return is_image() ? height * width * channels : length; }
  Shape shape() const { return is_image() ? Shape{height, width, channels} : Shape{length}; }

  friend bool operator==(const PayloadKind&, const PayloadKind&) = default;
};

/// One sample. Labels are absent on target-role training data; target
/// ground truth lives in EvalLabels.
struct LabeledSample {
  Tensor payload;
  std::optional<int> label;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct DomainDataset {
  std::vector<LabeledSample> samples;
  int class_count = 0;
  PayloadKind kind;
  DomainRole role = DomainRole::Source;
  std::string provenance;

  std::size_t size() const { return samples.size(); }

  bool has_labels() const {
    for (const LabeledSample& s : samples) {
      if (s.label) return true;
    }
    return false;
  }

  std::vector<int> labels() const {
    std::vector<int> out;
    out.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (!samples[i].label) {
        throw RoleError("dataset (" + std::string(to_string(role)) + "): sample " + std::to_string(i) +
                        " has no label");
      }
      out.push_back(*samples[i].label);
    }
    return out;
  }

  /// Payloads of `indices` (all samples when empty) as an [n, flat] matrix.
  Tensor batch(std::span<const std::size_t> indices = {}) const {
    if (samples.empty()) throw DimensionError("dataset: empty");
    const std::size_t d = kind.flat_size();
    const std::size_t n = indices.empty() ? samples.size() : indices.size();
    Tensor out = Tensor::matrix(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      const Tensor& p = samples[indices.empty() ? i : indices[i]].payload;
      std::copy(p.data().begin(), p.data().end(), out.row(i).begin());
    }
    return out;
  }

  void validate() const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Tensor& p = samples[i].payload;
      if (p.shape() != kind.shape()) {
        throw DimensionError("dataset: sample " + std::to_string(i) + " has shape " +
                             shape_string(p.shape()) + ", expected " + shape_string(kind.shape()));
      }
      if (kind.is_image()) {
        for (double v : p.data()) {
          if (!(v >= 0.0 && v <= 1.0)) {
            throw DimensionError("dataset: image sample " + std::to_string(i) + " has a value outside [0,1]");
          }
        }
      }
      if (samples[i].label && (*samples[i].label < 0 || *samples[i].label >= class_count)) {
        throw DimensionError("dataset: sample " + std::to_string(i) + " label out of range");
      }
    }
  }

  friend bool operator==(const DomainDataset&, const DomainDataset&) = default;
};

/// Ground-truth labels for a target-role dataset, aligned by sample index.
/// Only evaluation code takes this type; adaptation code never does.
struct EvalLabels {
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  friend bool operator==(const EvalLabels&, const EvalLabels&) = default;
};

/// Per-class sample counts of a label list.
inline std::vector<std::size_t> class_counts(std::span<const int> labels, int class_count) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(class_count), 0);
  for (int y : labels) ++counts.at(static_cast<std::size_t>(y));
  return counts;
}

}  // namespace gmx
