#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "gmx/numerics/error.hpp"
#include "gmx/numerics/tensor.hpp"

namespace gmx {

/// Row-wise log-softmax of a [N, C] matrix.
inline Tensor log_softmax(const Tensor& logits) {
  Tensor out = logits;
  const std::size_t c = logits.cols();
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto r = out.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += std::exp(r[j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < c; ++j) r[j] -= lse;
  }
  require_finite(out, "log_softmax");
  return out;
}

inline Tensor softmax(const Tensor& logits) {
  Tensor out = log_softmax(logits);
  for (double& v : out.data()) v = std::exp(v);
  return out;
}

inline std::vector<int> argmax_rows(const Tensor& m) {
  std::vector<int> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    out[i] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

/// Cross-entropy against label-smoothed targets (1-s)*onehot + s/C.
struct CrossEntropyLoss {
  std::vector<int> labels;
  double smoothing = 0.1;
};

/// Mean per-sample prediction entropy.
struct EntropyLoss {};

/// Negative entropy of the batch-mean prediction; minimum -ln C.
struct DiversityLoss {};

/// w_ent * entropy + w_div * diversity + w_pl * CE(pseudo labels).
struct CompositeLoss {
  double w_ent = 1.0;
  double w_div = 1.0;
  double w_pl = 0.3;
  std::vector<int> pseudo_labels;
  double pl_smoothing = 0.0;
};

using LossSpec = std::variant<CrossEntropyLoss, EntropyLoss, DiversityLoss, CompositeLoss>;

struct LossValue {
  double total = 0.0;
  double entropy = 0.0;
  double diversity = 0.0;
  double pseudo_label = 0.0;
  double cross_entropy = 0.0;
  Tensor grad_logits;
};

namespace detail {

inline void check_labels(const std::vector<int>& labels, std::size_t n, std::size_t c,
                         const char* op) {
  if (labels.size() != n) {
    throw DimensionError(std::string(op) + ": " + std::to_string(labels.size()) +
                         " labels for a batch of " + std::to_string(n));
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= c) {
      throw DimensionError(std::string(op) + ": label " + std::to_string(y) + " out of range");
    }
  }
}

/// Adds weight * d(CE)/d(logits) into grad; returns the loss.
inline double cross_entropy_term(const Tensor& logp, const std::vector<int>& labels, double smoothing,
                                 double weight, Tensor& grad) {
  const std::size_t n = logp.rows(), c = logp.cols();
  check_labels(labels, n, c, "cross-entropy");
  if (smoothing < 0.0 || smoothing >= 1.0) throw ConfigError("cross-entropy: smoothing must lie in [0,1)");
  const double off = smoothing / static_cast<double>(c);
  const double on = 1.0 - smoothing + off;
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto lp = logp.row(i);
    auto g = grad.row(i);
    for (std::size_t j = 0; j < c; ++j) {
      const double q = (static_cast<std::size_t>(labels[i]) == j) ? on : off;
      loss -= q * lp[j];
      g[j] += weight * (std::exp(lp[j]) - q) / static_cast<double>(n);
    }
  }
  return loss / static_cast<double>(n);
}

inline double entropy_term(const Tensor& logp, double weight, Tensor& grad) {
  const std::size_t n = logp.rows(), c = logp.cols();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto lp = logp.row(i);
    double h = 0.0;
    for (std::size_t j = 0; j < c; ++j) h -= std::exp(lp[j]) * lp[j];
    total += h;
    auto g = grad.row(i);
    for (std::size_t j = 0; j < c; ++j) {
      g[j] += weight * (-std::exp(lp[j]) * (lp[j] + h)) / static_cast<double>(n);
    }
  }
  return total / static_cast<double>(n);
}

inline double diversity_term(const Tensor& logp, double weight, Tensor& grad) {
  const std::size_t n = logp.rows(), c = logp.cols();
  std::vector<double> mean(c, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto lp = logp.row(i);
    for (std::size_t j = 0; j < c; ++j) mean[j] += std::exp(lp[j]);
  }
  for (double& m : mean) m /= static_cast<double>(n);
  std::vector<double> log_mean(c);
  double value = 0.0;
  for (std::size_t j = 0; j < c; ++j) {
    log_mean[j] = std::log(mean[j]);
    value += mean[j] * log_mean[j];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto lp = logp.row(i);
    double dot = 0.0;
    for (std::size_t k = 0; k < c; ++k) dot += std::exp(lp[k]) * log_mean[k];
    auto g = grad.row(i);
    for (std::size_t j = 0; j < c; ++j) {
      g[j] += weight * std::exp(lp[j]) * (log_mean[j] - dot) / static_cast<double>(n);
    }
  }
  return value;
}

}  // namespace detail

/// Loss value and its gradient w.r.t. the logits.
inline LossValue evaluate_loss(const Tensor& logits, const LossSpec& spec) {
  if (logits.rank() != 2) throw DimensionError("loss: logits must be a matrix");
  const Tensor logp = log_softmax(logits);
  LossValue out;
  out.grad_logits = Tensor(logits.shape());
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, CrossEntropyLoss>) {
          out.cross_entropy = detail::cross_entropy_term(logp, s.labels, s.smoothing, 1.0, out.grad_logits);
          out.total = out.cross_entropy;
        } else if constexpr (std::is_same_v<S, EntropyLoss>) {
          out.entropy = detail::entropy_term(logp, 1.0, out.grad_logits);
          out.total = out.entropy;
        } else if constexpr (std::is_same_v<S, DiversityLoss>) {
          out.diversity = detail::diversity_term(logp, 1.0, out.grad_logits);
          out.total = out.diversity;
        } else {
          out.entropy = detail::entropy_term(logp, s.w_ent, out.grad_logits);
          out.diversity = detail::diversity_term(logp, s.w_div, out.grad_logits);
          if (s.w_pl != 0.0) {
            out.pseudo_label =
                detail::cross_entropy_term(logp, s.pseudo_labels, s.pl_smoothing, s.w_pl, out.grad_logits);
          }
          out.total = s.w_ent * out.entropy + s.w_div * out.diversity + s.w_pl * out.pseudo_label;
        }
      },
      spec);
  require_finite(out.total, "loss");
  require_finite(out.grad_logits, "loss gradient");
  return out;
}

}  // namespace gmx
