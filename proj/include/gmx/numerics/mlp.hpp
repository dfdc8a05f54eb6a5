#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "gmx/numerics/error.hpp"
#include "gmx/numerics/rng.hpp"
#include "gmx/numerics/tensor.hpp"

namespace gmx {

enum class Activation { Relu, Tanh, Identity };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "?";
}

inline Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  if (s == "identity") return Activation::Identity;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

/// Layer widths (input first) and the activation applied after each dense
/// layer; activations.size() == layer_widths.size() - 1.
struct MlpSpec {
  std::vector<std::size_t> layer_widths;
  std::vector<Activation> activations;
  bool has_softmax_head = false;

  std::size_t input_dim() const { return layer_widths.front(); }
  std::size_t output_dim() const { return layer_widths.back(); }
  std::size_t layer_count() const { return layer_widths.size() - 1; }

  void validate() const {
    if (layer_widths.size() < 2) throw ConfigError("mlp: need at least two layer widths");
    for (std::size_t w : layer_widths) {
      if (w == 0) throw ConfigError("mlp: zero layer width");
    }
    if (activations.size() != layer_widths.size() - 1) {
      throw ConfigError("mlp: expected " + std::to_string(layer_widths.size() - 1) +
                        " activations, got " + std::to_string(activations.size()));
    }
  }

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

/// Hidden layers use `hidden`; the last layer uses `last`.
inline MlpSpec make_mlp_spec(std::vector<std::size_t> widths, Activation hidden, Activation last,
                             bool softmax_head = false) {
  MlpSpec spec;
  spec.layer_widths = std::move(widths);
  if (spec.layer_widths.size() >= 2) {
    spec.activations.assign(spec.layer_widths.size() - 1, hidden);
    spec.activations.back() = last;
  }
  spec.has_softmax_head = softmax_head;
  spec.validate();
  return spec;
}

struct DenseLayer {
  Tensor weight;  // [in, out]
  Tensor bias;    // [out]
};

struct Mlp {
  MlpSpec spec;
  std::vector<DenseLayer> layers;

  std::size_t parameter_tensor_count() const { return 2 * layers.size(); }
};

/// Glorot-uniform weights, zero biases.
inline Mlp init_mlp(const MlpSpec& spec, Rng& rng) {
  spec.validate();
  Mlp m{spec, {}};
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    const std::size_t in = spec.layer_widths[l], out = spec.layer_widths[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    DenseLayer layer{Tensor::matrix(in, out), Tensor({out})};
    for (double& w : layer.weight.data()) w = rng.uniform(-limit, limit);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

/// Per-layer values kept by a forward pass for the backward pass.
struct MlpCache {
  std::vector<Tensor> inputs;  // input of each layer
  std::vector<Tensor> pre;     // pre-activation of each layer
};

namespace detail {

inline void activate(Tensor& t, Activation a) {
  switch (a) {
    case Activation::Relu:
      for (double& v : t.data()) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::Tanh:
      for (double& v : t.data()) v = std::tanh(v);
      break;
    case Activation::Identity:
      break;
  }
}

/// grad <- grad * act'(pre)
inline void activation_backward(Tensor& grad, const Tensor& pre, Activation a) {
  switch (a) {
    case Activation::Relu:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!(pre[i] > 0.0)) grad[i] = 0.0;
      }
      break;
    case Activation::Tanh:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        const double t = std::tanh(pre[i]);
        grad[i] *= 1.0 - t * t;
      }
      break;
    case Activation::Identity:
      break;
  }
}

}  // namespace detail

/// Forward pass over a batch [N, input_dim]. Fills `cache` when given.
inline Tensor mlp_forward(const Mlp& m, const Tensor& batch, MlpCache* cache = nullptr,
                          std::string_view name = "mlp") {
  if (batch.rank() != 2 || batch.cols() != m.spec.input_dim()) {
    throw DimensionError(std::string(name) + ": input shape " + shape_string(batch.shape()) +
                         " does not match input width " + std::to_string(m.spec.input_dim()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Tensor x = batch;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const DenseLayer& layer = m.layers[l];
    Tensor y = matmul(x, layer.weight);
    const std::size_t out = y.cols();
    for (std::size_t i = 0; i < y.rows(); ++i) {
      auto r = y.row(i);
      for (std::size_t j = 0; j < out; ++j) r[j] += layer.bias[j];
    }
    if (cache) {
      cache->inputs.push_back(std::move(x));
      cache->pre.push_back(y);
    }
    detail::activate(y, m.spec.activations[l]);
    require_finite(y, std::string(name) + " layer " + std::to_string(l));
    x = std::move(y);
  }
  return x;
}

/// Backward pass. Adds parameter gradients into grads[offset..offset+2L)
/// (weight, bias per layer) and returns the gradient w.r.t. the input, or an
/// empty tensor when `input_grad` is false.
inline Tensor mlp_backward(const Mlp& m, const MlpCache& cache, Tensor grad_out,
                           std::vector<Tensor>& grads, std::size_t offset, bool input_grad = true) {
  for (std::size_t l = m.layers.size(); l-- > 0;) {
    detail::activation_backward(grad_out, cache.pre[l], m.spec.activations[l]);
    const Tensor& x = cache.inputs[l];
    const DenseLayer& layer = m.layers[l];
    Tensor& gw = grads[offset + 2 * l];
    Tensor& gb = grads[offset + 2 * l + 1];
    const std::size_t n = x.rows(), in = x.cols(), out = grad_out.cols();
    for (std::size_t i = 0; i < n; ++i) {
      const auto xr = x.row(i);
      const auto gr = grad_out.row(i);
      for (std::size_t p = 0; p < in; ++p) {
        const double xv = xr[p];
        if (xv == 0.0) continue;
        double* gwr = gw.data().data() + p * out;
        for (std::size_t j = 0; j < out; ++j) gwr[j] += xv * gr[j];
      }
      for (std::size_t j = 0; j < out; ++j) gb[j] += gr[j];
    }
    if (l == 0 && !input_grad) return Tensor();
    Tensor gin = Tensor::matrix(n, in);
    for (std::size_t i = 0; i < n; ++i) {
      const auto gr = grad_out.row(i);
      auto gi = gin.row(i);
      for (std::size_t p = 0; p < in; ++p) {
        const double* wr = layer.weight.data().data() + p * out;
        double acc = 0.0;
        for (std::size_t j = 0; j < out; ++j) acc += wr[j] * gr[j];
        gi[p] = acc;
      }
    }
    grad_out = std::move(gin);
  }
  return grad_out;
}

/// Backbone h and task classifier f_c, split at the feature space.
struct ModelBundle {
  Mlp backbone;
  Mlp classifier;

  void validate() const {
    backbone.spec.validate();
    classifier.spec.validate();
    if (backbone.spec.output_dim() != classifier.spec.input_dim()) {
      throw DimensionError("model: backbone output width " +
                           std::to_string(backbone.spec.output_dim()) +
                           " != classifier input width " +
                           std::to_string(classifier.spec.input_dim()));
    }
  }

  std::size_t backbone_tensor_count() const { return backbone.parameter_tensor_count(); }
  std::size_t tensor_count() const {
    return backbone.parameter_tensor_count() + classifier.parameter_tensor_count();
  }

  /// Parameters in canonical order: backbone (W, b per layer) then classifier.
  std::vector<Tensor*> parameters() {
    std::vector<Tensor*> out;
    for (Mlp* m : {&backbone, &classifier}) {
      for (DenseLayer& l : m->layers) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
      }
    }
    return out;
  }

  std::vector<const Tensor*> parameters() const {
    std::vector<const Tensor*> out;
    for (const Mlp* m : {&backbone, &classifier}) {
      for (const DenseLayer& l : m->layers) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
      }
    }
    return out;
  }

  /// Zero tensors shaped like the parameters.
  std::vector<Tensor> zero_like() const {
    std::vector<Tensor> out;
    for (const Tensor* p : parameters()) out.emplace_back(p->shape());
    return out;
  }

  friend bool operator==(const ModelBundle& a, const ModelBundle& b) {
    const auto pa = a.parameters(), pb = b.parameters();
    if (a.backbone.spec != b.backbone.spec || a.classifier.spec != b.classifier.spec) return false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      if (!(*pa[i] == *pb[i])) return false;
    }
    return true;
  }
};

inline ModelBundle init_model(const MlpSpec& backbone, const MlpSpec& classifier, Rng& rng) {
  ModelBundle m{init_mlp(backbone, rng), init_mlp(classifier, rng)};
  m.validate();
  return m;
}

struct ForwardResult {
  Tensor features;
  Tensor logits;
};

/// logits = f_c(h(batch)).
inline ForwardResult forward(const ModelBundle& model, const Tensor& batch) {
  Tensor features = mlp_forward(model.backbone, batch, nullptr, "backbone");
  Tensor logits = mlp_forward(model.classifier, features, nullptr, "classifier");
  return {std::move(features), std::move(logits)};
}

}  // namespace gmx
