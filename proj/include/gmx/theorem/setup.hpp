#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmx/numerics/error.hpp"
#include "gmx/numerics/rng.hpp"
#include "gmx/numerics/tensor.hpp"

namespace gmx {

/// Gaussian with diagonal covariance.
struct DiagGaussian {
  std::vector<double> mean;
  std::vector<double> var;

  std::size_t dim() const { return mean.size(); }

  void validate(std::string_view name) const {
    if (mean.empty()) throw ConfigError(std::string(name) + ": empty mean");
    if (var.size() != mean.size()) throw ConfigError(std::string(name) + ": mean and variance dims differ");
    for (double v : var) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + ": variances must be finite and >= 0");
    }
  }

  /// N x dim sample matrix.
  Tensor sample(std::size_t n, Rng rng) const {
    Tensor out = Tensor::matrix(n, dim());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < dim(); ++j) out(i, j) = mean[j] + std::sqrt(var[j]) * rng.normal();
    }
    return out;
  }
};

/// f_d(z) = w . z + b; "target" means f_d(z) > 0 (ties are non-positive).
struct LinearFd {
  std::vector<double> weight;
  double bias = 0.0;

  double operator()(std::span<const double> z) const {
    double s = 0.0;
    for (std::size_t j = 0; j < weight.size(); ++j) s += weight[j] * z[j];
    return s + bias;
  }

  std::vector<double> apply(const Tensor& samples) const {
    if (samples.rank() != 2 || samples.cols() != weight.size()) {
      throw DimensionError("linear f_d: expected " + std::to_string(weight.size()) + "-dim samples, got " +
                           shape_string(samples.shape()));
    }
    std::vector<double> out(samples.rows());
    for (std::size_t i = 0; i < samples.rows(); ++i) out[i] = (*this)(samples.row(i));
    return out;
  }
};

enum class IndependenceMode { Independent, Paired };

inline std::string_view to_string(IndependenceMode m) {
  return m == IndependenceMode::Independent ? "independent" : "paired";
}

inline IndependenceMode parse_independence(std::string_view s) {
  if (s == "independent") return IndependenceMode::Independent;
  if (s == "paired") return IndependenceMode::Paired;
  throw ConfigError("unknown independence mode '" + std::string(s) + "'");
}

/// Distributions, domain classifier and Monte-Carlo budget of one check.
/// Without an explicit `f_d`, the classifier is the best threshold along
/// `direction` (default mu_t - mu_s) on the original samples.
struct TheoremSetup {
  DiagGaussian p_s{{-2.0}, {0.0625}};
  DiagGaussian p_t{{2.0}, {0.0625}};
  DiagGaussian p_sg{{0.0}, {1.0}};
  DiagGaussian p_tg{{0.0}, {1.0}};
  IndependenceMode independence = IndependenceMode::Independent;
  std::optional<LinearFd> f_d;
  std::vector<double> direction;
  std::vector<double> lambda_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t samples = 200000;
  std::uint64_t seed = 1;
  bool assert_assumptions = true;

  std::size_t dim() const { return p_s.dim(); }

  void validate() const {
    p_s.validate("p_s");
    p_t.validate("p_t");
    p_sg.validate("p_sg");
    p_tg.validate("p_tg");
    for (const DiagGaussian* g : {&p_t, &p_sg, &p_tg}) {
      if (g->dim() != dim()) throw ConfigError("theorem: all distributions must share one dimension");
    }
    if (f_d && f_d->weight.size() != dim()) throw ConfigError("theorem: f_d weight has the wrong dimension");
    if (!direction.empty() && direction.size() != dim()) throw ConfigError("theorem: direction has the wrong dimension");
    if (lambda_grid.empty()) throw ConfigError("theorem: lambda grid is empty");
    for (double l : lambda_grid) {
      if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("theorem: lambda must lie in [0,1]");
    }
    if (samples < 10000) throw ConfigError("theorem: need at least 10000 Monte-Carlo samples");
  }

  std::vector<double> projection() const {
    if (f_d) return f_d->weight;
    if (!direction.empty()) return direction;
    std::vector<double> w(dim());
    bool any = false;
    for (std::size_t j = 0; j < dim(); ++j) any |= (w[j] = p_t.mean[j] - p_s.mean[j]) != 0.0;
    if (!any) w[0] = 1.0;
    return w;
  }
};

/// Generic-domain samples paired with `z`: the comonotone map
/// z_g = m_g + s_g (z - mu) / sigma, coordinate-wise.
inline Tensor paired_generic(const Tensor& z, const DiagGaussian& original, const DiagGaussian& generic) {
  Tensor out = z;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    for (std::size_t j = 0; j < z.cols(); ++j) {
      const double sd = std::sqrt(original.var[j]);
      const double u = sd > 0.0 ? (z(i, j) - original.mean[j]) / sd : 0.0;
      out(i, j) = generic.mean[j] + std::sqrt(generic.var[j]) * u;
    }
  }
  return out;
}

/// A random setup satisfying the theorem's assumptions: well separated
/// narrow originals and one shared generic distribution.
inline TheoremSetup random_theorem_setup(Rng& rng, std::size_t dim = 1, std::size_t samples = 50000) {
  TheoremSetup s;
  s.p_s = {std::vector<double>(dim), std::vector<double>(dim)};
  s.p_t = s.p_s;
  s.p_sg = s.p_s;
  for (std::size_t j = 0; j < dim; ++j) {
    const double sd = rng.uniform(0.1, 0.4);
    s.p_s.mean[j] = rng.uniform(-4.0, -2.0);
    s.p_t.mean[j] = rng.uniform(2.0, 4.0);
    s.p_s.var[j] = s.p_t.var[j] = sd * sd;
    s.p_sg.mean[j] = rng.uniform(-0.5, 0.5);
    const double g = rng.uniform(0.5, 2.0);
    s.p_sg.var[j] = g * g;
  }
  s.p_tg = s.p_sg;
  s.samples = samples;
  s.seed = rng.next_u64();
  return s;
}

}  // namespace gmx
