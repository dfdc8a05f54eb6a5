#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gmx/numerics/error.hpp"
#include "gmx/numerics/rng.hpp"
#include "gmx/numerics/tensor.hpp"
#include "gmx/synthdata/io.hpp"
#include "gmx/theorem/setup.hpp"

namespace gmx {

struct PhiEstimate {
  double phi = 0.0;
  double stderr_ = 0.0;
  std::size_t positives = 0;
  std::size_t n = 0;
};

inline PhiEstimate phi_from_values(std::span<const double> f_values) {
  if (f_values.empty()) throw DimensionError("phi: no samples");
  PhiEstimate e;
  e.n = f_values.size();
  for (double v : f_values) e.positives += v > 0.0;
  e.phi = static_cast<double>(e.positives) / static_cast<double>(e.n);
  e.stderr_ = std::sqrt(e.phi * (1.0 - e.phi) / static_cast<double>(e.n));
  return e;
}

/// Pr[f_d(z) > 0] for z ~ dist from N fresh draws, with binomial stderr.
inline PhiEstimate mc_phi(const DiagGaussian& dist, const LinearFd& f_d, std::size_t n, std::uint64_t seed) {
  if (n < 10000) throw ConfigError("mc_phi: need N >= 10000, got " + std::to_string(n));
  dist.validate("mc_phi");
  const std::vector<double> f = f_d.apply(dist.sample(n, Rng(seed)));
  return phi_from_values(f);
}

/// Rows of the sign/magnitude case table for a = lambda f(z_g) and
/// b = (1 - lambda) f(z).
struct CaseTableCounts {
  std::size_t row1 = 0;   // a > 0, b > 0
  std::size_t row21 = 0;  // a > 0, b <= 0, |a| > |b|
  std::size_t row22 = 0;  // a > 0, b <= 0, |a| <= |b|
  std::size_t row31 = 0;  // a <= 0, b > 0, |a| < |b|
  std::size_t row32 = 0;  // a <= 0, b > 0, |a| >= |b|
  std::size_t row4 = 0;   // a <= 0, b <= 0

  std::size_t positive() const { return row1 + row21 + row31; }
  std::size_t total() const { return row1 + row21 + row22 + row31 + row32 + row4; }
  friend bool operator==(const CaseTableCounts&, const CaseTableCounts&) = default;
};

namespace detail {

inline void require_paired(std::span<const double> f_zg, std::span<const double> f_z, std::string_view op) {
  if (f_zg.size() != f_z.size()) {
    throw DimensionError(std::string(op) + ": " + std::to_string(f_zg.size()) + " generic values vs " +
                         std::to_string(f_z.size()) + " original values");
  }
}

}  // namespace detail

/// Case-table counts over paired classifier outputs (f(z_g), f(z)).
inline CaseTableCounts exact_case_decomposition(std::span<const double> f_zg, std::span<const double> f_z,
                                                double lambda) {
  detail::require_paired(f_zg, f_z, "case decomposition");
  CaseTableCounts c;
  for (std::size_t i = 0; i < f_z.size(); ++i) {
    const double a = lambda * f_zg[i];
    const double b = (1.0 - lambda) * f_z[i];
    if (a > 0.0) {
      if (b > 0.0) {
        ++c.row1;
      } else if (std::abs(a) > std::abs(b)) {
        ++c.row21;
      } else {
        ++c.row22;
      }
    } else if (b > 0.0) {
      if (std::abs(a) < std::abs(b)) {
        ++c.row31;
      } else {
        ++c.row32;
      }
    } else {
      ++c.row4;
    }
  }
  return c;
}

/// Direct count of lambda f(z_g) + (1 - lambda) f(z) > 0.
inline std::size_t direct_positive_count(std::span<const double> f_zg, std::span<const double> f_z, double lambda) {
  detail::require_paired(f_zg, f_z, "direct count");
  std::size_t n = 0;
  for (std::size_t i = 0; i < f_z.size(); ++i) {
    const double a = lambda * f_zg[i];
    const double b = (1.0 - lambda) * f_z[i];
    n += a + b > 0.0;
  }
  return n;
}

struct ZetaEstimate {
  double zeta = 0.0;
  std::size_t count = 0;       // lambda f(z_g) > (1 - lambda) f(z)
  std::size_t complement = 0;  // the rest
  std::size_t n = 0;
};

/// Pr[lambda f(z_g) > (1 - lambda) f(z)] over paired draws.
inline ZetaEstimate zeta(std::span<const double> f_zg, std::span<const double> f_z, double lambda) {
  detail::require_paired(f_zg, f_z, "zeta");
  if (f_z.empty()) throw DimensionError("zeta: no samples");
  ZetaEstimate z;
  z.n = f_z.size();
  for (std::size_t i = 0; i < f_z.size(); ++i) {
    if (lambda * f_zg[i] > (1.0 - lambda) * f_z[i]) {
      ++z.count;
    } else {
      ++z.complement;
    }
  }
  z.zeta = static_cast<double>(z.count) / static_cast<double>(z.n);
  return z;
}

/// Largest |Pr_pos[v > t] - Pr_neg[v > t]| over thresholds t placed
/// between consecutive distinct values (and outside the range).
struct ThresholdFit {
  double threshold = 0.0;
  double orientation = 1.0;  // +1: positive above the threshold
  double gap = 0.0;
  double rate_neg = 0.0;
  double rate_pos = 0.0;
};

inline ThresholdFit best_threshold(std::span<const double> neg, std::span<const double> pos) {
  if (neg.empty() || pos.empty()) throw DimensionError("threshold sweep: empty sample");
  std::vector<std::pair<double, int>> all;
  all.reserve(neg.size() + pos.size());
  for (double v : neg) all.emplace_back(v, 0);
  for (double v : pos) all.emplace_back(v, 1);
  std::sort(all.begin(), all.end());
  const double nn = static_cast<double>(neg.size()), np = static_cast<double>(pos.size());
  // Threshold below everything: both rates are 1.
  std::size_t above_neg = neg.size(), above_pos = pos.size();
  ThresholdFit best{all.front().first - 1.0, 1.0, 0.0, 1.0, 1.0};
  for (std::size_t i = 0; i < all.size();) {
    const double v = all[i].first;
    while (i < all.size() && all[i].first == v) {
      (all[i].second ? above_pos : above_neg)--;
      ++i;
    }
    const double t = i < all.size() ? v + (all[i].first - v) / 2.0 : v + 1.0;
    const double rn = static_cast<double>(above_neg) / nn, rp = static_cast<double>(above_pos) / np;
    if (std::abs(rp - rn) > best.gap) best = {t, rp >= rn ? 1.0 : -1.0, std::abs(rp - rn), rn, rp};
  }
  if (best.orientation < 0.0) {
    best.rate_neg = 1.0 - best.rate_neg;
    best.rate_pos = 1.0 - best.rate_pos;
  }
  return best;
}

struct TheoremRow {
  double lambda = 0.0;
  double phi_s = 0.0, phi_t = 0.0, phi_sg = 0.0, phi_tg = 0.0, phi_sm = 0.0, phi_tm = 0.0;
  double zeta_s = 0.0, zeta_t = 0.0;
  double dH_orig = 0.0, dH_mix = 0.0;
  double fact_gap = 0.0;
  double stderr_ = 0.0;  // of dH_mix
  double stderr_phi_sm = 0.0, stderr_phi_tm = 0.0, stderr_dH_orig = 0.0;
  CaseTableCounts cases_s, cases_t;
  std::size_t direct_s = 0, direct_t = 0;
};

struct TheoremCheck {
  std::string name;
  double lambda = 0.0;
  bool pass = false;
  std::string detail;
};

struct TheoremReport {
  LinearFd f_d;
  double stderr_phi_s = 0.0, stderr_phi_t = 0.0;
  double accuracy_original = 0.0;
  double accuracy_generic = 0.0;
  std::vector<TheoremRow> rows;
  std::vector<TheoremCheck> checks;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const TheoremCheck& c) { return c.pass; });
  }
};

namespace detail {

inline std::vector<double> project(const Tensor& z, std::span<const double> w) {
  std::vector<double> out(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double s = 0.0;
    const auto r = z.row(i);
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * r[j];
    out[i] = s;
  }
  return out;
}

inline std::string fmt(double v) { return format_fixed(v, 6); }

}  // namespace detail

/// Monte-Carlo check of the theorem on one setup: the fitted f_d, phi of all
/// six distributions, zeta, d_H before and after mixup and the case table
/// per lambda, plus 3-sigma checks of the monotone interpretation and the
/// divergence inequality. Throws AssumptionError when the setup violates
/// the assumptions and assert_assumptions is set.
inline TheoremReport verify_theorem1(const TheoremSetup& setup) {
  setup.validate();
  const Rng root(setup.seed);
  const std::size_t n = setup.samples;
  const Tensor z_s = setup.p_s.sample(n, root.substream("p_s"));
  const Tensor z_t = setup.p_t.sample(n, root.substream("p_t"));
  Tensor z_sg, z_tg;
  if (setup.independence == IndependenceMode::Independent) {
    z_sg = setup.p_sg.sample(n, root.substream("p_sg"));
    z_tg = setup.p_tg.sample(n, root.substream("p_tg"));
  } else {
    z_sg = paired_generic(z_s, setup.p_s, setup.p_sg);
    z_tg = paired_generic(z_t, setup.p_t, setup.p_tg);
  }

  TheoremReport report;
  const std::vector<double> w = setup.projection();
  if (setup.f_d) {
    report.f_d = *setup.f_d;
  } else {
    const ThresholdFit fit = best_threshold(detail::project(z_s, w), detail::project(z_t, w));
    report.f_d.weight = w;
    for (double& x : report.f_d.weight) x *= fit.orientation;
    report.f_d.bias = -fit.orientation * fit.threshold;
  }
  const LinearFd& f = report.f_d;
  const std::vector<double> f_s = f.apply(z_s), f_t = f.apply(z_t), f_sg = f.apply(z_sg), f_tg = f.apply(z_tg);
  const PhiEstimate phi_s = phi_from_values(f_s), phi_t = phi_from_values(f_t);
  const PhiEstimate phi_sg = phi_from_values(f_sg), phi_tg = phi_from_values(f_tg);
  report.stderr_phi_s = phi_s.stderr_;
  report.stderr_phi_t = phi_t.stderr_;
  report.accuracy_original = 0.5 * (1.0 - phi_s.phi + phi_t.phi);
  report.accuracy_generic = 0.5 * (1.0 - phi_sg.phi + phi_tg.phi);
  if (setup.assert_assumptions) {
    if (!(report.accuracy_original > 0.999)) {
      throw AssumptionError("assumption violated: perfect accuracy for domain classifier (accuracy " +
                            detail::fmt(report.accuracy_original) + " <= 0.999)");
    }
    if (std::abs(report.accuracy_generic - 0.5) > 0.01) {
      throw AssumptionError("assumption violated: generic domains impossible to separate (accuracy " +
                            detail::fmt(report.accuracy_generic) + " outside 0.5 +- 0.01)");
    }
  }
  const double dH_orig = std::abs(phi_t.phi - phi_s.phi);
  const double se_orig = std::sqrt(phi_s.stderr_ * phi_s.stderr_ + phi_t.stderr_ * phi_t.stderr_);

  for (double lambda : setup.lambda_grid) {
    TheoremRow r;
    r.lambda = lambda;
    r.phi_s = phi_s.phi;
    r.phi_t = phi_t.phi;
    r.phi_sg = phi_sg.phi;
    r.phi_tg = phi_tg.phi;
    r.cases_s = exact_case_decomposition(f_sg, f_s, lambda);
    r.cases_t = exact_case_decomposition(f_tg, f_t, lambda);
    r.direct_s = direct_positive_count(f_sg, f_s, lambda);
    r.direct_t = direct_positive_count(f_tg, f_t, lambda);
    const double dn = static_cast<double>(n);
    r.phi_sm = static_cast<double>(r.direct_s) / dn;
    r.phi_tm = static_cast<double>(r.direct_t) / dn;
    r.stderr_phi_sm = std::sqrt(r.phi_sm * (1.0 - r.phi_sm) / dn);
    r.stderr_phi_tm = std::sqrt(r.phi_tm * (1.0 - r.phi_tm) / dn);
    r.zeta_s = zeta(f_sg, f_s, lambda).zeta;
    r.zeta_t = zeta(f_tg, f_t, lambda).zeta;
    r.fact_gap = std::abs(r.phi_sm - (r.phi_s * (1.0 - r.zeta_s) + r.zeta_s / 2.0));
    r.dH_orig = dH_orig;
    r.stderr_dH_orig = se_orig;

    // Best threshold along w on the mixup samples approximates the sup.
    const ThresholdFit mix = best_threshold(detail::project(convex_mix(z_s, z_sg, lambda), w),
                                            detail::project(convex_mix(z_t, z_tg, lambda), w));
    r.dH_mix = mix.gap;
    r.stderr_ = std::sqrt(mix.rate_neg * (1.0 - mix.rate_neg) / dn + mix.rate_pos * (1.0 - mix.rate_pos) / dn);
    report.rows.push_back(r);

    auto check = [&](std::string name, bool pass, std::string detail) {
      report.checks.push_back({std::move(name), lambda, pass, std::move(detail)});
    };
    const double tol_s = 3.0 * std::hypot(r.stderr_phi_sm, phi_s.stderr_);
    check("phi_sm >= phi_s", r.phi_sm >= r.phi_s - tol_s,
          detail::fmt(r.phi_sm) + " vs " + detail::fmt(r.phi_s) + " (3 sigma " + detail::fmt(tol_s) + ")");
    const double tol_t = 3.0 * std::hypot(r.stderr_phi_tm, phi_t.stderr_);
    check("phi_tm <= phi_t", r.phi_tm <= r.phi_t + tol_t,
          detail::fmt(r.phi_tm) + " vs " + detail::fmt(r.phi_t) + " (3 sigma " + detail::fmt(tol_t) + ")");
    const double tol_d = 3.0 * std::hypot(r.stderr_, se_orig);
    check("dH_mix <= dH_orig", r.dH_mix <= r.dH_orig + tol_d,
          detail::fmt(r.dH_mix) + " vs " + detail::fmt(r.dH_orig) + " (3 sigma " + detail::fmt(tol_d) + ")");
    check("case table reproduces direct count",
          r.cases_s.positive() == r.direct_s && r.cases_t.positive() == r.direct_t && r.cases_s.total() == n &&
              r.cases_t.total() == n,
          std::to_string(r.cases_s.positive()) + "/" + std::to_string(r.direct_s) + ", " +
              std::to_string(r.cases_t.positive()) + "/" + std::to_string(r.direct_t));
  }
  return report;
}

inline std::string theorem_csv(const TheoremReport& report) {
  std::string out = "lambda,phi_s,phi_t,phi_sg,phi_tg,phi_sm,phi_tm,zeta_s,zeta_t,dH_orig,dH_mix,fact_gap,stderr\n";
  for (const TheoremRow& r : report.rows) {
    for (double v : {r.lambda, r.phi_s, r.phi_t, r.phi_sg, r.phi_tg, r.phi_sm, r.phi_tm, r.zeta_s, r.zeta_t, r.dH_orig,
                     r.dH_mix, r.fact_gap}) {
      out += detail::fmt(v) + ',';
    }
    out += detail::fmt(r.stderr_) + '\n';
  }
  return out;
}

/// One PASS/FAIL line per check, then an overall verdict.
inline std::string theorem_summary(const TheoremReport& report) {
  std::ostringstream os;
  os << "f_d: weight=(";
  for (std::size_t j = 0; j < report.f_d.weight.size(); ++j) os << (j ? "," : "") << detail::fmt(report.f_d.weight[j]);
  os << ") bias=" << detail::fmt(report.f_d.bias) << '\n';
  os << "accuracy on (p_s, p_t): " << detail::fmt(report.accuracy_original) << '\n';
  os << "accuracy on (p_sg, p_tg): " << detail::fmt(report.accuracy_generic) << '\n';
  for (const TheoremCheck& c : report.checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name << " at lambda=" << detail::fmt(c.lambda) << ": " << c.detail << '\n';
  }
  os << (report.all_pass() ? "OVERALL PASS" : "OVERALL FAIL") << '\n';
  return os.str();
}

}  // namespace gmx
