// Unit tests for metrics, theoremlab, sfda and the CLI.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "gmx/gmx.hpp"

using namespace gmx;
namespace fs = std::filesystem;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Tensor gaussian_cloud(std::size_t n, std::vector<double> mean, double sd, std::uint64_t seed) {
  return DiagGaussian{mean, std::vector<double>(mean.size(), sd * sd)}.sample(n, Rng(seed));
}

DomainClassifierConfig linear_cfg() {
  DomainClassifierConfig c;
  c.epochs = 60;
  return c;
}

// Small shape-texture benchmark that trains in well under a second.
BenchmarkSpec tiny_images() {
  BenchmarkSpec b;
  b.shape_texture.height = b.shape_texture.width = 16;
  b.shape_texture.samples_per_class = 12;
  return b;
}

PipelineConfig tiny_pipeline() {
  PipelineConfig p;
  p.vendor.epochs = 3;
  p.vendor.model.hidden = {16};
  p.vendor.model.feat_dim = 8;
  p.client.epochs = 2;
  return p;
}

TradeoffConfig tiny_tradeoff() {
  TradeoffConfig t;
  t.pipeline = tiny_pipeline();
  t.domain_classifier.epochs = 10;
  t.task_classifier.epochs = 10;
  return t;
}

void expect_models_equal(const ModelBundle& a, const ModelBundle& b) {
  const auto pa = a.parameters(), pb = b.parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(*pa[i], *pb[i]) << "tensor " << i;
}

void expect_logs_equal(const TrainLog& a, const TrainLog& b) {
  ASSERT_EQ(a.rows.size(), b.rows.size());
  EXPECT_EQ(train_log_csv(a), train_log_csv(b));
}

void expect_report_ranges(const MetricsReport& r) {
  EXPECT_TRUE(r.d_H >= 0.0 && r.d_H <= 1.0) << r.d_H;
  EXPECT_TRUE(r.kappa >= 0.0 && r.kappa <= 2.0) << r.kappa;
  EXPECT_TRUE(r.gamma_T >= 0.0 && r.gamma_T <= 1.0) << r.gamma_T;
  EXPECT_TRUE(r.gamma_D >= 0.0 && r.gamma_D <= 1.0) << r.gamma_D;
  EXPECT_DOUBLE_EQ(r.gamma_T, 1.0 - r.d_H);
  EXPECT_DOUBLE_EQ(r.gamma_D, 1.0 - 0.5 * r.kappa);
}

// ---- CLI helpers

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gmx_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GMX_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const char* kTinyConfig = R"(schema = 1
seed = 3
seeds = 1
shape_texture.height = 16
shape_texture.width = 16
shape_texture.samples_per_class = 10
model.hidden = 16
model.feat_dim = 8
vendor.epochs = 2
client.epochs = 1
metrics.domain.epochs = 5
metrics.task.epochs = 5
mixup.lambda = 0.1
)";

}  // namespace

// ----------------------------------------------------------------- metrics

TEST(Gammas, ClosedForm) {
  EXPECT_EQ(gammas(0.0, 0.0).gamma_T, 1.0);
  EXPECT_EQ(gammas(0.3, 2.0).gamma_D, 0.0);
  EXPECT_NEAR(gammas(0.9476, 0.0).gamma_T, 0.0524, 1e-12);
  EXPECT_THROW(gammas(1.2, 0.0), ConfigError);
  EXPECT_THROW(gammas(0.5, 2.5), ConfigError);
  EXPECT_THROW(gammas(-0.1, 0.0), ConfigError);
}

TEST(DomainDivergence, IdenticalDistributionsNearZero) {
  // 800 per side with half held out: 400 held-out samples each.
  const Tensor a = gaussian_cloud(800, {0.0, 0.0}, 1.0, 1), b = gaussian_cloud(800, {0.0, 0.0}, 1.0, 2);
  const DivergenceEstimate e = domain_divergence(a, b, linear_cfg());
  EXPECT_EQ(e.n_source, 400u);
  EXPECT_LT(e.d_H, 0.1);
  // Held-out accuracy of the domain classifier is 0.5 +- 0.05.
  EXPECT_NEAR(0.5 * (1.0 - e.rate_source + e.rate_target), 0.5, 0.05);
}

TEST(DomainDivergence, DisjointGaussiansNearOne) {
  const Tensor a = gaussian_cloud(800, {-2.0}, 0.25, 3), b = gaussian_cloud(800, {2.0}, 0.25, 4);
  const DivergenceEstimate e = domain_divergence(a, b, linear_cfg());
  EXPECT_GT(e.d_H, 0.99);
  EXPECT_GT(0.5 * (1.0 - e.rate_source + e.rate_target), 0.999);
}

TEST(DomainDivergence, SymmetricInArguments) {
  const Tensor a = gaussian_cloud(300, {0.0, 0.0}, 1.0, 5), b = gaussian_cloud(300, {0.7, 0.0}, 1.0, 6);
  const FeatureClassifier clf = fit_domain_classifier(a, b, linear_cfg());
  EXPECT_EQ(estimate_dH(clf, a, b).d_H, estimate_dH(clf, b, a).d_H);
}

TEST(DomainDivergence, RandomAndPerfectClassifiers) {
  const Tensor a = gaussian_cloud(2000, {-2.0}, 0.25, 7), b = gaussian_cloud(2000, {2.0}, 0.25, 8);
  FeatureClassifier perfect;
  perfect.mean = {0.0};
  perfect.scale = {1.0};
  perfect.net.spec = make_mlp_spec({1, 2}, Activation::Identity, Activation::Identity, true);
  perfect.net.layers = {{Tensor({1, 2}, {-1.0, 1.0}), Tensor({2}, 0.0)}};
  EXPECT_EQ(estimate_dH(perfect, a, b).d_H, 1.0);
  // A classifier that ignores its input: equal rates on both sides.
  FeatureClassifier random = perfect;
  random.net.layers[0].weight = Tensor({1, 2}, 0.0);
  random.net.layers[0].bias = Tensor({2}, {0.0, 0.1});
  EXPECT_EQ(estimate_dH(random, a, b).d_H, 0.0);
}

TEST(DomainDivergence, MixedGaussiansMatchNormalCdf) {
  // Originals N(-+2, 0.25^2); at lambda 0.5 the mixup domains are N(-+1, (0.0625+1)/4).
  const std::size_t n = 20000;
  const Tensor s = gaussian_cloud(n, {-2.0}, 0.25, 9), t = gaussian_cloud(n, {2.0}, 0.25, 10);
  const FeatureClassifier clf = fit_domain_classifier(s, t, linear_cfg());
  const Tensor sg = gaussian_cloud(n, {0.0}, 1.0, 11), tg = gaussian_cloud(n, {0.0}, 1.0, 12);
  const DivergenceEstimate e = estimate_dH(clf, convex_mix(s, sg, 0.5), convex_mix(t, tg, 0.5));
  const double oracle = 2.0 * normal_cdf(1.0 / std::sqrt(1.0625 / 4.0)) - 1.0;
  EXPECT_NEAR(oracle, 0.9476, 1e-4);
  EXPECT_NEAR(e.d_H, oracle, 0.01);
}

TEST(DomainDivergence, XorLinearVersusMlp) {
  // Source on the (+,+)/(-,-) diagonal, target on (+,-)/(-,+).
  auto clusters = [](std::vector<std::vector<double>> centers, std::uint64_t seed) {
    Tensor out = gaussian_cloud(400, centers[0], 0.2, seed);
    for (std::size_t k = 1; k < centers.size(); ++k) out = concat_rows(out, gaussian_cloud(400, centers[k], 0.2, seed + k));
    return out;
  };
  const Tensor s = clusters({{1, 1}, {-1, -1}}, 20), t = clusters({{1, -1}, {-1, 1}}, 30);
  // No line separates the diagonals. The best linear split isolates one
  // cluster: rate 1/2 on that domain, 0 on the other, so d_H is about 0.5.
  const DivergenceEstimate lin = domain_divergence(s, t, linear_cfg());
  EXPECT_LE(lin.d_H, 0.5 + 0.05);
  DomainClassifierConfig mlp = linear_cfg();
  mlp.family = HypothesisFamily::Mlp;
  mlp.epochs = 150;
  EXPECT_GT(domain_divergence(s, t, mlp).d_H, 0.95);
}

TEST(DomainDivergence, DimensionMismatch) {
  EXPECT_THROW(domain_divergence(Tensor::matrix(10, 2), Tensor::matrix(10, 3), linear_cfg()), DimensionError);
  EXPECT_THROW(domain_divergence(Tensor::matrix(0, 2), Tensor::matrix(10, 2), linear_cfg()), DimensionError);
}

TEST(Kappa, ShuffledLabelsNearChance) {
  Rng rng(40);
  const std::size_t n = 3000;
  const Tensor fs_ = gaussian_cloud(n, {0.0, 0.0, 0.0}, 1.0, 41), ft = gaussian_cloud(n, {0.0, 0.0, 0.0}, 1.0, 42);
  std::vector<int> ys(n), yt(n);
  for (int& y : ys) y = static_cast<int>(rng.index(4));
  for (int& y : yt) y = static_cast<int>(rng.index(4));
  const KappaEstimate k = estimate_kappa(fs_, ys, ft, yt, linear_cfg());
  EXPECT_NEAR(k.kappa, 1.5, 0.1);
}

TEST(Kappa, IdenticalSeparableDomainsNearZero) {
  const Tensor a0 = gaussian_cloud(300, {-3.0, 0.0}, 0.3, 43), a1 = gaussian_cloud(300, {3.0, 0.0}, 0.3, 44);
  const Tensor b0 = gaussian_cloud(300, {-3.0, 0.0}, 0.3, 45), b1 = gaussian_cloud(300, {3.0, 0.0}, 0.3, 46);
  std::vector<int> y(600, 0);
  std::fill(y.begin() + 300, y.end(), 1);
  const KappaEstimate k = estimate_kappa(concat_rows(a0, a1), y, concat_rows(b0, b1), y, linear_cfg());
  EXPECT_LT(k.kappa, 0.01);
  EXPECT_GT(gammas(0.0, k.kappa).gamma_D, 0.99);
}

TEST(Kappa, ConflictingLabelingsNearOne) {
  // Same features, labels swapped across domains: any hypothesis errs on
  // exactly one of each pair, so eps_s + eps_t = 1 for every threshold.
  const Tensor a0 = gaussian_cloud(300, {-3.0}, 0.3, 47), a1 = gaussian_cloud(300, {3.0}, 0.3, 48);
  const Tensor x = concat_rows(a0, a1);
  std::vector<int> ys(600, 0), yt(600, 1);
  std::fill(ys.begin() + 300, ys.end(), 1);
  std::fill(yt.begin() + 300, yt.end(), 0);
  const KappaEstimate k = estimate_kappa(x, ys, x, yt, linear_cfg());
  EXPECT_NEAR(k.kappa, 1.0, 0.05);
}

TEST(Kappa, MissingTargetLabelsIsRoleError) {
  const Tensor x = gaussian_cloud(20, {0.0}, 1.0, 1);
  const std::vector<int> y(20, 0);
  EXPECT_THROW(estimate_kappa(x, y, x, {}, linear_cfg()), RoleError);
}

TEST(Classifier, IndistinguishableClassesNearChance) {
  GaussianDomainConfig cfg;
  cfg.cells = {{DomainRole::Source, 0, {0.0, 0.0}, {1.0, 1.0}}, {DomainRole::Source, 1, {0.0, 0.0}, {1.0, 1.0}}};
  cfg.samples_per_cell = 1000;
  const DomainDataset ds = gen_gaussian_domains(cfg).datasets.at(DomainRole::Source);
  const DatasetSplit sp = split(ds, 0.5, 1);
  const std::vector<int> ytr = sp.train.labels(), yev = sp.eval.labels();
  const FeatureClassifier clf = train_feature_classifier(sp.train.batch(), ytr, 2, linear_cfg(), 1);
  EXPECT_NEAR(1.0 - error_rate(clf.predict(sp.eval.batch()), yev), 0.5, 0.05);
}

TEST(Tradeoff, RowsInGridOrderAndZeroEqualsBaseline) {
  const BenchmarkData data = make_benchmark(tiny_images(), 1);
  const TradeoffConfig cfg = tiny_tradeoff();
  const std::vector<double> grid = {0.5, 0.0, 1.0};
  const std::vector<TradeoffRow> rows = tradeoff_curve(data, MixupMode::Edge, grid, cfg, 1);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(rows[i].lambda, grid[i]);
    expect_report_ranges(rows[i].mixup);
    expect_report_ranges(rows[i].original);
  }
  // No-mixup baseline with the same seeds.
  TradeoffConfig base = cfg;
  base.pipeline.vendor.mixup.reset();
  base.pipeline.client.mixup.reset();
  const PipelineResult r = run_pipeline(data, base.pipeline, 1);
  const auto [mixed, orig] = measure_model(r.vendor_model, data, std::nullopt, base, 1);
  EXPECT_EQ(metrics_csv_row(0.0, MixupMode::Edge, rows[1].mixup, rows[1].target_acc, 1),
            metrics_csv_row(0.0, MixupMode::Edge, mixed, r.target_acc_after, 1));
  EXPECT_THROW(tradeoff_curve(data, MixupMode::Edge, std::vector<double>{}, cfg, 1), ConfigError);
  EXPECT_THROW(tradeoff_curve(data, MixupMode::Edge, std::vector<double>{1.5}, cfg, 1), ConfigError);
}

// ---------------------------------------------------------------- theorem

TEST(Phi, MonteCarloOracles) {
  const LinearFd identity{{1.0}, 0.0};
  const PhiEstimate far = mc_phi({{-2.0}, {0.0625}}, identity, 100000, 1);
  EXPECT_LT(far.phi, 1e-6);
  const PhiEstimate half = mc_phi({{0.0}, {1.0}}, identity, 100000, 2);
  EXPECT_NEAR(half.phi, 0.5, 3.0 * half.stderr_);
  EXPECT_EQ(mc_phi({{0.0}, {1.0}}, LinearFd{{0.0}, -1.0}, 10000, 3).phi, 0.0);
  EXPECT_THROW(mc_phi({{0.0}, {1.0}}, identity, 9999, 1), ConfigError);
}

TEST(Phi, TiesAreNonPositive) {
  const std::vector<double> v = {0.0, 0.0, 1.0, -1.0};
  EXPECT_EQ(phi_from_values(v).positives, 1u);
}

TEST(CaseTable, AllPositiveIsRowOne) {
  const std::vector<double> a(100, 0.5), b(100, 2.0);
  const CaseTableCounts c = exact_case_decomposition(a, b, 0.3);
  EXPECT_EQ(c.row1, 100u);
  EXPECT_EQ(c.positive(), 100u);
  EXPECT_EQ(c.total(), 100u);
}

TEST(CaseTable, LambdaZeroIsSignOfOriginal) {
  Rng rng(5);
  std::vector<double> g(5000), z(5000);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = rng.normal();
    z[i] = rng.normal();
  }
  const CaseTableCounts c = exact_case_decomposition(g, z, 0.0);
  const std::size_t direct = static_cast<std::size_t>(std::count_if(z.begin(), z.end(), [](double v) { return v > 0.0; }));
  EXPECT_EQ(c.positive(), direct);
}

TEST(CaseTable, RandomPairsMatchDirectCountExactly) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    std::vector<double> g(20000), z(20000);
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = rng.normal(rng.uniform(-1.0, 1.0), 1.0);
      z[i] = rng.normal(-2.0, 0.5);
      if (i % 97 == 0) z[i] = 0.0;  // exercise the tie rule
    }
    for (double lambda : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
      const CaseTableCounts c = exact_case_decomposition(g, z, lambda);
      std::size_t direct = 0;
      for (std::size_t i = 0; i < g.size(); ++i) direct += lambda * g[i] + (1.0 - lambda) * z[i] > 0.0;
      ASSERT_EQ(c.positive(), direct) << "seed " << seed << " lambda " << lambda;
      ASSERT_EQ(c.positive(), direct_positive_count(g, z, lambda));
      ASSERT_EQ(c.total(), g.size());
    }
  }
  EXPECT_THROW(exact_case_decomposition(std::vector<double>(3), std::vector<double>(4), 0.5), DimensionError);
}

TEST(Zeta, Oracles) {
  const std::size_t n = 200000;
  const DiagGaussian s{{-2.0}, {0.0625}}, g{{0.0}, {1.0}};
  const LinearFd f{{1.0}, 0.0};
  const std::vector<double> fs_ = f.apply(s.sample(n, Rng(1))), fg = f.apply(g.sample(n, Rng(2)));
  const ZetaEstimate half = zeta(fg, fs_, 0.5);
  EXPECT_NEAR(half.zeta, normal_cdf(2.0 / std::sqrt(1.0625)), 0.005);
  EXPECT_NEAR(half.zeta, 0.9738, 0.005);
  EXPECT_EQ(half.count + half.complement, n);
  EXPECT_NEAR(zeta(fg, fs_, 1.0).zeta, 0.5, 0.005);
  // lambda = 0: Pr[0 > f(z)] = 1 - phi.
  EXPECT_NEAR(zeta(fg, fs_, 0.0).zeta, 1.0 - phi_from_values(fs_).phi, 1e-12);
}

TEST(Theorem, ReferenceSetupMatchesCdfOracle) {
  TheoremSetup setup;
  const TheoremReport r = verify_theorem1(setup);
  EXPECT_TRUE(r.all_pass()) << theorem_summary(r);
  ASSERT_EQ(r.rows.size(), 9u);
  const TheoremRow& mid = r.rows[4];
  EXPECT_EQ(mid.lambda, 0.5);
  EXPECT_NEAR(mid.dH_orig, 1.0, 1e-3);
  EXPECT_NEAR(mid.dH_mix, 2.0 * normal_cdf(1.9403) - 1.0, 0.01);
  EXPECT_NEAR(mid.zeta_s, 0.9738, 0.005);
  for (const TheoremRow& row : r.rows) {
    for (double p : {row.phi_s, row.phi_t, row.phi_sg, row.phi_tg, row.phi_sm, row.phi_tm, row.zeta_s, row.zeta_t}) {
      EXPECT_TRUE(p >= 0.0 && p <= 1.0);
    }
  }
  EXPECT_NE(theorem_csv(r).find("lambda,phi_s,phi_t,phi_sg,phi_tg,phi_sm,phi_tm,zeta_s,zeta_t,dH_orig,dH_mix,fact_gap,stderr"),
            std::string::npos);
}

TEST(Theorem, Endpoints) {
  TheoremSetup setup;
  setup.lambda_grid = {0.0, 1.0};
  const TheoremReport r = verify_theorem1(setup);
  EXPECT_EQ(r.rows[0].dH_mix, r.rows[0].dH_orig);
  EXPECT_LT(r.rows[1].dH_mix, 0.01);
  EXPECT_TRUE(r.all_pass());
}

TEST(Theorem, RandomizedSetupsSatisfyConclusion) {
  Rng rng(2024);
  for (int i = 0; i < 10; ++i) {
    const std::size_t dim = 1 + static_cast<std::size_t>(i % 3);
    const TheoremSetup setup = random_theorem_setup(rng, dim, 50000);
    const TheoremReport r = verify_theorem1(setup);
    EXPECT_TRUE(r.all_pass()) << "setup " << i << "\n" << theorem_summary(r);
  }
}

TEST(Theorem, PairedModePasses) {
  TheoremSetup setup;
  setup.independence = IndependenceMode::Paired;
  setup.samples = 50000;
  const TheoremReport r = verify_theorem1(setup);
  EXPECT_TRUE(r.all_pass()) << theorem_summary(r);
}

TEST(Theorem, AssumptionGates) {
  TheoremSetup overlap;
  overlap.p_s.var = {4.0};
  overlap.p_t.var = {4.0};
  try {
    verify_theorem1(overlap);
    FAIL() << "expected AssumptionError";
  } catch (const AssumptionError& e) {
    EXPECT_NE(std::string(e.what()).find("perfect accuracy for domain classifier"), std::string::npos);
  }
  TheoremSetup separable_generic;
  separable_generic.p_tg.mean = {1.0};
  EXPECT_THROW(verify_theorem1(separable_generic), AssumptionError);
  separable_generic.assert_assumptions = false;
  EXPECT_NO_THROW(verify_theorem1(separable_generic));
  TheoremSetup bad;
  bad.samples = 100;
  EXPECT_THROW(verify_theorem1(bad), ConfigError);
}

TEST(Insight2, LambdaZeroSidesEqual) {
  const Insight2Report r = insight2_check(tiny_images(), tiny_tradeoff(), MixupMode::Feature, 0.0, {1, 2});
  EXPECT_EQ(r.lhs, r.rhs);
  EXPECT_TRUE(r.pass());
  EXPECT_THROW(insight2_check(tiny_images(), tiny_tradeoff(), MixupMode::Feature, 0.1, {}), ConfigError);
}

// ------------------------------------------------------------------- sfda

TEST(Vendor, SeparableGaussianSourceReachesHighAccuracy) {
  BenchmarkSpec spec;
  spec.generator = GeneratorKind::Gaussian;
  spec.gaussian.dim = 2;
  spec.gaussian.classes = 2;
  spec.gaussian.separation = 6.0;
  spec.gaussian.sd = 0.5;
  const BenchmarkData data = make_benchmark(spec, 1);
  VendorConfig cfg;
  cfg.mixup.reset();
  cfg.epochs = 50;
  cfg.optimizer.lr = 0.01;
  const VendorResult v = vendor_train(data.source_train, cfg);
  EXPECT_GE(evaluate(v.model, data.source_eval), 0.99);
}

TEST(Vendor, LambdaZeroEqualsPlainTraining) {
  const BenchmarkData data = make_benchmark(tiny_images(), 2);
  VendorConfig plain = tiny_pipeline().vendor;
  plain.mixup.reset();
  for (MixupMode mode : {MixupMode::Edge, MixupMode::Feature}) {
    VendorConfig zero = plain;
    zero.mixup = MixupConfig{};
    zero.mixup->mode = mode;
    zero.mixup->lambda = 0.0;
    const VendorResult a = vendor_train(data.source_train, plain), b = vendor_train(data.source_train, zero);
    expect_models_equal(a.model, b.model);
    expect_logs_equal(a.log, b.log);
  }
}

TEST(Vendor, IdentityAugmentationsMatchLambdaZeroLosses) {
  // All sub-domains identical, so z_g equals z up to the rounding of the mean.
  const BenchmarkData data = make_benchmark(tiny_images(), 3);
  VendorConfig zero = tiny_pipeline().vendor;
  zero.mixup = MixupConfig{};
  zero.mixup->mode = MixupMode::Feature;
  zero.mixup->lambda = 0.0;
  VendorConfig ident = zero;
  ident.mixup->lambda = 0.5;
  ident.mixup->augmentations = {"identity", "identity", "identity", "identity"};
  ident.mixup->stop_gradient = false;
  const VendorResult a = vendor_train(data.source_train, zero), b = vendor_train(data.source_train, ident);
  ASSERT_EQ(a.log.rows.size(), b.log.rows.size());
  for (std::size_t i = 0; i < a.log.rows.size(); ++i) EXPECT_NEAR(a.log.rows[i].loss_total, b.log.rows[i].loss_total, 1e-9);
}

TEST(Vendor, UnlabeledSourceIsRoleError) {
  const BenchmarkData data = make_benchmark(tiny_images(), 1);
  DomainDataset unlabeled = data.source_train;
  for (auto& s : unlabeled.samples) s.label.reset();
  EXPECT_THROW(vendor_train(unlabeled, tiny_pipeline().vendor), RoleError);
  EXPECT_THROW(vendor_train(data.target_train, tiny_pipeline().vendor), RoleError);
}

TEST(Client, QuarantineViolationIsRoleError) {
  const BenchmarkData data = make_benchmark(tiny_images(), 1);
  const PipelineConfig pc = tiny_pipeline();
  const ModelBundle model = vendor_train(data.source_train, pc.vendor).model;
  DomainDataset leaked = data.target_train;
  for (std::size_t i = 0; i < leaked.size(); ++i) leaked.samples[i].label = data.target_train_labels.labels[i];
  EXPECT_THROW(client_adapt(model, leaked, pc.client), RoleError);
  EXPECT_THROW(client_adapt(model, data.source_train, pc.client), RoleError);
}

TEST(Client, FrozenClassifierUntouched) {
  const BenchmarkData data = make_benchmark(tiny_images(), 4);
  PipelineConfig pc = tiny_pipeline();
  pc.client.finetune_iterations = 5;
  const ModelBundle model = vendor_train(data.source_train, pc.vendor).model;
  const ClientResult r = client_adapt(model, data.target_train, pc.client);
  EXPECT_EQ(r.finetune_steps, 5u);
  EXPECT_TRUE(r.model.classifier.layers[0].weight == model.classifier.layers[0].weight);
  EXPECT_TRUE(r.model.classifier.layers[0].bias == model.classifier.layers[0].bias);
  EXPECT_FALSE(r.model.backbone.layers[0].weight == model.backbone.layers[0].weight);
  pc.client.freeze_classifier = false;
  const ClientResult u = client_adapt(model, data.target_train, pc.client);
  EXPECT_FALSE(u.model.classifier.layers[0].weight == model.classifier.layers[0].weight);
}

TEST(Client, LogEpochsMonotoneAndAccuraciesInRange) {
  const BenchmarkData data = make_benchmark(tiny_images(), 5);
  const PipelineResult r = run_pipeline(data, tiny_pipeline(), 5);
  for (const TrainLog* log : {&r.vendor_log, &r.client_log}) {
    ASSERT_FALSE(log->rows.empty());
    for (std::size_t i = 0; i < log->rows.size(); ++i) {
      EXPECT_EQ(log->rows[i].epoch, i + 1);
      for (double a : {log->rows[i].src_acc, log->rows[i].tgt_acc}) {
        if (!std::isnan(a)) {
          EXPECT_TRUE(a >= 0.0 && a <= 1.0);
        }
      }
    }
  }
}

TEST(Client, WellSeparatedClustersConvergeToTruePartition) {
  BenchmarkSpec spec;
  spec.generator = GeneratorKind::Gaussian;
  spec.gaussian.dim = 2;
  spec.gaussian.classes = 2;
  spec.gaussian.separation = 6.0;
  spec.gaussian.shift = 1.5;
  spec.gaussian.sd = 0.5;
  const BenchmarkData data = make_benchmark(spec, 6);
  PipelineConfig pc;
  pc.vendor.mixup.reset();
  pc.client.mixup.reset();
  pc.vendor.optimizer.lr = 0.01;
  pc.vendor.model.hidden = {16};
  pc.vendor.model.feat_dim = 8;
  pc.client.optimizer.lr = 1e-3;
  const VendorResult v = vendor_train(data.source_train, pc.vendor);
  ASSERT_GT(evaluate(v.model, data.target_train, data.target_train_labels), 0.7);
  const ClientResult c = client_adapt(v.model, data.target_train, pc.client);
  const std::vector<int> pl = detail::refresh_pseudo_labels(c.model, data.target_train, nullptr, 0);
  EXPECT_GE(accuracy(pl, data.target_train_labels.labels), 0.98);
}

TEST(Pipeline, LambdaZeroEqualsNoMixupBaseline) {
  const BenchmarkData data = make_benchmark(tiny_images(), 7);
  PipelineConfig base = tiny_pipeline();
  base.vendor.mixup.reset();
  base.client.mixup.reset();
  for (MixupMode mode : {MixupMode::Edge, MixupMode::Feature}) {
    PipelineConfig zero = tiny_pipeline();
    zero.vendor.mixup->mode = zero.client.mixup->mode = mode;
    zero.vendor.mixup->lambda = zero.client.mixup->lambda = 0.0;
    const PipelineResult a = run_pipeline(data, base, 7), b = run_pipeline(data, zero, 7);
    expect_models_equal(a.vendor_model, b.vendor_model);
    expect_models_equal(a.adapted_model, b.adapted_model);
    expect_logs_equal(a.client_log, b.client_log);
    EXPECT_EQ(a.target_acc_after, b.target_acc_after);
  }
}

TEST(Pipeline, MoonsAdaptationGainOverFiveSeeds) {
  const std::string text = slurp(fs::path(GMX_CONFIG_DIR) / "moons.cfg");
  const ExperimentConfig cfg = parse_config(text);
  double before = 0.0, after = 0.0;
  for (std::uint64_t seed : cfg.seed_list()) {
    const PipelineResult r = run_pipeline(make_benchmark(cfg.benchmark, seed), cfg.pipeline(), seed);
    before += r.target_acc_before;
    after += r.target_acc_after;
  }
  EXPECT_GE(after / 5.0, before / 5.0) << "before " << before / 5.0 << " after " << after / 5.0;
}

TEST(PseudoLabels, PointMassClustersExact) {
  const Tensor f({4, 2}, {1, 0, 1, 0, 0, 1, 0, 1});
  const Tensor p({4, 2}, {0.9, 0.1, 0.8, 0.2, 0.3, 0.7, 0.1, 0.9});
  EXPECT_EQ(pseudo_label_centroids(f, p), (std::vector<int>{0, 0, 1, 1}));
}

TEST(PseudoLabels, UniformProbabilitiesTieToLowestIndex) {
  const Tensor f({4, 2}, {1, 0.2, 1, -0.2, -1, 0.2, -1, -0.2});
  const Tensor p({4, 2}, 0.5);
  EXPECT_EQ(pseudo_label_centroids(f, p), (std::vector<int>{0, 0, 0, 0}));
}

TEST(PseudoLabels, NoisyFourClusters) {
  Rng rng(8);
  const double centers[4][2] = {{5, 0}, {0, 5}, {-5, 0}, {0, -5}};
  const std::size_t n = 800;
  Tensor f = Tensor::matrix(n, 2), p = Tensor::matrix(n, 4, 0.02);
  std::vector<int> truth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int k = static_cast<int>(i % 4);
    truth[i] = k;
    f(i, 0) = centers[k][0] + rng.normal();
    f(i, 1) = centers[k][1] + rng.normal();
    const int noisy = rng.bernoulli(0.1) ? static_cast<int>((k + 1 + rng.index(3)) % 4) : k;
    p(i, static_cast<std::size_t>(noisy)) = 0.94;
  }
  EXPECT_GE(accuracy(pseudo_label_centroids(f, p), truth), 0.98);
  EXPECT_THROW(pseudo_label_centroids(f, Tensor::matrix(3, 4)), DimensionError);
}

TEST(Evaluate, MemorizerConstantAndRandomModels) {
  // One-hot inputs: an identity backbone and a lookup classifier memorize them.
  const std::size_t n = 8;
  DomainDataset ds;
  ds.class_count = 4;
  ds.kind = PayloadKind::vector(n);
  Tensor lookup = Tensor::matrix(n, 4);
  for (std::size_t i = 0; i < n; ++i) {
    Tensor x({n}, 0.0);
    x[i] = 1.0;
    ds.samples.push_back({x, static_cast<int>(i % 4)});
    lookup(i, i % 4) = 1.0;
  }
  Rng rng(1);
  ModelBundle memo = init_model(make_mlp_spec({n, n}, Activation::Identity, Activation::Identity),
                                make_mlp_spec({n, 4}, Activation::Identity, Activation::Identity, true), rng);
  memo.backbone.layers[0].weight = Tensor::matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) memo.backbone.layers[0].weight(i, i) = 1.0;
  memo.classifier.layers[0].weight = lookup;
  EXPECT_EQ(evaluate(memo, ds), 1.0);

  ModelBundle constant = memo;
  constant.classifier.layers[0].weight = Tensor::matrix(n, 4);
  constant.classifier.layers[0].bias = Tensor::vector({0.0, 0.0, 1.0, 0.0});
  EXPECT_EQ(evaluate(constant, ds), 0.25);

  BenchmarkSpec spec;
  spec.shape_texture.samples_per_class = 200;
  const BenchmarkDomains d = generate_domains(spec, 9);
  const ModelBundle random = build_model(ModelConfig{}, d.target.kind.flat_size(), 4, Rng(9));
  EXPECT_NEAR(evaluate(random, d.target, EvalLabels{std::vector<int>(d.target_labels.labels.begin(),
                                                                       d.target_labels.labels.begin() + 800)}),
              0.25, 0.07);
  EXPECT_THROW(evaluate(random, d.target), RoleError);
}

// -------------------------------------------------------------------- cli

TEST(Config, ErrorsNameTheField) {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("schema = 1\nvendor.epochz = 3\n").find("vendor.epochz"), std::string::npos);
  EXPECT_NE(message("schema = 1\nvendor.epochs = abc\n").find("vendor.epochs"), std::string::npos);
  EXPECT_NE(message("schema = 1\nmixup.lambda = 1.5\n").find("mixup"), std::string::npos);
  EXPECT_NE(message("schema = 1\nseed = 1\nseed = 2\n").find("already set"), std::string::npos);
  EXPECT_NE(message("seed = 1\n").find("schema"), std::string::npos);
  EXPECT_NE(message("schema = 2\n").find("schema"), std::string::npos);
  EXPECT_NE(message("schema = 1\ndata.source = a\n").find("data.target"), std::string::npos);
  EXPECT_EQ(message("schema = 1  # comment\n\nseed = 4\n"), "no error");
}

TEST(Config, ShippedConfigsParse) {
  for (const auto& entry : fs::directory_iterator(GMX_CONFIG_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    EXPECT_NO_THROW(parse_config(slurp(entry.path()), entry.path().parent_path())) << entry.path();
  }
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("exit");
  const fs::path cfg = dir / "tiny.cfg";
  write_file(cfg, kTinyConfig);
  write_file(dir / "bad.cfg", "schema = 1\nbogus = 1\n");
  write_file(dir / "missing.cfg", std::string(kTinyConfig) + "data.source = nope.gmxdata\ndata.target = nope2.gmxdata\n"
                                                              "data.target_labels = nope.csv\n");
  const std::string conf = std::string(GMX_CONFIG_DIR);
  EXPECT_EQ(run_cli("theorem --config " + conf + "/theorem.cfg --out " + (dir / "t").string()), 0);
  EXPECT_EQ(run_cli("theorem --config " + conf + "/theorem_overlap.cfg --out " + (dir / "o").string()), 3);
  EXPECT_EQ(run_cli("pipeline --config " + (dir / "bad.cfg").string() + " --out " + (dir / "b").string()), 2);
  EXPECT_EQ(run_cli("pipeline --config " + (dir / "missing.cfg").string() + " --out " + (dir / "m").string()), 2);
  EXPECT_EQ(run_cli("pipeline --config " + (dir / "nofile.cfg").string() + " --out " + (dir / "n").string()), 2);
  write_file(dir / "blocker", "x");
  EXPECT_EQ(run_cli("gen-data --config " + cfg.string() + " --out " + (dir / "blocker" / "sub").string()), 2);
  EXPECT_EQ(run_cli("frobnicate --config " + cfg.string()), 2);
  // lambda grid {0}: trivial pass with equal d_H values.
  EXPECT_EQ(run_cli("theorem --config " + conf + "/theorem.cfg --lambda-grid 0 --out " + (dir / "z").string()), 0);
  const std::string csv = slurp(dir / "z" / "theorem.csv");
  const auto row = csv.substr(csv.find('\n') + 1);
  std::vector<std::string> cells;
  std::stringstream ss(row.substr(0, row.find('\n')));
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  ASSERT_GE(cells.size(), 11u);
  EXPECT_EQ(cells[9], cells[10]);
  fs::remove_all(dir);
}

TEST(Cli, GenDataReproducibleAndManifest) {
  const fs::path dir = scratch_dir("gen");
  const fs::path cfg = dir / "tiny.cfg";
  write_file(cfg, kTinyConfig);
  ASSERT_EQ(run_cli("gen-data --config " + cfg.string() + " --out " + (dir / "a").string()), 0);
  ASSERT_EQ(run_cli("gen-data --config " + cfg.string() + " --out " + (dir / "b").string()), 0);
  for (const char* f : {"source.gmxdata", "target.gmxdata", "target_labels.csv"}) {
    ASSERT_TRUE(fs::exists(dir / "a" / f)) << f;
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  EXPECT_EQ(slurp(dir / "a" / "config.cfg"), kTinyConfig);
  const auto manifest = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  EXPECT_EQ(manifest["config_hash"].get<std::string>(), hex64(fnv1a64(slurp(dir / "a" / "config.cfg"))));
  EXPECT_EQ(manifest["files"].size(), 3u);
  fs::remove_all(dir);
}

TEST(Cli, PipelineFromDataFilesMatchesInlineGenerator) {
  const fs::path dir = scratch_dir("pipe");
  const fs::path cfg = dir / "tiny.cfg";
  write_file(cfg, kTinyConfig);
  ASSERT_EQ(run_cli("gen-data --config " + cfg.string() + " --out " + (dir / "data").string()), 0);
  write_file(dir / "files.cfg", std::string(kTinyConfig) + "data.source = data/source.gmxdata\n"
                                                           "data.target = data/target.gmxdata\n"
                                                           "data.target_labels = data/target_labels.csv\n");
  ASSERT_EQ(run_cli("pipeline --config " + cfg.string() + " --out " + (dir / "inline").string()), 0);
  ASSERT_EQ(run_cli("pipeline --config " + (dir / "files.cfg").string() + " --out " + (dir / "files").string()), 0);
  EXPECT_EQ(slurp(dir / "inline" / "metrics.csv"), slurp(dir / "files" / "metrics.csv"));
  EXPECT_TRUE(fs::exists(dir / "inline" / "vendor.ckpt"));
  EXPECT_TRUE(fs::exists(dir / "inline" / "client_log.csv"));
  fs::remove_all(dir);
}

TEST(Cli, SweepRowCount) {
  const fs::path dir = scratch_dir("sweep");
  const fs::path cfg = dir / "tiny.cfg";
  write_file(cfg, std::string(kTinyConfig) + "sweep.lambda_grid = 0, 0.1, 0.25, 0.5, 0.8, 1\n");
  ASSERT_EQ(run_cli("sweep --config " + cfg.string() + " --seeds 2 --out " + (dir / "s").string()), 0);
  const std::string csv = slurp(dir / "s" / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 6 * 2);
  fs::remove_all(dir);
}
