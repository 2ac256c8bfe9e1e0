#include "gsd/datasets.hpp"
#include "gsd/denoise.hpp"
#include "gsd/diagnostics.hpp"
#include "gsd/error.hpp"
#include "gsd/filters.hpp"
#include "gsd/spectral.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace gsd;
using namespace gsd::testing;

TEST(NormalizeFeatures, RowsL1) {
  FeatureMatrix x(3, 2);
  x << 2, 2, 0, 0, 3, -1;
  const NormalizedFeatures n = normalize_features(x);
  EXPECT_DOUBLE_EQ(n.features(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(n.features(0, 1), 0.5);
  EXPECT_EQ(n.features.row(1), x.row(1));
  EXPECT_DOUBLE_EQ(n.features(2, 0), 0.75);
  EXPECT_DOUBLE_EQ(n.features(2, 1), -0.25);
  EXPECT_EQ(n.zero_rows, (std::vector<Index>{1}));
}

TEST(NormalizeFeatures, RowsL2AndNonFinite) {
  FeatureMatrix x(1, 2);
  x << 3, 4;
  EXPECT_NEAR(normalize_features(x, RowNorm::l2).features.row(0).norm(), 1.0, 1e-15);
  x(0, 1) = std::nan("");
  EXPECT_THROW(normalize_features(x), DomainError);
}

TEST(FeatureNoise, ZeroSigmaIsExact) {
  const FeatureMatrix x = random_features(10, 3, 1);
  EXPECT_EQ(inject_feature_noise(x, NoiseSpec{.sigma = 0.0, .seed = 5}), x);
  EXPECT_THROW(inject_feature_noise(x, NoiseSpec{.sigma = -1.0}), DomainError);
}

TEST(FeatureNoise, DeterministicPerSeed) {
  const FeatureMatrix x = random_features(10, 3, 1);
  const NoiseSpec s{.sigma = 0.1, .seed = 42};
  EXPECT_EQ(inject_feature_noise(x, s), inject_feature_noise(x, s));
  EXPECT_NE(inject_feature_noise(x, s), inject_feature_noise(x, NoiseSpec{.sigma = 0.1, .seed = 43}));
}

TEST(FeatureNoise, EmpiricalStandardDeviation) {
  const FeatureMatrix x = FeatureMatrix::Zero(1000, 1000);
  const double sigma = 0.01;
  const FeatureMatrix z = inject_feature_noise(x, NoiseSpec{.sigma = sigma, .seed = 7});
  const double m = z.mean();
  const double sd = std::sqrt((z.array() - m).square().sum() / (static_cast<double>(z.size()) - 1.0));
  EXPECT_NEAR(sd / sigma, 1.0, 0.01);
  EXPECT_NEAR(m, 0.0, 5.0 * sigma / 1000.0);
}

TEST(EdgeNoise, ZeroRatioUnchanged) {
  const Graph g = random_graph(30, 1);
  const EdgeNoiseResult r = inject_edge_noise(g, NoiseSpec{.edge_ratio = 0.0});
  EXPECT_EQ(r.graph, g);
  EXPECT_EQ(r.added + r.removed, 0);
}

TEST(EdgeNoise, CountsExactOperations) {
  // A 100-edge graph: a ring over 50 nodes plus 50 chords.
  std::vector<Edge> e;
  for (Index i = 0; i < 50; ++i) e.push_back({i, (i + 1) % 50, 1.0});
  for (Index i = 0; i < 50; ++i) e.push_back({i, (i + 7) % 50, 1.0});
  const Graph g = build_graph(50, e);
  ASSERT_EQ(g.num_edges(), 100);
  const EdgeNoiseResult r = inject_edge_noise(g, NoiseSpec{.edge_ratio = 0.2, .seed = 3});
  EXPECT_EQ(r.added + r.removed, 20);
  EXPECT_EQ(r.graph.num_edges(), 100 + r.added - r.removed);
  EXPECT_EQ(r.graph.num_nodes(), 50);
  for (double d : r.graph.degrees()) EXPECT_GT(d, 0.0);
  for (const Edge& edge : r.graph.edges()) {
    EXPECT_GT(edge.weight, 0.0);
    EXPECT_EQ(r.graph.weight(edge.j, edge.i), edge.weight);
  }
}

TEST(EdgeNoise, DeterministicPerSeed) {
  const Graph g = random_graph(40, 2);
  const NoiseSpec s{.edge_ratio = 0.3, .seed = 9};
  EXPECT_EQ(inject_edge_noise(g, s).graph, inject_edge_noise(g, s).graph);
}

TEST(EdgeNoise, Errors) {
  // Single edge: any removal would isolate a node.
  EXPECT_THROW(inject_edge_noise(path2(), NoiseSpec{.edge_ratio = 1.0, .seed = 0}), DomainError);
  EXPECT_THROW(inject_edge_noise(path2(), NoiseSpec{.edge_ratio = 0.5}), DomainError);
  // Triangle is complete; additions are impossible. Some seed draws one.
  bool threw = false;
  for (std::uint64_t seed = 0; seed < 10 && !threw; ++seed) {
    try {
      inject_edge_noise(triangle(), NoiseSpec{.edge_ratio = 1.0, .seed = seed});
    } catch (const DomainError&) {
      threw = true;
    }
  }
  EXPECT_TRUE(threw);
}

TEST(Report, IdentityCases) {
  const Graph g = random_graph(20, 3);
  const NormalizedOps ops = normalized_ops(g);
  const FeatureMatrix truth = random_features(20, 4, 1);
  const FeatureMatrix noisy = inject_feature_noise(truth, NoiseSpec{.sigma = 0.1, .seed = 1});
  const DenoiseReport same = denoise_report(ops, truth, truth, noisy);
  for (double d : same.noise_after) EXPECT_EQ(d, 0.0);
  const DenoiseReport passthrough = denoise_report(ops, noisy, truth, noisy);
  EXPECT_EQ(passthrough.noise_after, passthrough.noise_before);
  for (Index i = 0; i < 20; ++i) {
    EXPECT_DOUBLE_EQ(passthrough.noise_before[static_cast<std::size_t>(i)], (noisy.row(i) - truth.row(i)).norm());
  }
  EXPECT_EQ(passthrough.tv_before, passthrough.tv_after);
  EXPECT_THROW(denoise_report(ops, FeatureMatrix::Zero(3, 4), truth, noisy), DimensionError);
}

TEST(Report, CsvAndSummary) {
  DenoiseReport r;
  r.noise_before = {0.5, 1.0};
  r.noise_after = {0.25, 0.5};
  r.mean_noise_before = 0.75;
  r.mean_noise_after = 0.375;
  r.tv_before = 2.0;
  r.tv_after = 1.0;
  std::ostringstream csv, json;
  write_report_csv(csv, r);
  EXPECT_EQ(csv.str(), "node_id,noise_before,noise_after\n0,0.5,0.25\n1,1,0.5\n");
  write_report_summary(json, r);
  EXPECT_NE(json.str().find("\"tv_after\": 1.0"), std::string::npos);
}

TEST(Report, GsdnfReducesNoiseOnSbm) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SbmSpec spec;
    spec.n_nodes = 100;
    spec.p_in = 0.1;
    spec.p_out = 0.01;
    spec.feature_noise_sigma = 0.01;
    spec.split = {20, 20, 40};
    spec.seed = seed;
    const SbmResult s = gen_sbm(spec);
    const NormalizedOps ops = normalized_ops(s.dataset.graph);
    DenoiseConfig cfg;
    const FeatureMatrix out = gsdnf_apply(ops, cfg, s.dataset.features);
    const DenoiseReport r = denoise_report(ops, out, s.ground_truth, s.dataset.features);
    wins += r.mean_noise_after < r.mean_noise_before ? 1 : 0;
  }
  EXPECT_EQ(wins, 20);
}

TEST(Problem2, ZeroEpsIsTheClosedFormBitForBit) {
  const Graph g = random_graph(30, 4);
  const FeatureMatrix x = random_features(30, 3, 2);
  const Problem2Result r = problem2_solve(g, x, 0.6, 0.0);
  const FeatureMatrix closed = closed_form_denoise(normalized_ops(g), x, 0.6);
  EXPECT_TRUE((r.features.array() == closed.array()).all());
  EXPECT_TRUE((r.adjacency.array() == normalized_ops(g).a_norm.to_dense().array()).all());
  EXPECT_TRUE(r.converged);
}

TEST(Problem2, OneIterationUnrolled) {
  const Graph g = random_graph(20, 5);
  const FeatureMatrix x = random_features(20, 2, 3);
  const double s = 0.3;
  const Problem2Result r = problem2_solve(g, x, 0.5, s, Problem2Options{.iters = 1});
  const FeatureMatrix x1 = closed_form_denoise(normalized_ops(g), x, 0.5);
  const Eigen::MatrixXd want = normalized_ops(g).a_norm.to_dense() + s * x1 * x1.transpose() / x1.squaredNorm();
  EXPECT_LT((r.features - x1).norm(), 1e-14);
  EXPECT_LT((r.adjacency - want).norm(), 1e-14);
  EXPECT_EQ(r.iterations, 1);
}

TEST(Problem2, SecondIterateUsesUpdatedAdjacency) {
  const Graph g = random_graph(20, 6);
  const FeatureMatrix x = random_features(20, 2, 4);
  const double s = 0.2;
  const Problem2Result one = problem2_solve(g, x, 0.5, s, Problem2Options{.iters = 1});
  const Problem2Result two = problem2_solve(g, x, 0.5, s, Problem2Options{.iters = 2, .tol = 0.0});
  EXPECT_LT((two.features - resolvent_smooth(one.adjacency, x, 0.5)).norm(), 1e-14);
}

TEST(Problem2, SmoothSignalIsFixedPoint) {
  const Graph g = path2();
  for (double alpha : {0.2, 0.5, 0.9}) {
    const Problem2Result r = problem2_solve(g, column({1, 1}), alpha, 0.0);
    EXPECT_LT((r.features - column({1, 1})).norm(), 1e-14);
    // With eps2 > 0 the literal update lifts the smooth eigenvalue; the
    // renormalized variant keeps the fixed point.
    const Problem2Result rn =
        problem2_solve(g, column({1, 1}), alpha, 0.5, Problem2Options{.iters = 5, .renormalize = true});
    EXPECT_LT((rn.features - column({1, 1})).norm(), 1e-14);
  }
}

TEST(Problem2, NonConvergenceIsFlagged) {
  const Graph g = random_graph(20, 7);
  const FeatureMatrix x = random_features(20, 2, 5);
  const Problem2Result r = problem2_solve(g, x, 0.5, 0.2, Problem2Options{.iters = 1, .tol = 0.0});
  EXPECT_FALSE(r.converged);
}

TEST(Problem2, Errors) {
  const Graph g = path2();
  EXPECT_THROW(problem2_solve(g, column({1, 0}), 1.0, 0.1), DomainError);
  EXPECT_THROW(problem2_solve(g, column({1, 0}), 0.5, -0.1), DomainError);
  EXPECT_THROW(problem2_solve(g, column({1, 0}), 0.5, 0.1, Problem2Options{.iters = 0}), DomainError);
}

TEST(Prop2, ConstantListsAreUndefined) {
  // Star-free ring where every node has identical features: all attention
  // lifts are 1 and all corrections equal.
  std::vector<Edge> e;
  for (Index i = 0; i < 12; ++i) e.push_back({i, (i + 1) % 12, 1.0});
  const Graph g = build_graph(12, e);
  EXPECT_THROW(prop2_attention_correlation(g, FeatureMatrix::Ones(12, 3), 0.6, 0.1), DegenerateError);
}

TEST(Prop2, TooFewEdges) {
  EXPECT_THROW(prop2_attention_correlation(path2(), FeatureMatrix::Ones(2, 2), 0.6, 0.1), DomainError);
}

TEST(Prop2, ZeroRowsWarnAndAreSkipped) {
  const Graph g = random_graph(30, 8);
  FeatureMatrix x = random_features(30, 4, 6);
  x.row(3).setZero();
  int warnings = 0;
  ScopedWarningSink sink([&](std::string_view) { ++warnings; });
  const double rho = prop2_attention_correlation(g, x, 0.6, 0.1);
  EXPECT_GE(rho, -1.0);
  EXPECT_LE(rho, 1.0);
  EXPECT_EQ(warnings, 1);
}

TEST(Prop2, AlignedFeaturesCorrelateAndPermutedDoNot) {
  double aligned = 0.0, null_sum = 0.0;
  const int seeds = 5;
  for (int s = 0; s < seeds; ++s) {
    SbmSpec spec;
    spec.p_in = 0.1;
    spec.p_out = 0.05;
    spec.feature_dim = 20;
    spec.feature_noise_sigma = 0.002;
    spec.seed = static_cast<std::uint64_t>(s);
    const SbmResult sbm = gen_sbm(spec);
    aligned += prop2_attention_correlation(sbm.dataset.graph, sbm.dataset.features, 0.6, 0.1);
    null_sum += prop2_permutation_null(sbm.dataset.graph, sbm.dataset.features, 0.6, 0.1, 100 + s);
  }
  EXPECT_GT(aligned / seeds, 0.5);
  EXPECT_LT(std::abs(null_sum / seeds), 0.2);
}
