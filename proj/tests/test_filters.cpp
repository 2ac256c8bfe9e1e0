#include "gsd/diagnostics.hpp"
#include "gsd/error.hpp"
#include "gsd/filters.hpp"
#include "gsd/spectral.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>

using namespace gsd;
using namespace gsd::testing;

namespace {

// Chebyshev coefficients of a degree-K polynomial by interpolation at the
// K+1 Chebyshev nodes (exact for polynomials of that degree).
std::vector<double> cheb_interpolate(int k, const std::function<double(double)>& f) {
  const int m = k + 1;
  std::vector<double> c(static_cast<std::size_t>(m), 0.0);
  for (int j = 0; j < m; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      const double theta = std::numbers::pi * (i + 0.5) / m;
      s += f(std::cos(theta)) * std::cos(j * theta);
    }
    c[static_cast<std::size_t>(j)] = (j == 0 ? 1.0 : 2.0) * s / m;
  }
  return c;
}

DenoiseConfig cfg_of(double alpha, int k) {
  DenoiseConfig c;
  c.alpha = alpha;
  c.k_order = k;
  return c;
}

}  // namespace

TEST(Cheby, HandValues) {
  const NormalizedOps ops = normalized_ops(path2());
  const FeatureMatrix x = column({1, 0});
  EXPECT_EQ(cheby_apply(ops, ChebyCoeffs{{1.0}, 2.0}, x), x);
  EXPECT_LT((cheby_apply(ops, ChebyCoeffs{{0.0, 1.0}, 2.0}, x) - column({0, -1})).norm(), 1e-15);
  EXPECT_EQ(cheby_apply(ops, ChebyCoeffs{{1.0, 0.0, 0.0, 0.0}, 2.0}, x), x);
}

TEST(Cheby, RecurrenceMatchesDenseChebyshevPolynomials) {
  const Graph g = random_graph(30, 31);
  const NormalizedOps ops = normalized_ops(g);
  const double lmax = 1.7;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(30, 30);
  const Eigen::MatrixXd lt = (2.0 / lmax) * ops.lap_norm.to_dense() - id;
  const std::vector<double> theta{0.3, -1.2, 0.7, 0.25, -0.4};
  Eigen::MatrixXd t0 = id, t1 = lt, sum = theta[0] * t0 + theta[1] * t1;
  for (std::size_t k = 2; k < theta.size(); ++k) {
    Eigen::MatrixXd t2 = 2.0 * lt * t1 - t0;
    sum += theta[k] * t2;
    t0 = t1;
    t1 = t2;
  }
  const FeatureMatrix x = random_features(30, 3, 1);
  EXPECT_LT(rel_diff(cheby_apply(ops, ChebyCoeffs{theta, lmax}, x), sum * x), 1e-13);
}

TEST(Gcn, HandValues) {
  const NormalizedOps ops = normalized_ops(path2());
  EXPECT_LT((gcn_apply(ops, column({1, 0})) - column({0.5, 0.5})).norm(), 1e-15);
  EXPECT_EQ(gcn_apply(ops, FeatureMatrix::Zero(2, 3)), FeatureMatrix::Zero(2, 3));
  // Regular graph: A~_n rows sum to one, so constants are preserved.
  const NormalizedOps tri = normalized_ops(triangle());
  EXPECT_LT((gcn_apply(tri, FeatureMatrix::Constant(3, 1, 2.5)) - FeatureMatrix::Constant(3, 1, 2.5)).norm(), 1e-14);
}

TEST(Sgc, ProjectorOnPathGraph) {
  const NormalizedOps ops = normalized_ops(path2());
  EXPECT_EQ(sgc_apply(ops, 1, column({1, 0})), gcn_apply(ops, column({1, 0})));
  EXPECT_LT((sgc_apply(ops, 2, column({1, 0})) - column({0.5, 0.5})).norm(), 1e-15);
  EXPECT_LT((sgc_apply(ops, 4, column({1, 0})) - column({0.5, 0.5})).norm(), 1e-15);
  EXPECT_THROW(sgc_apply(ops, 0, column({1, 0})), DomainError);
}

TEST(Sgc, EqualsRepeatedGcnExactly) {
  const Graph g = random_graph(40, 32);
  const NormalizedOps ops = normalized_ops(g);
  const FeatureMatrix x = random_features(40, 3, 2);
  FeatureMatrix y = x;
  for (int k = 1; k <= 5; ++k) {
    y = gcn_apply(ops, y);
    EXPECT_TRUE((sgc_apply(ops, k, x).array() == y.array()).all());
  }
}

TEST(Gsdnf, HandValues) {
  const NormalizedOps ops = normalized_ops(path2());
  const FeatureMatrix x = column({1, 0});
  EXPECT_LT((gsdnf_apply(ops, cfg_of(0.3, 0), x) - 0.7 * x).norm(), 1e-16);
  EXPECT_LT((gsdnf_apply(ops, cfg_of(0.5, 1), x) - column({0.5, 0.25})).norm(), 1e-16);
  EXPECT_LT((gsdnf_apply(ops, cfg_of(0.5, 50), x) - column({2.0 / 3.0, 1.0 / 3.0})).norm(), 1e-12);
}

TEST(Gsdnf, MatchesExplicitPowerSeries) {
  const Graph g = random_graph(30, 33);
  const NormalizedOps ops = normalized_ops(g);
  const Eigen::MatrixXd an = ops.a_norm.to_dense();
  const FeatureMatrix x = random_features(30, 2, 3);
  for (double alpha : {0.4, 1.2}) {
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(30, 30), sum = power;
    for (int k = 1; k <= 6; ++k) {
      power = alpha * an * power;
      sum += power;
    }
    EXPECT_LT(rel_diff(gsdnf_apply(ops, cfg_of(alpha, 6), x), (1.0 - alpha) * sum * x), 1e-13);
  }
}

TEST(Gsdnf, GeometricConvergenceToClosedForm) {
  for (std::uint64_t seed = 40; seed < 45; ++seed) {
    const Graph g = random_graph(60, seed);
    const NormalizedOps ops = normalized_ops(g);
    const FeatureMatrix x = random_features(60, 2, seed);
    for (double alpha : {0.3, 0.6}) {
      const FeatureMatrix exact = closed_form_denoise(ops, x, alpha);
      double prev = 1e300;
      for (int k = 0; k <= 50; ++k) {
        const double err = (gsdnf_apply(ops, cfg_of(alpha, k), x) - exact).norm();
        // Monotone down to the rounding floor of the dense solve.
        EXPECT_LE(err, prev + 1e-14 * x.norm());
        // ||sum_{k>K} (1-a) a^k A_n^k x|| <= a^{K+1} ||x||.
        EXPECT_LE(err, std::pow(alpha, k + 1) * x.norm() * (1.0 + 1e-9) + 1e-14);
        prev = err;
      }
      EXPECT_LT(prev / exact.norm(), 1e-8);
    }
  }
}

TEST(Gsdnf, AlphaDomain) {
  const NormalizedOps ops = normalized_ops(path2());
  EXPECT_THROW(gsdnf_apply(ops, cfg_of(0.0, 3), column({1, 0})), DomainError);
  EXPECT_THROW(gsdnf_apply(ops, cfg_of(-1.0, 3), column({1, 0})), DomainError);
  EXPECT_THROW(gsdnf_apply(ops, cfg_of(std::nan(""), 3), column({1, 0})), DomainError);

  std::vector<std::string> seen;
  ScopedWarningSink sink([&](std::string_view m) { seen.emplace_back(m); });
  gsdnf_apply(ops, cfg_of(1.2, 3), column({1, 0}));
  EXPECT_TRUE(seen.empty());
  gsdnf_apply(ops, cfg_of(2.0, 3), column({1, 0}));
  EXPECT_EQ(seen.size(), 1u);
}

TEST(Gsdnf, NegativeScaleAboveOne) {
  const NormalizedOps ops = normalized_ops(path2());
  EXPECT_LT((gsdnf_apply(ops, cfg_of(1.5, 0), column({1, 0})) - column({-0.5, 0})).norm(), 1e-16);
}

TEST(ChebyshevSpan, ReparametrizationMatchesInterpolationOracle) {
  for (double lmax : {2.0, 1.6}) {
    for (int k : {0, 1, 4, 9}) {
      const double alpha = 0.6;
      const double c0 = 1.0 - lmax / 2.0, c1 = -lmax / 2.0;
      auto p = [&](double t) {
        double s = 0.0, term = 1.0;
        for (int j = 0; j <= k; ++j) {
          s += term;
          term *= alpha * (c0 + c1 * t);
        }
        return (1.0 - alpha) * s;
      };
      const auto oracle = cheb_interpolate(k, p);
      const ChebyCoeffs got = gsdnf_as_chebyshev(alpha, k, lmax);
      ASSERT_EQ(got.theta.size(), oracle.size());
      for (std::size_t j = 0; j < oracle.size(); ++j) EXPECT_NEAR(got.theta[j], oracle[j], 1e-12);
    }
  }
}

TEST(ChebyshevSpan, ChebyNetReproducesGsdnf) {
  for (std::uint64_t seed = 50; seed < 55; ++seed) {
    const Graph g = random_graph(80, seed, 0.15, 0.03);
    const NormalizedOps ops = normalized_ops(g);
    const FeatureMatrix x = random_features(80, 3, seed);
    const double lmax = largest_laplacian_eigenvalue(ops);
    for (double l : {2.0, lmax}) {
      const FeatureMatrix want = gsdnf_apply(ops, cfg_of(0.6, 4), x);
      const FeatureMatrix got = cheby_apply(ops, gsdnf_as_chebyshev(0.6, 4, l), x);
      EXPECT_LT(rel_diff(got, want), 1e-10);
    }
  }
}

TEST(LargestEigenvalue, MatchesDenseSolver) {
  const Graph g = random_graph(50, 56);
  const NormalizedOps ops = normalized_ops(g);
  const EigenSystem e = eigendecompose(ops.lap_norm.to_dense());
  EXPECT_NEAR(largest_laplacian_eigenvalue(ops), e.values.maxCoeff(), 1e-6);
}

TEST(EdgeDenoise, BetaZeroKeepsNormalizedAdjacency) {
  const Graph g = random_graph(30, 60);
  const NormalizedOps ops = normalized_ops(g);
  const FeatureMatrix x = random_features(30, 4, 6);
  DenoiseConfig cfg;
  cfg.beta = 0.0;
  const DenoisedAdjacency d = gsdnef_denoise_adjacency(g, ops, x, cfg);
  EXPECT_LT(rel_diff(dense_adjacency(d.graph), ops.a_norm.to_dense()), 1e-15);
  EXPECT_LT(rel_diff(d.ops.a_norm.to_dense(), dense_a_norm(d.graph)), 1e-14);
}

TEST(EdgeDenoise, PathGraphWithCorrectionDiagonal) {
  const Graph g = path2();
  const NormalizedOps ops = normalized_ops(g);
  DenoiseConfig cfg;
  cfg.beta = 0.5;
  cfg.zero_correction_diagonal = false;
  const DenoisedAdjacency d = gsdnef_denoise_adjacency(g, ops, column({1, 1}), cfg);
  Eigen::Matrix2d want;
  want << 0.25, 1.25, 1.25, 0.25;
  EXPECT_LT((dense_adjacency(d.graph) - want).norm(), 1e-15);
}

TEST(EdgeDenoise, PathGraphDefaultZeroesCorrectionDiagonal) {
  const Graph g = path2();
  DenoiseConfig cfg;
  cfg.beta = 0.5;
  const DenoisedAdjacency d = gsdnef_denoise_adjacency(g, normalized_ops(g), column({1, 1}), cfg);
  Eigen::Matrix2d want;
  want << 0.0, 1.25, 1.25, 0.0;
  EXPECT_LT((dense_adjacency(d.graph) - want).norm(), 1e-15);
}

TEST(EdgeDenoise, DenseMatchesFormulaWithClamp) {
  const Graph g = random_graph(25, 61);
  const NormalizedOps ops = normalized_ops(g);
  const FeatureMatrix x = random_features(25, 3, 7);
  DenoiseConfig cfg;
  cfg.beta = 4.0;
  const DenoisedAdjacency d = gsdnef_denoise_adjacency(g, ops, x, cfg);
  Eigen::MatrixXd corr = x * x.transpose() / x.squaredNorm();
  corr.diagonal().setZero();
  const Eigen::MatrixXd want = (ops.a_norm.to_dense() + 4.0 * corr).cwiseMax(0.0);
  const Eigen::MatrixXd got = dense_adjacency(d.graph);
  EXPECT_LT(rel_diff(got, want), 1e-14);
  EXPECT_LT((got - got.transpose()).norm(), 1e-15);
  EXPECT_LT(rel_diff(d.ops.a_norm.to_dense(), dense_a_norm(d.graph)), 1e-14);
}

TEST(EdgeDenoise, SparseMaskNeverGrowsSupport) {
  for (std::uint64_t seed = 62; seed < 66; ++seed) {
    const Graph g = random_graph(30, seed);
    const NormalizedOps ops = normalized_ops(g);
    const FeatureMatrix x = random_features(30, 3, seed);
    DenoiseConfig cfg;
    cfg.beta = 3.0;
    cfg.sparse_edge_mask = true;
    const DenoisedAdjacency d = gsdnef_denoise_adjacency(g, ops, x, cfg);
    for (const Edge& e : d.graph.edges()) {
      EXPECT_NE(e.i, e.j);
      EXPECT_TRUE(g.has_edge(e.i, e.j));
    }
  }
}

TEST(EdgeDenoise, IsolationAfterClampIsReported) {
  // Anti-aligned features on a single edge drive its weight negative.
  const Graph g = path2();
  DenoiseConfig cfg;
  cfg.beta = 10.0;
  EXPECT_THROW(gsdnef_denoise_adjacency(g, normalized_ops(g), column({1, -1}), cfg), IsolatedNodeError);
  FeatureMatrix bad = column({1, std::numeric_limits<double>::infinity()});
  EXPECT_THROW(gsdnef_denoise_adjacency(g, normalized_ops(g), bad, cfg), DomainError);
}

TEST(Gsdnef, ReducesToOracleWithBetaZero) {
  const Graph g = path2();
  DenoiseConfig cfg = cfg_of(0.5, 50);
  const DenoisedAdjacency d = gsdnef_denoise_adjacency(g, normalized_ops(g), column({1, 0}), cfg);
  EXPECT_LT((gsdnef_apply(d.ops, cfg, column({1, 0})) - column({2.0 / 3.0, 1.0 / 3.0})).norm(), 1e-12);
  EXPECT_LT((gsdnef_apply(d.ops, cfg_of(0.5, 0), column({1, 0})) - column({0.5, 0})).norm(), 1e-16);
}

TEST(NoRenorm, HandValues) {
  const NormalizedOps ops = normalized_ops(path2());
  EXPECT_EQ(no_renorm_apply(ops, column({1, 0})), column({1, 1}));
  EXPECT_EQ(no_renorm_apply(ops, FeatureMatrix::Zero(2, 1)), FeatureMatrix::Zero(2, 1));
  const Graph g = random_graph(20, 67);
  FeatureMatrix v(20, 1);
  for (Index i = 0; i < 20; ++i) v(i, 0) = std::sqrt(g.degrees()[static_cast<std::size_t>(i)]);
  EXPECT_LT((no_renorm_apply(normalized_ops(g), v) - 2.0 * v).norm(), 1e-12);
}

TEST(Kernels, AllLinear) {
  const Graph g = random_graph(30, 70);
  const NormalizedOps ops = normalized_ops(g);
  const FeatureMatrix x = random_features(30, 3, 8);
  const FeatureMatrix y = random_features(30, 3, 9);
  const double a = 1.7, b = -0.4;
  for (const char* name : {"identity", "cheby", "gcn", "sgc", "gsdn-f", "gsdn-ef", "gsdn-ef-sparse", "i-plus-an"}) {
    KernelSpec spec;
    spec.kind = parse_kernel(name);
    spec.cfg.beta = 0.3;
    spec.cheby.theta = {0.5, 0.2, -0.1};
    const Propagator p = Propagator::prepare(spec, g, ops, x);
    const FeatureMatrix lhs = p.apply(a * x + b * y);
    const FeatureMatrix rhs = a * p.apply(x) + b * p.apply(y);
    EXPECT_LT((lhs - rhs).norm(), 1e-10 * std::max(1.0, rhs.norm())) << name;
    EXPECT_EQ(kernel_name(spec.kind), name);
  }
}

TEST(Kernels, UnknownNameIsRejected) { EXPECT_THROW(parse_kernel("gat"), DomainError); }

TEST(Kernels, DimensionMismatch) {
  const NormalizedOps ops = normalized_ops(path2());
  const FeatureMatrix bad = FeatureMatrix::Zero(3, 1);
  EXPECT_THROW(cheby_apply(ops, ChebyCoeffs{}, bad), DimensionError);
  EXPECT_THROW(gcn_apply(ops, bad), DimensionError);
  EXPECT_THROW(sgc_apply(ops, 2, bad), DimensionError);
  EXPECT_THROW(gsdnf_apply(ops, DenoiseConfig{}, bad), DimensionError);
  EXPECT_THROW(no_renorm_apply(ops, bad), DimensionError);
}
