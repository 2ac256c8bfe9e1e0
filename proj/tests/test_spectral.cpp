#include "gsd/error.hpp"
#include "gsd/spectral.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace gsd;
using namespace gsd::testing;

TEST(Eigendecompose, PathGraphSpectra) {
  const NormalizedOps ops = normalized_ops(path2());
  const EigenSystem lap = eigendecompose(ops.lap_norm.to_dense());
  EXPECT_NEAR(lap.values(0), 0.0, 1e-15);
  EXPECT_NEAR(lap.values(1), 2.0, 1e-15);
  const EigenSystem an = eigendecompose(ops.a_norm.to_dense());
  EXPECT_NEAR(an.values(0), -1.0, 1e-15);
  EXPECT_NEAR(an.values(1), 1.0, 1e-15);
}

TEST(Eigendecompose, Identity) {
  const EigenSystem e = eigendecompose(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_TRUE(e.values.isApprox(Eigen::Vector3d::Ones()));
}

TEST(Eigendecompose, OrthonormalAndReconstructs) {
  const Graph g = random_graph(80, 21);
  const Eigen::MatrixXd m = normalized_ops(g).lap_norm.to_dense();
  const EigenSystem e = eigendecompose(m);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(80, 80);
  EXPECT_LT((e.vectors.transpose() * e.vectors - id).norm(), 1e-10);
  const Eigen::MatrixXd rebuilt = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
  EXPECT_LT((m - rebuilt).norm() / m.norm(), 1e-10);
  for (Index k = 1; k < 80; ++k) EXPECT_LE(e.values(k - 1), e.values(k));
}

TEST(Eigendecompose, SignConventionLargestEntryPositive) {
  const Graph g = random_graph(30, 22);
  const EigenSystem e = eigendecompose(normalized_ops(g).a_norm.to_dense());
  for (Index k = 0; k < e.size(); ++k) {
    Index arg = 0;
    e.vectors.col(k).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(e.vectors(arg, k), 0.0);
  }
}

TEST(Eigendecompose, Errors) {
  Eigen::Matrix2d asym;
  asym << 0, 1, 0.5, 0;
  EXPECT_THROW(eigendecompose(asym), DomainError);
  EXPECT_THROW(eigendecompose(Eigen::MatrixXd::Identity(10, 10), EigenOptions{.max_nodes = 5}), DomainError);
}

TEST(GraphFourier, EigenvectorMapsToUnitCoordinate) {
  const Graph g = random_graph(20, 23);
  const EigenSystem e = eigendecompose(normalized_ops(g).lap_norm.to_dense());
  const FeatureMatrix c = graph_fourier(e, e.vectors.col(5));
  FeatureMatrix unit = FeatureMatrix::Zero(20, 1);
  unit(5, 0) = 1.0;
  EXPECT_LT((c - unit).norm(), 1e-12);
  EXPECT_EQ(graph_fourier(e, FeatureMatrix::Zero(20, 2)), FeatureMatrix::Zero(20, 2));
}

TEST(GraphFourier, PathGraphCoordinates) {
  const EigenSystem e = eigendecompose(normalized_ops(path2()).lap_norm.to_dense());
  const FeatureMatrix c = graph_fourier(e, column({1, 0}));
  // Both eigenvectors have equal-magnitude entries; the tie resolves to
  // index 0, so both first entries are positive.
  EXPECT_NEAR(c(0, 0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(c(1, 0), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(GraphFourier, RoundTrip) {
  const Graph g = random_graph(40, 24);
  const EigenSystem e = eigendecompose(normalized_ops(g).lap_norm.to_dense());
  const FeatureMatrix x = random_features(40, 3, 5);
  EXPECT_LT((inverse_graph_fourier(e, graph_fourier(e, x)) - x).norm(), 1e-10 * x.norm());
  EXPECT_THROW(graph_fourier(e, FeatureMatrix::Zero(3, 1)), DimensionError);
}

TEST(ClosedFormDenoise, PathGraphHandValue) {
  const FeatureMatrix y = closed_form_denoise(normalized_ops(path2()), column({1, 0}), 0.5);
  EXPECT_NEAR(y(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(y(1, 0), 1.0 / 3.0, 1e-15);
}

TEST(ClosedFormDenoise, SmoothEigenvectorIsFixed) {
  const Graph g = random_graph(30, 25);
  FeatureMatrix v(30, 1);
  for (Index i = 0; i < 30; ++i) v(i, 0) = std::sqrt(g.degrees()[static_cast<std::size_t>(i)]);
  for (double alpha : {0.1, 0.5, 0.9, 0.99}) {
    EXPECT_LT((closed_form_denoise(normalized_ops(g), v, alpha) - v).norm(), 1e-10 * v.norm());
  }
}

TEST(ClosedFormDenoise, SmallAlphaApproachesIdentity) {
  const Graph g = random_graph(30, 26);
  const FeatureMatrix x = random_features(30, 2, 1);
  EXPECT_LT((closed_form_denoise(normalized_ops(g), x, 1e-9) - x).norm(), 1e-7 * x.norm());
}

TEST(ClosedFormDenoise, MinimizesTheLagrangian) {
  // With gamma = 1/alpha - 1 the objective is Tr(X^T L X) + gamma ||X - X0||^2,
  // whose gradient vanishes at the minimizer.
  const Graph g = random_graph(30, 27);
  const NormalizedOps ops = normalized_ops(g);
  const FeatureMatrix x0 = random_features(30, 2, 2);
  const double alpha = 0.7;
  const double gamma = 1.0 / alpha - 1.0;
  const FeatureMatrix x = closed_form_denoise(ops, x0, alpha);
  const FeatureMatrix grad = 2.0 * spmm(ops.lap_norm, x) + 2.0 * gamma * (x - x0);
  EXPECT_LT(grad.norm(), 1e-12);
}

TEST(ClosedFormDenoise, RejectsAlphaOutsideOpenInterval) {
  const NormalizedOps ops = normalized_ops(path2());
  for (double alpha : {0.0, 1.0, -0.5, 1.5}) {
    EXPECT_THROW(closed_form_denoise(ops, column({1, 0}), alpha), DomainError);
  }
}

TEST(ResolventSmooth, SingularSystemIsReported) {
  // I - 1 * A_n is singular along the smooth eigenvector.
  EXPECT_THROW(resolvent_smooth(normalized_ops(path2()).a_norm.to_dense(), column({1, 0}), 1.0), SolverError);
}

TEST(ClosedFormVarBias, PathGraphVariance) {
  const EigenSystem e = eigendecompose(normalized_ops(path2()).a_norm.to_dense());
  const double sigma2 = 0.01;
  const std::vector<double> var{sigma2, sigma2};
  const VarianceBias vb = closed_form_var_bias(e, 0.5, column({1, 1}), var);
  EXPECT_NEAR(vb.variance, 10.0 / 9.0 * sigma2, 1e-16);
  EXPECT_NEAR(vb.bias_sq, 0.0, 1e-30);
  const VarianceBias full = closed_form_var_bias(e, 0.5, column({1, 1}), Eigen::MatrixXd(sigma2 * Eigen::Matrix2d::Identity()));
  EXPECT_NEAR(full.variance, vb.variance, 1e-16);
}

TEST(ClosedFormVarBias, NegativeEigenvectorBias) {
  const EigenSystem e = eigendecompose(normalized_ops(path2()).a_norm.to_dense());
  const FeatureMatrix x = column({1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)});
  const VarianceBias vb = closed_form_var_bias(e, 0.5, x, std::vector<double>{1.0, 1.0});
  EXPECT_NEAR(vb.bias_sq, 4.0 / 9.0, 1e-15);
}

TEST(ClosedFormVarBias, MatchesDenseFilterMatrix) {
  const Graph g = random_graph(25, 28);
  const Eigen::MatrixXd an = normalized_ops(g).a_norm.to_dense();
  const EigenSystem e = eigendecompose(an);
  const double alpha = 0.6;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(25, 25);
  const Eigen::MatrixXd h = (1.0 - alpha) * (id - alpha * an).inverse();
  const FeatureMatrix x = random_features(25, 1, 3);
  std::vector<double> var(25);
  for (std::size_t i = 0; i < var.size(); ++i) var[i] = 0.01 * static_cast<double>(i + 1);
  const Eigen::VectorXd sv = Eigen::Map<const Eigen::VectorXd>(var.data(), 25);
  const VarianceBias vb = closed_form_var_bias(e, alpha, x, var);
  EXPECT_NEAR(vb.variance, (h * h * sv.asDiagonal()).trace(), 1e-12);
  EXPECT_NEAR(vb.bias_sq, ((h - id) * x).squaredNorm(), 1e-12);
  EXPECT_THROW(closed_form_var_bias(e, 1.0, x, var), DomainError);
}

TEST(ClosedFormVarBias, Proposition3Monotonicity) {
  const Graph g = random_graph(40, 29);
  const EigenSystem e = eigendecompose(normalized_ops(g).a_norm.to_dense());
  const FeatureMatrix x = random_features(40, 1, 4);
  const std::vector<double> var(40, 0.01);
  double prev_var = 1e300, prev_bias = -1.0;
  for (int k = 1; k <= 9; ++k) {
    const VarianceBias vb = closed_form_var_bias(e, 0.1 * k, x, var);
    EXPECT_LT(vb.variance, prev_var);
    EXPECT_GT(vb.bias_sq, prev_bias);
    prev_var = vb.variance;
    prev_bias = vb.bias_sq;
  }
}

TEST(ResolventResponse, Values) {
  EXPECT_DOUBLE_EQ(resolvent_response(0.5, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(resolvent_response(0.5, -1.0), 1.0 / 3.0);
}
