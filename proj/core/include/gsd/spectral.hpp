#pragma once

// Dense eigendecomposition and closed-form solvers. These are O(N^3) and
// serve as ground truth for the polynomial kernels on small graphs.

#include "gsd/graph.hpp"

#include <Eigen/Core>

#include <span>

namespace gsd {

/// Orthonormal eigenvectors (columns) with ascending eigenvalues.
/// Each eigenvector's largest-magnitude entry is positive; ties resolve to
/// the lowest index.
struct EigenSystem {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;

  Index size() const noexcept { return values.size(); }
};

struct EigenOptions {
  Index max_nodes = 2000;
  double symmetry_tolerance = 1e-10;
};

EigenSystem eigendecompose(const Eigen::MatrixXd& op, const EigenOptions& options = {});

/// Graph Fourier transform U^T x and its inverse U c.
FeatureMatrix graph_fourier(const EigenSystem& eig, const FeatureMatrix& x);
FeatureMatrix inverse_graph_fourier(const EigenSystem& eig, const FeatureMatrix& coefficients);

/// (1 - alpha) (I - alpha M)^{-1} X for a dense symmetric M. Shared by the
/// Problem 1 closed form and the Problem 2 alternating solver so both go
/// through the same factorization. Throws SolverError if I - alpha M is
/// numerically singular.
FeatureMatrix resolvent_smooth(const Eigen::MatrixXd& propagation, const FeatureMatrix& x, double alpha);

/// Exact minimizer of Tr(X^T L_n X) + gamma ||X - X0||^2 with
/// alpha = 1 / (1 + gamma): (1 - alpha) (I - alpha A_n)^{-1} X0.
/// Requires 0 < alpha < 1.
FeatureMatrix closed_form_denoise(const NormalizedOps& ops, const FeatureMatrix& x, double alpha,
                                  Index max_nodes = 2000);

struct VarianceBias {
  double variance = 0.0;
  double bias_sq = 0.0;
};

/// Spectral response of the infinite-order filter,
/// h(omega) = (1 - alpha) / (1 - alpha omega).
double resolvent_response(double alpha, double omega);

/// Variance Tr(H^2 Sigma) and squared bias ||(H - I) x_hat||^2 of the
/// estimator H (x_hat + z), z ~ N(0, Sigma), where H has eigenvalues
/// h(omega_i) on the eigenbasis of A_n. `eig_an` must decompose A_n.
/// Diagonal Sigma given by per-node variances.
VarianceBias closed_form_var_bias(const EigenSystem& eig_an, double alpha, const FeatureMatrix& x_hat,
                                  std::span<const double> noise_variance);

/// Same with a full covariance matrix.
VarianceBias closed_form_var_bias(const EigenSystem& eig_an, double alpha, const FeatureMatrix& x_hat,
                                  const Eigen::MatrixXd& noise_covariance);

}  // namespace gsd
