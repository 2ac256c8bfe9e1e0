#include "gsd/spectral.hpp"

#include "gsd/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace gsd {

EigenSystem eigendecompose(const Eigen::MatrixXd& op, const EigenOptions& options) {
  if (op.rows() != op.cols()) throw DimensionError("eigendecompose: matrix is not square");
  if (op.rows() > options.max_nodes) {
    throw DomainError("eigendecompose: " + std::to_string(op.rows()) + " nodes exceeds the dense cap of " +
                      std::to_string(options.max_nodes));
  }
  const double asym = (op - op.transpose()).cwiseAbs().maxCoeff();
  if (op.size() > 0 && asym > options.symmetry_tolerance) {
    throw DomainError("eigendecompose: matrix is not symmetric (max |M - M^T| = " + std::to_string(asym) + ")");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op);
  if (solver.info() != Eigen::Success) throw SolverError("eigendecompose: eigensolver did not converge");

  EigenSystem eig{solver.eigenvectors(), solver.eigenvalues()};
  for (Index k = 0; k < eig.vectors.cols(); ++k) {
    auto v = eig.vectors.col(k);
    const double peak = v.cwiseAbs().maxCoeff();
    for (Index i = 0; i < v.size(); ++i) {
      if (std::abs(v(i)) >= peak - 1e-12) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
  }
  return eig;
}

FeatureMatrix graph_fourier(const EigenSystem& eig, const FeatureMatrix& x) {
  if (x.rows() != eig.size()) throw DimensionError("graph_fourier: signal length does not match eigenbasis");
  return eig.vectors.transpose() * x;
}

FeatureMatrix inverse_graph_fourier(const EigenSystem& eig, const FeatureMatrix& coefficients) {
  if (coefficients.rows() != eig.size()) {
    throw DimensionError("inverse_graph_fourier: coefficient length does not match eigenbasis");
  }
  return eig.vectors * coefficients;
}

FeatureMatrix resolvent_smooth(const Eigen::MatrixXd& propagation, const FeatureMatrix& x, double alpha) {
  if (propagation.rows() != propagation.cols() || propagation.rows() != x.rows()) {
    throw DimensionError("resolvent_smooth: operator and signal shapes disagree");
  }
  const Index n = propagation.rows();
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - alpha * propagation;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  if (n > 0 && !(lu.rcond() > 1e-13)) {
    throw SolverError("resolvent_smooth: I - alpha*M is singular to working precision (rcond " +
                      std::to_string(lu.rcond()) + ")");
  }
  return (1.0 - alpha) * lu.solve(x);
}

FeatureMatrix closed_form_denoise(const NormalizedOps& ops, const FeatureMatrix& x, double alpha, Index max_nodes) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("closed_form_denoise: alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  if (x.rows() != ops.num_nodes()) throw DimensionError("closed_form_denoise: signal/graph size mismatch");
  if (ops.num_nodes() > max_nodes) {
    throw DomainError("closed_form_denoise: " + std::to_string(ops.num_nodes()) + " nodes exceeds the dense cap");
  }
  return resolvent_smooth(ops.a_norm.to_dense(), x, alpha);
}

double resolvent_response(double alpha, double omega) { return (1.0 - alpha) / (1.0 - alpha * omega); }

namespace {

Eigen::VectorXd responses(const EigenSystem& eig_an, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("closed_form_var_bias: alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  Eigen::VectorXd h(eig_an.size());
  for (Index i = 0; i < h.size(); ++i) h(i) = resolvent_response(alpha, eig_an.values(i));
  return h;
}

double bias_sq(const EigenSystem& eig_an, const Eigen::VectorXd& h, const FeatureMatrix& x_hat) {
  if (x_hat.rows() != eig_an.size()) throw DimensionError("closed_form_var_bias: signal/eigenbasis mismatch");
  if (x_hat.cols() != 1) throw DimensionError("closed_form_var_bias: x_hat must be a single column");
  const Eigen::VectorXd coords = eig_an.vectors.transpose() * x_hat.col(0);
  return (h.array() - 1.0).square().matrix().dot(coords.array().square().matrix());
}

}  // namespace

VarianceBias closed_form_var_bias(const EigenSystem& eig_an, double alpha, const FeatureMatrix& x_hat,
                                  std::span<const double> noise_variance) {
  if (static_cast<Index>(noise_variance.size()) != eig_an.size()) {
    throw DimensionError("closed_form_var_bias: noise variance length mismatch");
  }
  const Eigen::VectorXd h = responses(eig_an, alpha);
  const Eigen::VectorXd h2 = h.array().square();
  // Tr(H^2 Sigma) = sum_k sigma_k^2 sum_i Q_ki^2 h_i^2
  const Eigen::VectorXd h2_diag = eig_an.vectors.array().square().matrix() * h2;
  double variance = 0.0;
  for (Index k = 0; k < h2_diag.size(); ++k) variance += noise_variance[static_cast<std::size_t>(k)] * h2_diag(k);
  return {variance, bias_sq(eig_an, h, x_hat)};
}

VarianceBias closed_form_var_bias(const EigenSystem& eig_an, double alpha, const FeatureMatrix& x_hat,
                                  const Eigen::MatrixXd& noise_covariance) {
  if (noise_covariance.rows() != eig_an.size() || noise_covariance.cols() != eig_an.size()) {
    throw DimensionError("closed_form_var_bias: covariance shape mismatch");
  }
  const Eigen::VectorXd h = responses(eig_an, alpha);
  const Eigen::MatrixXd h_sq =
      eig_an.vectors * h.array().square().matrix().asDiagonal() * eig_an.vectors.transpose();
  return {(h_sq * noise_covariance).trace(), bias_sq(eig_an, h, x_hat)};
}

}  // namespace gsd
