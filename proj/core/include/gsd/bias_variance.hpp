#pragma once

// Monte-Carlo mean-square-error decomposition of the GSDN-F estimator,
// checked against the closed-form variance and squared bias.

#include "gsd/graph.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace gsd {

struct BiasVarReport {
  std::vector<double> alpha_grid;
  /// Monte-Carlo E||y - x_hat||^2 and its standard error.
  std::vector<double> mse;
  std::vector<double> mse_stderr;
  /// Closed forms Tr(H^2 Sigma) and ||(H - I) x_hat||^2; NaN where
  /// closed_available is false (alpha >= 1).
  std::vector<double> variance;
  std::vector<double> bias_sq;
  std::vector<bool> closed_available;
  /// Monte-Carlo estimates: unbiased sample variance (summed over nodes)
  /// and squared norm of the mean error.
  std::vector<double> mc_variance;
  std::vector<double> mc_bias_sq;
  int n_samples = 0;
  int k_order = 0;
  double sigma = 0.0;
  double x_hat_norm_sq = 0.0;
};

struct BiasVarOptions {
  int k_order = 50;
  int n_samples = 10000;
  std::uint64_t seed = 0;
  /// Samples drawn and filtered together per block.
  int block_size = 1024;
};

/// Draws z ~ N(0, sigma^2 I), filters x_hat + z with GSDN-F at every alpha
/// of the grid (the same draws are reused across alphas), and attaches the
/// closed forms for alpha in (0, 1). Grid entries >= 1 are Monte-Carlo only
/// and produce a warning.
BiasVarReport mc_bias_variance(const Graph& g, const FeatureMatrix& x_hat, double sigma,
                               const std::vector<double>& alpha_grid, const BiasVarOptions& options = {});

struct MonotonicityVerdict {
  bool variance_decreasing = false;
  bool bias_increasing = false;
  /// Squared bias vanishes on the whole grid (x_hat is smooth).
  bool degenerate = false;
};

/// Strict monotonicity of the closed-form columns. Requires at least three
/// ascending grid points, all with closed forms.
MonotonicityVerdict prop3_monotonicity_check(const BiasVarReport& report);

/// Default test signal: the unit smooth eigenvector D^{1/2} 1 / ||D^{1/2} 1||
/// plus a unit bump on node 0.
FeatureMatrix smooth_plus_bump(const Graph& g);

/// CSV columns: alpha, mse, var_mc, var_closed, bias_sq_mc, bias_sq_closed.
/// Missing closed forms are left empty.
void write_bias_variance_csv(std::ostream& out, const BiasVarReport& report);

}  // namespace gsd
