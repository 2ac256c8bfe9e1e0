#include "gsd/bias_variance.hpp"

#include "gsd/diagnostics.hpp"
#include "gsd/error.hpp"
#include "gsd/filters.hpp"
#include "gsd/random.hpp"
#include "gsd/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace gsd {

BiasVarReport mc_bias_variance(const Graph& g, const FeatureMatrix& x_hat, double sigma,
                               const std::vector<double>& alpha_grid, const BiasVarOptions& options) {
  if (x_hat.cols() != 1) throw DimensionError("mc_bias_variance: x_hat must be a single column");
  if (x_hat.rows() != g.num_nodes()) throw DimensionError("mc_bias_variance: x_hat rows do not match node count");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("mc_bias_variance: sigma must be > 0");
  if (options.n_samples < 100) throw DomainError("mc_bias_variance: n_samples must be >= 100");
  if (alpha_grid.empty()) throw DomainError("mc_bias_variance: empty alpha grid");
  if (options.block_size < 1) throw DomainError("mc_bias_variance: block_size must be >= 1");

  const NormalizedOps ops = normalized_ops(g);
  const Index n = g.num_nodes();
  const std::size_t m = alpha_grid.size();

  BiasVarReport r;
  r.alpha_grid = alpha_grid;
  r.n_samples = options.n_samples;
  r.k_order = options.k_order;
  r.sigma = sigma;
  r.x_hat_norm_sq = x_hat.squaredNorm();
  r.closed_available.assign(m, false);
  r.variance.assign(m, std::numeric_limits<double>::quiet_NaN());
  r.bias_sq.assign(m, std::numeric_limits<double>::quiet_NaN());

  std::vector<DenoiseConfig> cfgs(m);
  bool any_closed = false;
  for (std::size_t a = 0; a < m; ++a) {
    const double alpha = alpha_grid[a];
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      throw DomainError("mc_bias_variance: alpha must be finite and > 0, got " + std::to_string(alpha));
    }
    cfgs[a].alpha = alpha;
    cfgs[a].k_order = options.k_order;
    if (alpha < 1.0) {
      r.closed_available[a] = true;
      any_closed = true;
    } else {
      warn("mc_bias_variance: alpha = " + std::to_string(alpha) + " >= 1 has no closed form; Monte-Carlo only");
    }
  }

  if (any_closed) {
    const EigenSystem eig = eigendecompose(ops.a_norm.to_dense());
    const std::vector<double> noise_var(static_cast<std::size_t>(n), sigma * sigma);
    for (std::size_t a = 0; a < m; ++a) {
      if (!r.closed_available[a]) continue;
      const VarianceBias vb = closed_form_var_bias(eig, alpha_grid[a], x_hat, noise_var);
      r.variance[a] = vb.variance;
      r.bias_sq[a] = vb.bias_sq;
    }
  }

  // Per alpha: sum of errors d = y - x_hat, sum ||d||^2, sum ||d||^4.
  std::vector<Eigen::VectorXd> sum_d(m, Eigen::VectorXd::Zero(n));
  std::vector<double> sum_sq(m, 0.0);
  std::vector<double> sum_sq2(m, 0.0);

  int drawn = 0;
  for (int block = 0; drawn < options.n_samples; ++block) {
    const int cols = std::min(options.block_size, options.n_samples - drawn);
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(block)));
    std::normal_distribution<double> normal(0.0, sigma);
    FeatureMatrix x(n, cols);
    for (int s = 0; s < cols; ++s) {
      for (Index i = 0; i < n; ++i) x(i, s) = x_hat(i, 0) + normal(rng);
    }
    for (std::size_t a = 0; a < m; ++a) {
      FeatureMatrix d = gsdnf_apply(ops, cfgs[a], x);
      d.colwise() -= x_hat.col(0);
      sum_d[a] += d.rowwise().sum();
      for (int s = 0; s < cols; ++s) {
        const double e = d.col(s).squaredNorm();
        sum_sq[a] += e;
        sum_sq2[a] += e * e;
      }
    }
    drawn += cols;
  }

  const double s = options.n_samples;
  for (std::size_t a = 0; a < m; ++a) {
    const Eigen::VectorXd mean_d = sum_d[a] / s;
    const double mse = sum_sq[a] / s;
    const double var_e = std::max(0.0, sum_sq2[a] / s - mse * mse) * s / (s - 1.0);
    r.mse.push_back(mse);
    r.mse_stderr.push_back(std::sqrt(var_e / s));
    r.mc_bias_sq.push_back(mean_d.squaredNorm());
    r.mc_variance.push_back(std::max(0.0, (sum_sq[a] - s * mean_d.squaredNorm()) / (s - 1.0)));
  }
  return r;
}

MonotonicityVerdict prop3_monotonicity_check(const BiasVarReport& report) {
  const auto& grid = report.alpha_grid;
  if (grid.size() < 3) throw DomainError("prop3_monotonicity_check: need at least 3 grid points");
  for (std::size_t a = 0; a < grid.size(); ++a) {
    if (a + 1 < grid.size() && !(grid[a] < grid[a + 1])) {
      throw DomainError("prop3_monotonicity_check: alpha grid must be strictly ascending");
    }
    if (a >= report.closed_available.size() || !report.closed_available[a]) {
      throw DomainError("prop3_monotonicity_check: closed form missing at alpha = " + std::to_string(grid[a]));
    }
  }
  MonotonicityVerdict v;
  v.variance_decreasing = true;
  v.bias_increasing = true;
  for (std::size_t a = 0; a + 1 < grid.size(); ++a) {
    v.variance_decreasing = v.variance_decreasing && report.variance[a + 1] < report.variance[a];
    v.bias_increasing = v.bias_increasing && report.bias_sq[a + 1] > report.bias_sq[a];
  }
  const double floor = 1e-24 * std::max(1.0, report.x_hat_norm_sq);
  v.degenerate = std::all_of(report.bias_sq.begin(), report.bias_sq.end(), [&](double b) { return b <= floor; });
  if (v.degenerate) v.bias_increasing = false;
  return v;
}

FeatureMatrix smooth_plus_bump(const Graph& g) {
  const Index n = g.num_nodes();
  if (n == 0) throw DomainError("smooth_plus_bump: empty graph");
  FeatureMatrix x(n, 1);
  for (Index i = 0; i < n; ++i) x(i, 0) = std::sqrt(g.degrees()[static_cast<std::size_t>(i)]);
  const double norm = x.norm();
  if (norm == 0.0) throw IsolatedNodeError(0, "smooth_plus_bump");
  x /= norm;
  x(0, 0) += 1.0;
  return x;
}

void write_bias_variance_csv(std::ostream& out, const BiasVarReport& report) {
  const auto old = out.precision(17);
  out << "alpha,mse,var_mc,var_closed,bias_sq_mc,bias_sq_closed\n";
  for (std::size_t a = 0; a < report.alpha_grid.size(); ++a) {
    out << report.alpha_grid[a] << ',' << report.mse[a] << ',' << report.mc_variance[a] << ',';
    if (report.closed_available[a]) out << report.variance[a];
    out << ',' << report.mc_bias_sq[a] << ',';
    if (report.closed_available[a]) out << report.bias_sq[a];
    out << '\n';
  }
  out.precision(old);
}

}  // namespace gsd
