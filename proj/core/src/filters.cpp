#include "gsd/filters.hpp"

#include "gsd/diagnostics.hpp"
#include "gsd/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace gsd {
namespace {

void check_rows(const NormalizedOps& ops, const FeatureMatrix& x, const char* where) {
  if (x.rows() != ops.num_nodes()) {
    throw DimensionError(std::string(where) + ": signal has " + std::to_string(x.rows()) + " rows, graph has " +
                         std::to_string(ops.num_nodes()) + " nodes");
  }
}

void check_alpha(double alpha, const char* where) {
  if (!std::isfinite(alpha) || !(alpha > 0.0)) {
    throw DomainError(std::string(where) + ": alpha must be finite and > 0, got " + std::to_string(alpha));
  }
  if (alpha >= 2.0) {
    warn(std::string(where) + ": alpha = " + std::to_string(alpha) +
         " >= 2; the truncated series grows geometrically with K");
  }
}

// Polynomial coefficients, lowest degree first.
using Poly = std::vector<double>;

}  // namespace

FeatureMatrix cheby_apply(const NormalizedOps& ops, const ChebyCoeffs& coeffs, const FeatureMatrix& x) {
  check_rows(ops, x, "cheby_apply");
  if (coeffs.theta.empty()) throw DomainError("cheby_apply: empty coefficient list");
  if (!(coeffs.lambda_max > 0.0)) throw DomainError("cheby_apply: lambda_max must be > 0");

  const double scale = 2.0 / coeffs.lambda_max;
  // L~_n y = scale * L_n y - y
  auto shifted = [&](const FeatureMatrix& y) -> FeatureMatrix { return scale * spmm(ops.lap_norm, y) - y; };

  FeatureMatrix t_prev = x;
  FeatureMatrix out = coeffs.theta[0] * t_prev;
  if (coeffs.theta.size() == 1) return out;
  FeatureMatrix t_curr = shifted(x);
  out += coeffs.theta[1] * t_curr;
  for (std::size_t k = 2; k < coeffs.theta.size(); ++k) {
    FeatureMatrix t_next = 2.0 * shifted(t_curr) - t_prev;
    out += coeffs.theta[k] * t_next;
    t_prev = std::move(t_curr);
    t_curr = std::move(t_next);
  }
  return out;
}

double largest_laplacian_eigenvalue(const NormalizedOps& ops, int max_iterations, double tolerance) {
  const Index n = ops.num_nodes();
  if (n == 0) return 0.0;
  // Deterministic start vector with no special alignment.
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = 1.0 + 0.5 * std::sin(1.0 + 3.7 * static_cast<double>(i));
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd w = spmm(ops.lap_norm, v);
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (std::abs(next - lambda) <= tolerance * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

ChebyCoeffs gsdnf_as_chebyshev(double alpha, int k_order, double lambda_max) {
  if (k_order < 0) throw DomainError("gsdnf_as_chebyshev: k_order must be >= 0");
  if (!(lambda_max > 0.0)) throw DomainError("gsdnf_as_chebyshev: lambda_max must be > 0");

  // A_n = I - L_n = I - (lambda_max/2)(L~_n + I) = c0 + c1 L~_n.
  const double c0 = 1.0 - lambda_max / 2.0;
  const double c1 = -lambda_max / 2.0;

  // Monomial coefficients in t = L~_n of (1 - alpha) sum_k alpha^k (c0 + c1 t)^k,
  // via Horner: p <- 1 + alpha (c0 + c1 t) p.
  Poly mono{1.0};
  for (int k = 0; k < k_order; ++k) {
    Poly next(mono.size() + 1, 0.0);
    for (std::size_t d = 0; d < mono.size(); ++d) {
      next[d] += alpha * c0 * mono[d];
      next[d + 1] += alpha * c1 * mono[d];
    }
    next[0] += 1.0;
    mono = std::move(next);
  }
  for (double& c : mono) c *= (1.0 - alpha);

  // Monomial -> Chebyshev by Horner in the Chebyshev basis, using
  // t T_0 = T_1 and t T_j = (T_{j+1} + T_{j-1}) / 2.
  Poly cheb{mono.back()};
  for (int d = static_cast<int>(mono.size()) - 2; d >= 0; --d) {
    Poly shifted(cheb.size() + 1, 0.0);
    for (std::size_t j = 0; j < cheb.size(); ++j) {
      if (j == 0) {
        shifted[1] += cheb[0];
      } else {
        shifted[j + 1] += 0.5 * cheb[j];
        shifted[j - 1] += 0.5 * cheb[j];
      }
    }
    shifted[0] += mono[static_cast<std::size_t>(d)];
    cheb = std::move(shifted);
  }
  cheb.resize(mono.size());
  return ChebyCoeffs{std::move(cheb), lambda_max};
}

FeatureMatrix gcn_apply(const NormalizedOps& ops, const FeatureMatrix& x) {
  check_rows(ops, x, "gcn_apply");
  return spmm(ops.a_renorm, x);
}

FeatureMatrix sgc_apply(const NormalizedOps& ops, int k, const FeatureMatrix& x) {
  check_rows(ops, x, "sgc_apply");
  if (k < 1) throw DomainError("sgc_apply: k must be >= 1");
  FeatureMatrix y = spmm(ops.a_renorm, x);
  for (int i = 1; i < k; ++i) y = spmm(ops.a_renorm, y);
  return y;
}

FeatureMatrix truncated_neumann(const SparseMatrix& propagation, double alpha, int k_order, const FeatureMatrix& x) {
  if (propagation.cols() != x.rows()) throw DimensionError("truncated_neumann: operator/signal size mismatch");
  if (k_order < 0) throw DomainError("truncated_neumann: k_order must be >= 0");
  FeatureMatrix y = x;
  for (int k = 0; k < k_order; ++k) y = x + alpha * spmm(propagation, y);
  return (1.0 - alpha) * y;
}

FeatureMatrix gsdnf_apply(const NormalizedOps& ops, const DenoiseConfig& cfg, const FeatureMatrix& x) {
  check_rows(ops, x, "gsdnf_apply");
  check_alpha(cfg.alpha, "gsdnf_apply");
  return truncated_neumann(ops.a_norm, cfg.alpha, cfg.k_order, x);
}

DenoisedAdjacency gsdnef_denoise_adjacency(const Graph& g, const NormalizedOps& ops, const FeatureMatrix& x,
                                           const DenoiseConfig& cfg) {
  check_rows(ops, x, "gsdnef_denoise_adjacency");
  if (!std::isfinite(cfg.beta)) throw DomainError("gsdnef_denoise_adjacency: beta must be finite");
  const double norm_sq = x.squaredNorm();
  if (!std::isfinite(norm_sq)) throw DomainError("gsdnef_denoise_adjacency: ||X|| is not finite");
  const Index n = g.num_nodes();
  // With beta = 0 or an all-zero X the correction vanishes.
  const double scale = (cfg.beta == 0.0 || norm_sq == 0.0) ? 0.0 : cfg.beta / norm_sq;

  std::vector<Edge> weights;
  const auto ptr = ops.a_norm.row_ptr();
  const auto idx = ops.a_norm.col_idx();
  const auto val = ops.a_norm.values();

  if (cfg.sparse_edge_mask || scale == 0.0) {
    // Support of A^ is the support of A (the correction only reweights).
    for (Index i = 0; i < n; ++i) {
      for (Index k = ptr[static_cast<std::size_t>(i)]; k < ptr[static_cast<std::size_t>(i) + 1]; ++k) {
        const Index j = idx[static_cast<std::size_t>(k)];
        if (j < i) continue;
        double w = val[static_cast<std::size_t>(k)];
        if (j != i && scale != 0.0) w += scale * x.row(i).dot(x.row(j));
        if (w > 0.0) weights.push_back({i, j, w});
      }
    }
  } else {
    if (n > kDenseEdgeDenoiseCap) {
      throw DomainError("gsdnef_denoise_adjacency: dense correction limited to " +
                        std::to_string(kDenseEdgeDenoiseCap) + " nodes; use the sparse edge mask");
    }
    const Eigen::MatrixXd gram = x * x.transpose();
    Eigen::MatrixXd a_hat = ops.a_norm.to_dense();
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i <= j; ++i) {
        if (i == j && cfg.zero_correction_diagonal) continue;
        a_hat(i, j) += scale * gram(i, j);
      }
    }
    for (Index i = 0; i < n; ++i) {
      for (Index j = i; j < n; ++j) {
        const double w = a_hat(i, j);
        if (w > 0.0) weights.push_back({i, j, w});
      }
    }
  }

  DenoisedAdjacency out{build_graph(n, weights, GraphBuildOptions{.allow_self_loops = true}), {}};
  try {
    out.ops = normalized_ops(out.graph);
  } catch (const IsolatedNodeError& e) {
    throw IsolatedNodeError(e.node(), "gsdnef_denoise_adjacency (after clamping negative weights)");
  }
  return out;
}

FeatureMatrix gsdnef_apply(const NormalizedOps& denoised, const DenoiseConfig& cfg, const FeatureMatrix& x) {
  check_rows(denoised, x, "gsdnef_apply");
  check_alpha(cfg.alpha, "gsdnef_apply");
  return truncated_neumann(denoised.a_norm, cfg.alpha, cfg.k_order, x);
}

FeatureMatrix no_renorm_apply(const NormalizedOps& ops, const FeatureMatrix& x) {
  check_rows(ops, x, "no_renorm_apply");
  return x + spmm(ops.a_norm, x);
}

namespace {

constexpr std::array<std::pair<KernelKind, std::string_view>, 8> kKernelNames{{
    {KernelKind::identity, "identity"},
    {KernelKind::cheby, "cheby"},
    {KernelKind::gcn, "gcn"},
    {KernelKind::sgc, "sgc"},
    {KernelKind::gsdn_f, "gsdn-f"},
    {KernelKind::gsdn_ef, "gsdn-ef"},
    {KernelKind::gsdn_ef_sparse, "gsdn-ef-sparse"},
    {KernelKind::i_plus_an, "i-plus-an"},
}};

}  // namespace

KernelKind parse_kernel(std::string_view name) {
  for (const auto& [kind, text] : kKernelNames) {
    if (text == name) return kind;
  }
  throw DomainError("unknown kernel '" + std::string(name) +
                    "' (expected identity, cheby, gcn, sgc, gsdn-f, gsdn-ef, gsdn-ef-sparse or i-plus-an)");
}

std::string_view kernel_name(KernelKind kind) {
  for (const auto& [k, text] : kKernelNames) {
    if (k == kind) return text;
  }
  return "unknown";
}

Propagator Propagator::prepare(const KernelSpec& spec, const Graph& g, const NormalizedOps& ops,
                               const FeatureMatrix& edge_features) {
  if (spec.kind == KernelKind::gsdn_ef || spec.kind == KernelKind::gsdn_ef_sparse) {
    DenoiseConfig cfg = spec.cfg;
    cfg.sparse_edge_mask = cfg.sparse_edge_mask || spec.kind == KernelKind::gsdn_ef_sparse;
    return Propagator(spec, gsdnef_denoise_adjacency(g, ops, edge_features, cfg).ops);
  }
  return Propagator(spec, ops);
}

FeatureMatrix Propagator::apply(const FeatureMatrix& x) const {
  switch (spec_.kind) {
    case KernelKind::identity:
      if (x.rows() != ops_.num_nodes()) throw DimensionError("identity kernel: signal/graph size mismatch");
      return x;
    case KernelKind::cheby:
      return cheby_apply(ops_, spec_.cheby, x);
    case KernelKind::gcn:
      return gcn_apply(ops_, x);
    case KernelKind::sgc:
      return sgc_apply(ops_, spec_.cfg.k_order, x);
    case KernelKind::gsdn_f:
      return gsdnf_apply(ops_, spec_.cfg, x);
    case KernelKind::gsdn_ef:
    case KernelKind::gsdn_ef_sparse:
      return gsdnef_apply(ops_, spec_.cfg, x);
    case KernelKind::i_plus_an:
      return no_renorm_apply(ops_, x);
  }
  throw DomainError("Propagator::apply: unhandled kernel");
}

}  // namespace gsd
