#pragma once

// Polynomial graph-convolution kernels: ChebyNet, GCN, SGC, the
// denoising kernels GSDN-F / GSDN-EF and the un-renormalized I + A_n.

#include "gsd/graph.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gsd {

/// Chebyshev expansion sum_k theta_k T_k(L~_n) with L~_n = (2/lambda_max) L_n - I.
struct ChebyCoeffs {
  std::vector<double> theta{1.0};
  double lambda_max = 2.0;

  int order() const noexcept { return static_cast<int>(theta.size()) - 1; }
};

struct DenoiseConfig {
  /// Smoothing/denoising balance. Values in (1, 2) are accepted without
  /// comment; >= 2 emits a warning since the series diverges in K.
  double alpha = 0.6;
  int k_order = 4;
  /// Edge-denoising strength of the feature-similarity correction.
  double beta = 0.0;
  /// Restrict the correction to existing (off-diagonal) edges.
  bool sparse_edge_mask = false;
  /// Zero the diagonal of X X^T / ||X||^2 before adding it.
  bool zero_correction_diagonal = true;
};

FeatureMatrix cheby_apply(const NormalizedOps& ops, const ChebyCoeffs& coeffs, const FeatureMatrix& x);

/// Largest eigenvalue of L_n by power iteration (L_n is PSD).
double largest_laplacian_eigenvalue(const NormalizedOps& ops, int max_iterations = 5000, double tolerance = 1e-12);

/// Chebyshev coefficients whose expansion equals the GSDN-F polynomial
/// (1 - alpha) sum_{k<=K} (alpha A_n)^k. The A_n power series is rewritten
/// in L~_n = (2/lambda_max)(I - A_n) - I and converted to the Chebyshev
/// basis.
ChebyCoeffs gsdnf_as_chebyshev(double alpha, int k_order, double lambda_max = 2.0);

/// GCN propagation A~_n x.
FeatureMatrix gcn_apply(const NormalizedOps& ops, const FeatureMatrix& x);

/// SGC propagation A~_n^k x, k >= 1, by repeated sparse products.
FeatureMatrix sgc_apply(const NormalizedOps& ops, int k, const FeatureMatrix& x);

/// (1 - alpha) sum_{k=0}^{K} (alpha A_n)^k x, evaluated by Horner's rule.
FeatureMatrix gsdnf_apply(const NormalizedOps& ops, const DenoiseConfig& cfg, const FeatureMatrix& x);

/// Same series over an arbitrary propagation operator.
FeatureMatrix truncated_neumann(const SparseMatrix& propagation, double alpha, int k_order, const FeatureMatrix& x);

/// Edge-denoised graph for GSDN-EF: A^ = A_n + beta X X^T / ||X||_F^2 with
/// negative entries clamped to zero. `graph` stores A^ as edge weights
/// (self-loops allowed) and `ops` its normalization, so ops.a_norm is
/// D^^{-1/2} A^ D^^{-1/2}.
struct DenoisedAdjacency {
  Graph graph;
  NormalizedOps ops;
};

/// Dense correction (mask off) is limited to this many nodes.
inline constexpr Index kDenseEdgeDenoiseCap = 5000;

DenoisedAdjacency gsdnef_denoise_adjacency(const Graph& g, const NormalizedOps& ops, const FeatureMatrix& x,
                                           const DenoiseConfig& cfg);

/// GSDN-F series over the denoised operator A^_n.
FeatureMatrix gsdnef_apply(const NormalizedOps& denoised, const DenoiseConfig& cfg, const FeatureMatrix& x);

/// (I + A_n) x, the first-order kernel without self-loop renormalization.
FeatureMatrix no_renorm_apply(const NormalizedOps& ops, const FeatureMatrix& x);

enum class KernelKind { identity, cheby, gcn, sgc, gsdn_f, gsdn_ef, gsdn_ef_sparse, i_plus_an };

/// Names: "identity" | "cheby" | "gcn" | "sgc" | "gsdn-f" | "gsdn-ef" |
/// "gsdn-ef-sparse" | "i-plus-an". Throws DomainError on anything else.
KernelKind parse_kernel(std::string_view name);
std::string_view kernel_name(KernelKind kind);

/// A kernel choice with its parameters. `cfg.k_order` is the SGC power and
/// the GSDN order; `cheby` is used only by KernelKind::cheby.
struct KernelSpec {
  KernelKind kind = KernelKind::gsdn_f;
  DenoiseConfig cfg;
  ChebyCoeffs cheby;
};

/// A kernel bound to a graph. For GSDN-EF the edge-denoised operator is
/// computed once, from the features given to `prepare`, and reused for
/// every later `apply`.
class Propagator {
 public:
  static Propagator prepare(const KernelSpec& spec, const Graph& g, const NormalizedOps& ops,
                            const FeatureMatrix& edge_features);

  FeatureMatrix apply(const FeatureMatrix& x) const;

  const KernelSpec& spec() const noexcept { return spec_; }
  Index num_nodes() const noexcept { return ops_.num_nodes(); }

 private:
  Propagator(KernelSpec spec, NormalizedOps ops) : spec_(std::move(spec)), ops_(std::move(ops)) {}

  KernelSpec spec_;
  NormalizedOps ops_;  // the denoised operators for GSDN-EF
};

}  // namespace gsd
