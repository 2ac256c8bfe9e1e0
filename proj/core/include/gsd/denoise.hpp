#pragma once

// Noise injection, denoising metrics, the alternating solver for joint
// feature/edge denoising, and the attention diagnostic.

#include "gsd/graph.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace gsd {

enum class RowNorm { l1, l2 };

struct NormalizedFeatures {
  FeatureMatrix features;
  /// Rows that were all zero and passed through unchanged.
  std::vector<Index> zero_rows;
};

/// Row-wise normalization (L1 by default). Throws DomainError on
/// non-finite input.
NormalizedFeatures normalize_features(const FeatureMatrix& x, RowNorm norm = RowNorm::l1);

struct NoiseSpec {
  double mu = 0.0;
  double sigma = 0.0;
  /// Noisy edge operations as a fraction of the original edge count.
  double edge_ratio = 0.0;
  std::uint64_t seed = 0;
};

/// X + Z with Z_ij ~ Normal(mu, sigma^2) i.i.d. sigma = 0 (and mu = 0)
/// returns X unchanged.
FeatureMatrix inject_feature_noise(const FeatureMatrix& x, const NoiseSpec& spec);

struct EdgeNoiseResult {
  Graph graph;
  Index added = 0;
  Index removed = 0;
};

/// Applies floor(edge_ratio * |E|) operations, each a fair coin between
/// removing a uniformly random existing edge and adding a uniformly random
/// absent pair with unit weight. A removal that would isolate a node is
/// resampled. Self-loops are carried over untouched.
EdgeNoiseResult inject_edge_noise(const Graph& g, const NoiseSpec& spec);

struct DenoiseReport {
  /// ||noisy_i - truth_i|| per node.
  std::vector<double> noise_before;
  /// ||output_i - truth_i|| per node.
  std::vector<double> noise_after;
  double mean_noise_before = 0.0;
  double mean_noise_after = 0.0;
  double tv_before = 0.0;
  double tv_after = 0.0;
};

DenoiseReport denoise_report(const NormalizedOps& ops, const FeatureMatrix& kernel_output,
                             const FeatureMatrix& ground_truth, const FeatureMatrix& noisy_input);

/// CSV columns: node_id, noise_before, noise_after.
void write_report_csv(std::ostream& out, const DenoiseReport& report);
/// JSON object with tv_before, tv_after, mean_noise_before, mean_noise_after.
void write_report_summary(std::ostream& out, const DenoiseReport& report);

struct Problem2Options {
  int iters = 10;
  double tol = 1e-6;
  /// Re-normalize A^ by its own degrees after every update (negative
  /// entries clamped first). Off means the literal additive update.
  bool renormalize = false;
  Index max_nodes = 2000;
};

struct Problem2Result {
  FeatureMatrix features;
  /// Final A^ (dense), updated from the last feature iterate.
  Eigen::MatrixXd adjacency;
  int iterations = 0;
  bool converged = false;
};

/// Alternates X^ <- (1 - alpha)(I - alpha A^)^{-1} X and
/// A^ <- A_n + sqrt_eps2 X^ X^^T / ||X^||_F^2, starting from A^ = A_n.
/// Stops after `iters` rounds or once ||X^_new - X^_old||_F < tol.
Problem2Result problem2_solve(const Graph& g, const FeatureMatrix& x, double alpha, double sqrt_eps2,
                              const Problem2Options& options = {});

enum class Prop2View {
  /// Feature-driven part of the denoised weight, A^_ij - A_n,ij.
  correction,
  /// The full denoised weight A^_ij.
  full_weight,
};

struct Prop2Options {
  Prop2View view = Prop2View::correction;
  Problem2Options solver;
};

/// Spearman correlation, over existing directed edges (i, j), between the
/// training-free cosine attention lift a_ij (|N_i| + 1) and the denoised
/// edge weight of the alternating solver. a_ij is the softmax over
/// j in N_i + {i} of cos(X_i, X_j). Edges touching an all-zero feature row
/// are skipped with a warning.
double prop2_attention_correlation(const Graph& g, const FeatureMatrix& x, double alpha, double sqrt_eps2,
                                   const Prop2Options& options = {});

/// The same statistic with the rows of the attention-side features randomly
/// permuted (the denoised weights keep the aligned features).
double prop2_permutation_null(const Graph& g, const FeatureMatrix& x, double alpha, double sqrt_eps2,
                              std::uint64_t seed, const Prop2Options& options = {});

}  // namespace gsd
