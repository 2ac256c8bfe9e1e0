#include "gsd/denoise.hpp"

#include "gsd/diagnostics.hpp"
#include "gsd/error.hpp"
#include "gsd/random.hpp"
#include "gsd/spectral.hpp"
#include "gsd/stats.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>

namespace gsd {

NormalizedFeatures normalize_features(const FeatureMatrix& x, RowNorm norm) {
  if (!x.allFinite()) throw DomainError("normalize_features: input contains non-finite values");
  NormalizedFeatures out{x, {}};
  for (Index i = 0; i < x.rows(); ++i) {
    const double s = norm == RowNorm::l1 ? x.row(i).lpNorm<1>() : x.row(i).norm();
    if (s == 0.0) {
      out.zero_rows.push_back(i);
    } else {
      out.features.row(i) /= s;
    }
  }
  return out;
}

FeatureMatrix inject_feature_noise(const FeatureMatrix& x, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) {
    throw DomainError("inject_feature_noise: sigma must be finite and >= 0");
  }
  if (!std::isfinite(spec.mu)) throw DomainError("inject_feature_noise: mu must be finite");
  if (spec.sigma == 0.0 && spec.mu == 0.0) return x;
  Rng rng(derive_seed(spec.seed, 0));
  FeatureMatrix out = x;
  if (spec.sigma == 0.0) {
    out.array() += spec.mu;
    return out;
  }
  std::normal_distribution<double> normal(spec.mu, spec.sigma);
  // Row-major draw order, independent of Eigen's storage layout.
  for (Index i = 0; i < out.rows(); ++i) {
    for (Index j = 0; j < out.cols(); ++j) out(i, j) += normal(rng);
  }
  return out;
}

namespace {

struct EdgePool {
  std::vector<Edge> edges;
  std::unordered_map<std::uint64_t, std::size_t> where;
  std::vector<Index> degree;
  Index n = 0;

  std::uint64_t key(Index i, Index j) const {
    if (i > j) std::swap(i, j);
    return static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(j);
  }
  bool contains(Index i, Index j) const { return where.contains(key(i, j)); }
  void add(Edge e) {
    if (e.i > e.j) std::swap(e.i, e.j);
    where.emplace(key(e.i, e.j), edges.size());
    edges.push_back(e);
    ++degree[static_cast<std::size_t>(e.i)];
    ++degree[static_cast<std::size_t>(e.j)];
  }
  void remove_at(std::size_t pos) {
    const Edge e = edges[pos];
    where.erase(key(e.i, e.j));
    if (pos + 1 != edges.size()) {
      edges[pos] = edges.back();
      where[key(edges[pos].i, edges[pos].j)] = pos;
    }
    edges.pop_back();
    --degree[static_cast<std::size_t>(e.i)];
    --degree[static_cast<std::size_t>(e.j)];
  }
  bool removable(std::size_t pos) const {
    const Edge& e = edges[pos];
    return degree[static_cast<std::size_t>(e.i)] > 1 && degree[static_cast<std::size_t>(e.j)] > 1;
  }
};

constexpr int kRejectionAttempts = 1000;

}  // namespace

EdgeNoiseResult inject_edge_noise(const Graph& g, const NoiseSpec& spec) {
  if (!(spec.edge_ratio >= 0.0) || !std::isfinite(spec.edge_ratio)) {
    throw DomainError("inject_edge_noise: edge_ratio must be finite and >= 0");
  }
  EdgePool pool;
  pool.n = g.num_nodes();
  pool.degree.assign(static_cast<std::size_t>(pool.n), 0);
  std::vector<Edge> loops;
  for (const Edge& e : g.edges()) {
    if (e.i == e.j) {
      loops.push_back(e);
    } else {
      pool.add(e);
    }
  }
  if (spec.edge_ratio == 0.0) return {g, 0, 0};

  const auto base = static_cast<double>(pool.edges.size());
  const auto ops = static_cast<Index>(std::floor(spec.edge_ratio * base));
  if (ops < 1) {
    throw DomainError("inject_edge_noise: edge_ratio * |E| = " + std::to_string(spec.edge_ratio * base) +
                      " is below one operation");
  }
  const auto max_pairs = static_cast<std::uint64_t>(pool.n) * static_cast<std::uint64_t>(pool.n - 1) / 2;

  Rng rng(derive_seed(spec.seed, 1));
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<Index> node(0, pool.n - 1);
  EdgeNoiseResult out;

  for (Index op = 0; op < ops; ++op) {
    if (coin(rng)) {
      if (pool.edges.size() >= max_pairs) {
        throw DomainError("inject_edge_noise: graph is complete, no absent pair left to add");
      }
      Index i = 0, j = 0;
      do {
        i = node(rng);
        j = node(rng);
      } while (i == j || pool.contains(i, j));
      pool.add({i, j, 1.0});
      ++out.added;
    } else {
      std::optional<std::size_t> pick;
      std::uniform_int_distribution<std::size_t> any(0, pool.edges.empty() ? 0 : pool.edges.size() - 1);
      for (int attempt = 0; attempt < kRejectionAttempts && !pool.edges.empty(); ++attempt) {
        const std::size_t pos = any(rng);
        if (pool.removable(pos)) {
          pick = pos;
          break;
        }
      }
      if (!pick) {
        std::vector<std::size_t> candidates;
        for (std::size_t pos = 0; pos < pool.edges.size(); ++pos) {
          if (pool.removable(pos)) candidates.push_back(pos);
        }
        if (candidates.empty()) {
          throw DomainError("inject_edge_noise: graph too sparse, every remaining edge would isolate a node");
        }
        pick = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
      }
      pool.remove_at(*pick);
      ++out.removed;
    }
  }
  std::vector<Edge> all = std::move(pool.edges);
  all.insert(all.end(), loops.begin(), loops.end());
  out.graph = build_graph(g.num_nodes(), all, GraphBuildOptions{.allow_self_loops = !loops.empty()});
  return out;
}

DenoiseReport denoise_report(const NormalizedOps& ops, const FeatureMatrix& kernel_output,
                             const FeatureMatrix& ground_truth, const FeatureMatrix& noisy_input) {
  const Index n = ops.num_nodes();
  for (const FeatureMatrix* m : {&kernel_output, &ground_truth, &noisy_input}) {
    if (m->rows() != n || m->cols() != ground_truth.cols()) {
      throw DimensionError("denoise_report: matrices must all be " + std::to_string(n) + "x" +
                           std::to_string(ground_truth.cols()));
    }
  }
  DenoiseReport r;
  r.noise_before.resize(static_cast<std::size_t>(n));
  r.noise_after.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    r.noise_before[static_cast<std::size_t>(i)] = (noisy_input.row(i) - ground_truth.row(i)).norm();
    r.noise_after[static_cast<std::size_t>(i)] = (kernel_output.row(i) - ground_truth.row(i)).norm();
  }
  r.mean_noise_before = mean(r.noise_before);
  r.mean_noise_after = mean(r.noise_after);
  r.tv_before = total_variation(ops, noisy_input);
  r.tv_after = total_variation(ops, kernel_output);
  return r;
}

void write_report_csv(std::ostream& out, const DenoiseReport& report) {
  out << "node_id,noise_before,noise_after\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < report.noise_after.size(); ++i) {
    out << i << ',' << report.noise_before[i] << ',' << report.noise_after[i] << '\n';
  }
  out.precision(old);
}

void write_report_summary(std::ostream& out, const DenoiseReport& report) {
  nlohmann::json j{{"tv_before", report.tv_before},
                   {"tv_after", report.tv_after},
                   {"mean_noise_before", report.mean_noise_before},
                   {"mean_noise_after", report.mean_noise_after}};
  out << j.dump(2) << '\n';
}

namespace {

Eigen::MatrixXd renormalize_dense(Eigen::MatrixXd a) {
  a = a.cwiseMax(0.0);
  const Eigen::VectorXd deg = a.rowwise().sum();
  for (Index i = 0; i < deg.size(); ++i) {
    if (!(deg(i) > 0.0)) throw IsolatedNodeError(i, "problem2_solve (renormalize)");
  }
  const Eigen::VectorXd s = deg.cwiseSqrt().cwiseInverse();
  return s.asDiagonal() * a * s.asDiagonal();
}

}  // namespace

Problem2Result problem2_solve(const Graph& g, const FeatureMatrix& x, double alpha, double sqrt_eps2,
                              const Problem2Options& options) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("problem2_solve: alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  if (!(sqrt_eps2 >= 0.0) || !std::isfinite(sqrt_eps2)) {
    throw DomainError("problem2_solve: sqrt(eps2) must be finite and >= 0");
  }
  if (options.iters < 1) throw DomainError("problem2_solve: iters must be >= 1");
  if (g.num_nodes() > options.max_nodes) {
    throw DomainError("problem2_solve: dense solve limited to " + std::to_string(options.max_nodes) + " nodes");
  }
  if (x.rows() != g.num_nodes()) throw DimensionError("problem2_solve: feature rows do not match node count");

  const Eigen::MatrixXd a_n = normalized_ops(g).a_norm.to_dense();
  Problem2Result r;
  r.adjacency = a_n;
  FeatureMatrix prev = x;
  for (int it = 1; it <= options.iters; ++it) {
    r.features = resolvent_smooth(r.adjacency, x, alpha);
    r.iterations = it;
    const double change = (r.features - prev).norm();
    const double norm_sq = r.features.squaredNorm();
    if (sqrt_eps2 != 0.0 && norm_sq > 0.0) {
      r.adjacency = a_n + (sqrt_eps2 / norm_sq) * (r.features * r.features.transpose());
      if (options.renormalize) r.adjacency = renormalize_dense(std::move(r.adjacency));
    }
    if (change < options.tol) {
      r.converged = true;
      break;
    }
    prev = r.features;
  }
  return r;
}

namespace {

struct EdgeValues {
  std::vector<double> attention;
  std::vector<double> weight;
};

EdgeValues prop2_edge_values(const Graph& g, const FeatureMatrix& x_attention, const Eigen::MatrixXd& a_n,
                             const Eigen::MatrixXd& a_hat, Prop2View view) {
  const Index n = g.num_nodes();
  const SparseMatrix adj = g.adjacency();
  const auto ptr = adj.row_ptr();
  const auto idx = adj.col_idx();

  Eigen::VectorXd norms(n);
  std::vector<bool> usable(static_cast<std::size_t>(n));
  Index zero_rows = 0;
  for (Index i = 0; i < n; ++i) {
    norms(i) = x_attention.row(i).norm();
    usable[static_cast<std::size_t>(i)] = norms(i) > 0.0;
    if (norms(i) == 0.0) ++zero_rows;
  }
  if (zero_rows > 0) {
    warn("prop2_attention_correlation: " + std::to_string(zero_rows) +
         " zero-norm feature rows; their edges are excluded");
  }
  auto cosine = [&](Index i, Index j) { return x_attention.row(i).dot(x_attention.row(j)) / (norms(i) * norms(j)); };

  EdgeValues out;
  for (Index i = 0; i < n; ++i) {
    if (!usable[static_cast<std::size_t>(i)]) continue;
    const auto begin = ptr[static_cast<std::size_t>(i)];
    const auto end = ptr[static_cast<std::size_t>(i) + 1];
    // Softmax over N_i and i itself; the max-shift keeps exp() tame.
    double denom = std::exp(0.0);  // cos(X_i, X_i) - 1
    Index neighbors = 0;
    for (Index k = begin; k < end; ++k) {
      const Index j = idx[static_cast<std::size_t>(k)];
      if (j == i || !usable[static_cast<std::size_t>(j)]) continue;
      denom += std::exp(cosine(i, j) - 1.0);
      ++neighbors;
    }
    for (Index k = begin; k < end; ++k) {
      const Index j = idx[static_cast<std::size_t>(k)];
      if (j == i || !usable[static_cast<std::size_t>(j)]) continue;
      const double a_ij = std::exp(cosine(i, j) - 1.0) / denom;
      out.attention.push_back(a_ij * static_cast<double>(neighbors + 1));
      out.weight.push_back(view == Prop2View::correction ? a_hat(i, j) - a_n(i, j) : a_hat(i, j));
    }
  }
  return out;
}

double prop2_statistic(const Graph& g, const FeatureMatrix& x, const FeatureMatrix& x_attention, double alpha,
                       double sqrt_eps2, const Prop2Options& options) {
  if (x.rows() != g.num_nodes()) throw DimensionError("prop2_attention_correlation: feature/node mismatch");
  Index off_diagonal = 0;
  for (const Edge& e : g.edges()) off_diagonal += e.i != e.j ? 1 : 0;
  if (off_diagonal < 10) {
    throw DomainError("prop2_attention_correlation: need at least 10 edges, got " + std::to_string(off_diagonal));
  }
  const Eigen::MatrixXd a_n = normalized_ops(g).a_norm.to_dense();
  const Problem2Result solved = problem2_solve(g, x, alpha, sqrt_eps2, options.solver);
  const EdgeValues v = prop2_edge_values(g, x_attention, a_n, solved.adjacency, options.view);
  return spearman(v.attention, v.weight);
}

}  // namespace

double prop2_attention_correlation(const Graph& g, const FeatureMatrix& x, double alpha, double sqrt_eps2,
                                   const Prop2Options& options) {
  return prop2_statistic(g, x, x, alpha, sqrt_eps2, options);
}

double prop2_permutation_null(const Graph& g, const FeatureMatrix& x, double alpha, double sqrt_eps2,
                              std::uint64_t seed, const Prop2Options& options) {
  std::vector<Index> perm(static_cast<std::size_t>(x.rows()));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(derive_seed(seed, 2));
  std::shuffle(perm.begin(), perm.end(), rng);
  FeatureMatrix permuted(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) permuted.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
  return prop2_statistic(g, x, permuted, alpha, sqrt_eps2, options);
}

}  // namespace gsd
