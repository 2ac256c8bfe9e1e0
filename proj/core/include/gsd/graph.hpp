#pragma once

// Sparse symmetric graphs, their normalized operators and the
// total-variation smoothness functional.

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace gsd {

using Index = Eigen::Index;

/// Dense node-by-feature matrix; column j is the graph signal x_j.
using FeatureMatrix = Eigen::MatrixXd;

/// Compressed-sparse-row matrix. Rows are sorted by column index.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols, std::vector<Index> row_ptr, std::vector<Index> col_idx,
               std::vector<double> values);

  static SparseMatrix identity(Index n);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index nnz() const noexcept { return static_cast<Index>(values_.size()); }

  std::span<const Index> row_ptr() const noexcept { return row_ptr_; }
  std::span<const Index> col_idx() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Entry (i, j), zero when not stored.
  double coeff(Index i, Index j) const;

  Eigen::MatrixXd to_dense() const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

/// Sparse-dense product op * x. Columns are processed independently in a
/// fixed order, so each output column is bitwise reproducible.
FeatureMatrix spmm(const SparseMatrix& op, const FeatureMatrix& x);

struct Edge {
  Index i = 0;
  Index j = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct GraphBuildOptions {
  bool allow_self_loops = false;
};

class Graph;
Graph build_graph(Index n, std::span<const Edge> edge_list, const GraphBuildOptions& options);

/// Undirected weighted graph. Each edge is stored once with i <= j and
/// interpreted symmetrically; storage is sorted by (i, j).
class Graph {
 public:
  Graph() = default;

  Index num_nodes() const noexcept { return n_; }
  /// Number of stored undirected edges, self-loops included.
  Index num_edges() const noexcept { return static_cast<Index>(edges_.size()); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  /// d_i = sum_j A_ij. A self-loop contributes its weight once.
  const std::vector<double>& degrees() const noexcept { return degrees_; }

  bool has_edge(Index i, Index j) const;
  double weight(Index i, Index j) const;
  bool has_self_loops() const noexcept { return self_loops_ > 0; }

  /// Symmetric adjacency A expanded to CSR.
  SparseMatrix adjacency() const;

  friend bool operator==(const Graph& a, const Graph& b) { return a.n_ == b.n_ && a.edges_ == b.edges_; }

 private:
  friend Graph build_graph(Index, std::span<const Edge>, const GraphBuildOptions&);

  Index n_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> degrees_;
  Index self_loops_ = 0;
};

/// Builds a graph from an edge list. (i, j) and (j, i) denote the same
/// edge; duplicates are merged by summing their weights.
/// Throws DomainError on out-of-range indices, non-finite or non-positive
/// weights, and self-loops unless `options.allow_self_loops`.
Graph build_graph(Index n, std::span<const Edge> edge_list, const GraphBuildOptions& options = {});

/// Normalized operators of a graph.
struct NormalizedOps {
  SparseMatrix a_norm;             ///< A_n = D^{-1/2} A D^{-1/2}
  SparseMatrix lap_norm;           ///< L_n = I - A_n
  SparseMatrix a_renorm;           ///< D~^{-1/2} (A + I) D~^{-1/2}
  std::vector<double> d_ratio;     ///< d_i / d~_i
  std::vector<double> d_tilde_inv; ///< 1 / d~_i

  Index num_nodes() const noexcept { return a_norm.rows(); }
};

/// Throws IsolatedNodeError naming the first node with d_i = 0.
NormalizedOps normalized_ops(const Graph& g);

/// Self-loop renormalized adjacency alone. Defined for graphs with isolated
/// nodes since d~_i >= 1.
SparseMatrix renormalized_adjacency(const Graph& g);

/// Tr(X^T L_n X). Values in [-1e-12, 0) from rounding are clamped to 0.
double total_variation(const NormalizedOps& ops, const FeatureMatrix& x);

/// Edge-list text format: "src<TAB>dst[<TAB>weight]" per line, 0-based,
/// '#' starts a comment. Node count is taken from `num_nodes`, else from a
/// "# nodes N" header line, else max index + 1.
Graph read_edge_list(std::istream& in, std::optional<Index> num_nodes = std::nullopt,
                     const GraphBuildOptions& options = {});
Graph read_edge_list(const std::filesystem::path& path, std::optional<Index> num_nodes = std::nullopt,
                     const GraphBuildOptions& options = {});
void write_edge_list(std::ostream& out, const Graph& g);

}  // namespace gsd
