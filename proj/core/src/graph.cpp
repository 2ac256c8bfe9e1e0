#include "gsd/graph.hpp"

#include "gsd/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

namespace gsd {

SparseMatrix::SparseMatrix(Index rows, Index cols, std::vector<Index> row_ptr, std::vector<Index> col_idx,
                           std::vector<double> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (static_cast<Index>(row_ptr_.size()) != rows_ + 1 || col_idx_.size() != values_.size() ||
      row_ptr_.back() != static_cast<Index>(values_.size())) {
    throw DimensionError("SparseMatrix: inconsistent CSR arrays");
  }
}

SparseMatrix SparseMatrix::identity(Index n) {
  std::vector<Index> ptr(static_cast<std::size_t>(n) + 1);
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i <= n; ++i) ptr[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  return SparseMatrix(n, n, std::move(ptr), std::move(idx), std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

double SparseMatrix::coeff(Index i, Index j) const {
  auto begin = col_idx_.begin() + row_ptr_[static_cast<std::size_t>(i)];
  auto end = col_idx_.begin() + row_ptr_[static_cast<std::size_t>(i) + 1];
  auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows_, cols_);
  for (Index i = 0; i < rows_; ++i) {
    for (Index k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k) {
      m(i, col_idx_[static_cast<std::size_t>(k)]) = values_[static_cast<std::size_t>(k)];
    }
  }
  return m;
}

FeatureMatrix spmm(const SparseMatrix& op, const FeatureMatrix& x) {
  if (op.cols() != x.rows()) {
    throw DimensionError("spmm: operator has " + std::to_string(op.cols()) + " columns, signal has " +
                         std::to_string(x.rows()) + " rows");
  }
  const auto ptr = op.row_ptr();
  const auto idx = op.col_idx();
  const auto val = op.values();
  FeatureMatrix y(op.rows(), x.cols());
  for (Index c = 0; c < x.cols(); ++c) {
    const double* xc = x.col(c).data();
    double* yc = y.col(c).data();
    for (Index i = 0; i < op.rows(); ++i) {
      double acc = 0.0;
      for (Index k = ptr[static_cast<std::size_t>(i)]; k < ptr[static_cast<std::size_t>(i) + 1]; ++k) {
        acc += val[static_cast<std::size_t>(k)] * xc[idx[static_cast<std::size_t>(k)]];
      }
      yc[i] = acc;
    }
  }
  return y;
}

Graph build_graph(Index n, std::span<const Edge> edge_list, const GraphBuildOptions& options) {
  if (n < 0) throw DomainError("build_graph: negative node count");
  std::vector<Edge> edges;
  edges.reserve(edge_list.size());
  for (const Edge& e : edge_list) {
    if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n) {
      throw DomainError("build_graph: edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                        ") out of range for " + std::to_string(n) + " nodes");
    }
    if (!std::isfinite(e.weight) || e.weight <= 0.0) {
      throw DomainError("build_graph: edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                        ") has non-positive or non-finite weight");
    }
    if (e.i == e.j && !options.allow_self_loops) {
      throw DomainError("build_graph: self-loop on node " + std::to_string(e.i) + " not permitted");
    }
    edges.push_back({std::min(e.i, e.j), std::max(e.i, e.j), e.weight});
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return std::pair(a.i, a.j) < std::pair(b.i, b.j); });

  Graph g;
  g.n_ = n;
  for (const Edge& e : edges) {
    if (!g.edges_.empty() && g.edges_.back().i == e.i && g.edges_.back().j == e.j) {
      g.edges_.back().weight += e.weight;
    } else {
      g.edges_.push_back(e);
    }
  }
  g.degrees_.assign(static_cast<std::size_t>(n), 0.0);
  for (const Edge& e : g.edges_) {
    g.degrees_[static_cast<std::size_t>(e.i)] += e.weight;
    if (e.i != e.j) {
      g.degrees_[static_cast<std::size_t>(e.j)] += e.weight;
    } else {
      ++g.self_loops_;
    }
  }
  return g;
}

bool Graph::has_edge(Index i, Index j) const { return weight(i, j) > 0.0; }

double Graph::weight(Index i, Index j) const {
  const Index a = std::min(i, j);
  const Index b = std::max(i, j);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair(a, b),
                             [](const Edge& e, const std::pair<Index, Index>& key) {
                               return std::pair(e.i, e.j) < key;
                             });
  if (it == edges_.end() || it->i != a || it->j != b) return 0.0;
  return it->weight;
}

namespace {

// Expands stored edges into CSR, scaling each entry by scale(i, j) and
// optionally adding `diag_add` to every diagonal entry.
template <class Scale>
SparseMatrix expand(const Graph& g, Scale scale, double diag_add) {
  const Index n = g.num_nodes();
  std::vector<std::vector<std::pair<Index, double>>> rows(static_cast<std::size_t>(n));
  std::vector<double> diag(static_cast<std::size_t>(n), diag_add);
  for (const Edge& e : g.edges()) {
    if (e.i == e.j) {
      diag[static_cast<std::size_t>(e.i)] += e.weight;
    } else {
      rows[static_cast<std::size_t>(e.i)].emplace_back(e.j, e.weight);
      rows[static_cast<std::size_t>(e.j)].emplace_back(e.i, e.weight);
    }
  }
  std::vector<Index> ptr{0};
  std::vector<Index> idx;
  std::vector<double> val;
  ptr.reserve(static_cast<std::size_t>(n) + 1);
  for (Index i = 0; i < n; ++i) {
    auto& r = rows[static_cast<std::size_t>(i)];
    if (diag[static_cast<std::size_t>(i)] != 0.0) r.emplace_back(i, diag[static_cast<std::size_t>(i)]);
    std::sort(r.begin(), r.end());
    for (const auto& [j, w] : r) {
      idx.push_back(j);
      val.push_back(w * scale(i, j));
    }
    ptr.push_back(static_cast<Index>(idx.size()));
  }
  return SparseMatrix(n, n, std::move(ptr), std::move(idx), std::move(val));
}

}  // namespace

SparseMatrix Graph::adjacency() const {
  return expand(*this, [](Index, Index) { return 1.0; }, 0.0);
}

SparseMatrix renormalized_adjacency(const Graph& g) {
  std::vector<double> inv_sqrt(g.degrees().size());
  for (std::size_t i = 0; i < inv_sqrt.size(); ++i) inv_sqrt[i] = 1.0 / std::sqrt(g.degrees()[i] + 1.0);
  return expand(g, [&](Index i, Index j) { return inv_sqrt[static_cast<std::size_t>(i)] * inv_sqrt[static_cast<std::size_t>(j)]; },
                1.0);
}

NormalizedOps normalized_ops(const Graph& g) {
  const Index n = g.num_nodes();
  const auto& d = g.degrees();
  std::vector<double> inv_sqrt(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const double di = d[static_cast<std::size_t>(i)];
    if (!(di > 0.0)) throw IsolatedNodeError(i, "normalized_ops");
    inv_sqrt[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(di);
  }

  NormalizedOps ops;
  ops.a_norm = expand(
      g, [&](Index i, Index j) { return inv_sqrt[static_cast<std::size_t>(i)] * inv_sqrt[static_cast<std::size_t>(j)]; },
      0.0);

  // L_n = I - A_n, merged row by row so the diagonal is always stored.
  {
    const auto ptr = ops.a_norm.row_ptr();
    const auto idx = ops.a_norm.col_idx();
    const auto val = ops.a_norm.values();
    std::vector<Index> lptr{0};
    std::vector<Index> lidx;
    std::vector<double> lval;
    for (Index i = 0; i < n; ++i) {
      bool diag_done = false;
      for (Index k = ptr[static_cast<std::size_t>(i)]; k < ptr[static_cast<std::size_t>(i) + 1]; ++k) {
        const Index j = idx[static_cast<std::size_t>(k)];
        if (!diag_done && j >= i) {
          if (j == i) {
            lidx.push_back(i);
            lval.push_back(1.0 - val[static_cast<std::size_t>(k)]);
            diag_done = true;
            continue;
          }
          lidx.push_back(i);
          lval.push_back(1.0);
          diag_done = true;
        }
        lidx.push_back(j);
        lval.push_back(-val[static_cast<std::size_t>(k)]);
      }
      if (!diag_done) {
        lidx.push_back(i);
        lval.push_back(1.0);
      }
      lptr.push_back(static_cast<Index>(lidx.size()));
    }
    ops.lap_norm = SparseMatrix(n, n, std::move(lptr), std::move(lidx), std::move(lval));
  }

  ops.a_renorm = renormalized_adjacency(g);
  ops.d_ratio.resize(static_cast<std::size_t>(n));
  ops.d_tilde_inv.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    const double dt = d[i] + 1.0;
    ops.d_ratio[i] = d[i] / dt;
    ops.d_tilde_inv[i] = 1.0 / dt;
  }
  return ops;
}

double total_variation(const NormalizedOps& ops, const FeatureMatrix& x) {
  if (x.rows() != ops.num_nodes()) {
    throw DimensionError("total_variation: signal has " + std::to_string(x.rows()) + " rows, graph has " +
                         std::to_string(ops.num_nodes()) + " nodes");
  }
  const FeatureMatrix lx = spmm(ops.lap_norm, x);
  double tv = 0.0;
  for (Index c = 0; c < x.cols(); ++c) tv += x.col(c).dot(lx.col(c));
  if (tv < 0.0 && tv >= -1e-12) tv = 0.0;
  return tv;
}

Graph read_edge_list(std::istream& in, std::optional<Index> num_nodes, const GraphBuildOptions& options) {
  std::vector<Edge> edges;
  Index max_id = -1;
  std::optional<Index> declared_nodes;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind("# nodes ", 0) == 0) {
      try {
        declared_nodes = std::stoll(line.substr(8));
      } catch (const std::logic_error&) {
        throw ParseError("edge list", line_no, "malformed node-count header");
      }
      continue;
    }
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string a, b, w;
    if (!(fields >> a)) continue;
    if (!(fields >> b)) throw ParseError("edge list", line_no, "expected 'src<TAB>dst[<TAB>weight]'");
    Edge e;
    try {
      std::size_t pos = 0;
      e.i = std::stoll(a, &pos);
      if (pos != a.size()) throw std::invalid_argument(a);
      e.j = std::stoll(b, &pos);
      if (pos != b.size()) throw std::invalid_argument(b);
      if (fields >> w) {
        e.weight = std::stod(w, &pos);
        if (pos != w.size()) throw std::invalid_argument(w);
      }
    } catch (const std::logic_error&) {
      throw ParseError("edge list", line_no, "malformed field");
    }
    std::string extra;
    if (fields >> extra) throw ParseError("edge list", line_no, "unexpected extra field '" + extra + "'");
    if (e.i < 0 || e.j < 0) throw ParseError("edge list", line_no, "negative node index");
    max_id = std::max({max_id, e.i, e.j});
    edges.push_back(e);
  }
  const Index n = num_nodes.value_or(declared_nodes.value_or(max_id + 1));
  return build_graph(n, edges, options);
}

Graph read_edge_list(const std::filesystem::path& path, std::optional<Index> num_nodes,
                     const GraphBuildOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return read_edge_list(in, num_nodes, options);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << "# nodes " << g.num_nodes() << '\n';
  const auto old_precision = out.precision(17);
  for (const Edge& e : g.edges()) {
    out << e.i << '\t' << e.j;
    if (e.weight != 1.0) out << '\t' << e.weight;
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace gsd
