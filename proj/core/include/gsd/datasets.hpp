#pragma once

// Labeled graph datasets: stochastic-block-model generation with planted
// smooth features, raw citation-network ingestion, and train/val/test splits.

#include "gsd/graph.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace gsd {

struct LabeledDataset {
  std::string name;
  Graph graph;
  FeatureMatrix features;
  /// Class id per node, in [0, num_classes).
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<std::string> class_names;
  /// Disjoint node sets, each sorted ascending.
  std::vector<Index> train;
  std::vector<Index> val;
  std::vector<Index> test;
};

/// Throws if shapes disagree, labels are out of range, masks overlap or
/// hold invalid indices, or (when `require_train_classes`) a class is
/// missing from the training set.
void validate_dataset(const LabeledDataset& ds, bool require_train_classes = true);

struct SplitSizes {
  Index train = 140;
  Index val = 500;
  Index test = 1000;
};

/// Random split. With `per_class_train` the training set takes train / C
/// nodes of every class; validation and test are drawn uniformly from the
/// remaining nodes.
LabeledDataset make_split(LabeledDataset ds, const SplitSizes& sizes, bool per_class_train, std::uint64_t seed);

struct SbmSpec {
  Index n_nodes = 200;
  int n_communities = 2;
  double p_in = 0.05;
  double p_out = 0.005;
  Index feature_dim = 50;
  /// L2 norm of each community mean vector.
  double community_mean_scale = 0.01;
  double feature_noise_sigma = 0.01;
  std::uint64_t seed = 0;
  SplitSizes split{40, 50, 100};
  bool per_class_train = true;
};

struct SbmResult {
  LabeledDataset dataset;
  /// Community means per node, before noise.
  FeatureMatrix ground_truth;
};

/// Communities are contiguous blocks; the first n mod C get one extra node.
/// Community c's mean is constant on its own block of feature_dim / C
/// coordinates and zero elsewhere, so the means are orthogonal. Graphs with
/// an isolated node are redrawn, at most 20 times.
SbmResult gen_sbm(const SbmSpec& spec);

/// Parses "key=value,key=value" (keys: n, communities, p_in, p_out, dim,
/// scale, sigma, seed, train, val, test) over the defaults.
SbmSpec parse_sbm_spec(const std::string& text);

struct CitationLoad {
  LabeledDataset dataset;
  /// Original paper ids in node order.
  std::vector<std::string> node_ids;
  Index dangling_citations = 0;
  Index self_citations = 0;
  /// Citation lines after merging duplicates and reversed pairs.
  Index undirected_edges = 0;
};

/// Reads "id<TAB>f_1 ... f_F<TAB>label" rows and "cited<TAB>citing" rows.
/// Node order follows the content file; labels are indexed alphabetically.
/// Citations naming an unknown id are dropped with a warning.
CitationLoad load_citation_raw(const std::filesystem::path& content_path, const std::filesystem::path& cites_path);

/// Writes `ds` in the same raw format ("<stem>.content", "<stem>.cites"),
/// with ids 0..N-1 and features at round-trip precision.
void write_citation_raw(const LabeledDataset& ds, const std::filesystem::path& content_path,
                        const std::filesystem::path& cites_path);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// JSON manifest: name, files with checksums, nodes, edges, classes, features.
/// Files are listed by name only; the manifest is meant to sit beside them.
void write_dataset_manifest(std::ostream& out, const LabeledDataset& ds,
                            const std::vector<std::filesystem::path>& files);

}  // namespace gsd
