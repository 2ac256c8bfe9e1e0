#include "gsd/datasets.hpp"

#include "gsd/diagnostics.hpp"
#include "gsd/error.hpp"
#include "gsd/random.hpp"

#include "json.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace gsd {

void validate_dataset(const LabeledDataset& ds, bool require_train_classes) {
  const Index n = ds.graph.num_nodes();
  if (ds.features.rows() != n) {
    throw DimensionError("dataset '" + ds.name + "': " + std::to_string(ds.features.rows()) +
                         " feature rows for " + std::to_string(n) + " nodes");
  }
  if (static_cast<Index>(ds.labels.size()) != n) throw DimensionError("dataset '" + ds.name + "': label count != N");
  if (ds.num_classes < 1) throw DomainError("dataset '" + ds.name + "': no classes");
  for (int y : ds.labels) {
    if (y < 0 || y >= ds.num_classes) throw DomainError("dataset '" + ds.name + "': label out of range");
  }
  if (!ds.features.allFinite()) throw DomainError("dataset '" + ds.name + "': non-finite features");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const auto* mask : {&ds.train, &ds.val, &ds.test}) {
    for (Index i : *mask) {
      if (i < 0 || i >= n) throw DomainError("dataset '" + ds.name + "': mask index out of range");
      if (seen[static_cast<std::size_t>(i)]++) {
        throw DomainError("dataset '" + ds.name + "': node " + std::to_string(i) + " appears in two masks");
      }
    }
  }
  if (require_train_classes) {
    std::vector<char> present(static_cast<std::size_t>(ds.num_classes), 0);
    for (Index i : ds.train) present[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])] = 1;
    for (int c = 0; c < ds.num_classes; ++c) {
      if (!present[static_cast<std::size_t>(c)]) {
        throw DomainError("dataset '" + ds.name + "': class " + std::to_string(c) + " has no training node");
      }
    }
  }
}

LabeledDataset make_split(LabeledDataset ds, const SplitSizes& sizes, bool per_class_train, std::uint64_t seed) {
  const Index n = ds.graph.num_nodes();
  if (sizes.train < 0 || sizes.val < 0 || sizes.test < 0) throw DomainError("make_split: negative split size");
  if (sizes.train + sizes.val + sizes.test > n) {
    throw DomainError("make_split: sizes " + std::to_string(sizes.train) + "/" + std::to_string(sizes.val) + "/" +
                      std::to_string(sizes.test) + " exceed " + std::to_string(n) + " nodes");
  }
  Rng rng(derive_seed(seed, 3));
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  ds.train.clear();
  ds.val.clear();
  ds.test.clear();

  if (per_class_train) {
    if (ds.num_classes < 1 || sizes.train % ds.num_classes != 0) {
      throw DomainError("make_split: train size " + std::to_string(sizes.train) + " is not divisible by " +
                        std::to_string(ds.num_classes) + " classes");
    }
    const Index per_class = sizes.train / ds.num_classes;
    for (int c = 0; c < ds.num_classes; ++c) {
      std::vector<Index> members;
      for (Index i = 0; i < n; ++i) {
        if (ds.labels[static_cast<std::size_t>(i)] == c) members.push_back(i);
      }
      if (static_cast<Index>(members.size()) < per_class) {
        throw DomainError("make_split: class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                          " nodes, " + std::to_string(per_class) + " needed for training");
      }
      std::shuffle(members.begin(), members.end(), rng);
      for (Index k = 0; k < per_class; ++k) {
        ds.train.push_back(members[static_cast<std::size_t>(k)]);
        taken[static_cast<std::size_t>(members[static_cast<std::size_t>(k)])] = 1;
      }
    }
  }

  std::vector<Index> rest;
  for (Index i = 0; i < n; ++i) {
    if (!taken[static_cast<std::size_t>(i)]) rest.push_back(i);
  }
  std::shuffle(rest.begin(), rest.end(), rng);
  std::size_t pos = 0;
  auto take = [&](std::vector<Index>& mask, Index count) {
    for (Index k = 0; k < count; ++k) mask.push_back(rest[pos++]);
  };
  if (!per_class_train) take(ds.train, sizes.train);
  take(ds.val, sizes.val);
  take(ds.test, sizes.test);
  for (auto* mask : {&ds.train, &ds.val, &ds.test}) std::sort(mask->begin(), mask->end());
  return ds;
}

namespace {

constexpr int kSbmAttempts = 20;

std::vector<int> community_of(Index n, int c) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  const Index base = n / c;
  const Index extra = n % c;
  Index node = 0;
  for (int k = 0; k < c; ++k) {
    const Index size = base + (k < extra ? 1 : 0);
    for (Index t = 0; t < size; ++t) labels[static_cast<std::size_t>(node++)] = k;
  }
  return labels;
}

}  // namespace

SbmResult gen_sbm(const SbmSpec& spec) {
  if (spec.n_communities < 2) throw DomainError("gen_sbm: need at least 2 communities");
  if (spec.n_nodes < spec.n_communities) throw DomainError("gen_sbm: fewer nodes than communities");
  if (!(spec.p_out >= 0.0 && spec.p_out < spec.p_in && spec.p_in <= 1.0)) {
    throw DomainError("gen_sbm: need 0 <= p_out < p_in <= 1");
  }
  if (spec.feature_dim < spec.n_communities) throw DomainError("gen_sbm: feature_dim must be >= n_communities");
  if (!(spec.feature_noise_sigma >= 0.0) || !(spec.community_mean_scale >= 0.0)) {
    throw DomainError("gen_sbm: scale and sigma must be >= 0");
  }

  const Index n = spec.n_nodes;
  const std::vector<int> labels = community_of(n, spec.n_communities);

  Graph graph;
  bool connected_enough = false;
  for (int attempt = 0; attempt < kSbmAttempts && !connected_enough; ++attempt) {
    Rng rng(derive_seed(spec.seed, 100 + static_cast<std::uint64_t>(attempt)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Edge> edges;
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        const double p = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? spec.p_in
                                                                                                    : spec.p_out;
        if (unit(rng) < p) edges.push_back({i, j, 1.0});
      }
    }
    graph = build_graph(n, edges);
    connected_enough = std::none_of(graph.degrees().begin(), graph.degrees().end(), [](double d) { return d == 0.0; });
  }
  if (!connected_enough) {
    throw DomainError("gen_sbm: every one of " + std::to_string(kSbmAttempts) +
                      " draws left a node isolated; raise p_in or n_nodes");
  }

  const Index block = spec.feature_dim / spec.n_communities;
  const double level = spec.community_mean_scale / std::sqrt(static_cast<double>(block));
  FeatureMatrix truth = FeatureMatrix::Zero(n, spec.feature_dim);
  for (Index i = 0; i < n; ++i) {
    const Index c = labels[static_cast<std::size_t>(i)];
    truth.row(i).segment(c * block, block).setConstant(level);
  }

  SbmResult out;
  out.ground_truth = truth;
  LabeledDataset& ds = out.dataset;
  ds.name = "sbm";
  ds.graph = std::move(graph);
  ds.labels = labels;
  ds.num_classes = spec.n_communities;
  for (int c = 0; c < spec.n_communities; ++c) {
    std::ostringstream name;
    name << "c" << std::setw(3) << std::setfill('0') << c;
    ds.class_names.push_back(name.str());
  }
  ds.features = truth;
  if (spec.feature_noise_sigma > 0.0) {
    Rng rng(derive_seed(spec.seed, 200));
    std::normal_distribution<double> normal(0.0, spec.feature_noise_sigma);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < spec.feature_dim; ++j) ds.features(i, j) += normal(rng);
    }
  }
  if (spec.split.train + spec.split.val + spec.split.test > 0) {
    ds = make_split(std::move(ds), spec.split, spec.per_class_train, derive_seed(spec.seed, 300));
  }
  return out;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw DomainError("sbm spec: bad value '" + text + "' for " + key);
  return value;
}

}  // namespace

SbmSpec parse_sbm_spec(const std::string& text) {
  SbmSpec spec;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw DomainError("sbm spec: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "n") {
      spec.n_nodes = parse_number<Index>(key, value);
    } else if (key == "communities") {
      spec.n_communities = parse_number<int>(key, value);
    } else if (key == "p_in") {
      spec.p_in = parse_number<double>(key, value);
    } else if (key == "p_out") {
      spec.p_out = parse_number<double>(key, value);
    } else if (key == "dim") {
      spec.feature_dim = parse_number<Index>(key, value);
    } else if (key == "scale") {
      spec.community_mean_scale = parse_number<double>(key, value);
    } else if (key == "sigma") {
      spec.feature_noise_sigma = parse_number<double>(key, value);
    } else if (key == "seed") {
      spec.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "train") {
      spec.split.train = parse_number<Index>(key, value);
    } else if (key == "val") {
      spec.split.val = parse_number<Index>(key, value);
    } else if (key == "test") {
      spec.split.test = parse_number<Index>(key, value);
    } else {
      throw DomainError("sbm spec: unknown key '" + key + "'");
    }
  }
  return spec;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

CitationLoad load_citation_raw(const std::filesystem::path& content_path, const std::filesystem::path& cites_path) {
  std::ifstream content(content_path);
  if (!content) throw ParseError(content_path.string(), 0, "cannot open file");
  std::ifstream cites(cites_path);
  if (!cites) throw ParseError(cites_path.string(), 0, "cannot open file");

  CitationLoad out;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  std::unordered_map<std::string, Index> id_index;
  Index feature_dim = -1;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(content, line)) {
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() < 3) throw ParseError(content_path.string(), line_no, "expected id, features and label");
    const auto dim = static_cast<Index>(tok.size() - 2);
    if (feature_dim < 0) feature_dim = dim;
    if (dim != feature_dim) {
      throw ParseError(content_path.string(), line_no,
                       "row has " + std::to_string(dim) + " features, expected " + std::to_string(feature_dim));
    }
    if (!id_index.emplace(tok.front(), static_cast<Index>(rows.size())).second) {
      throw ParseError(content_path.string(), line_no, "duplicate id '" + tok.front() + "'");
    }
    std::vector<double> row(static_cast<std::size_t>(dim));
    for (Index f = 0; f < dim; ++f) {
      const std::string& t = tok[static_cast<std::size_t>(f) + 1];
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), row[static_cast<std::size_t>(f)]);
      if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(row[static_cast<std::size_t>(f)])) {
        throw ParseError(content_path.string(), line_no, "bad feature value '" + t + "'");
      }
    }
    rows.push_back(std::move(row));
    raw_labels.push_back(tok.back());
    out.node_ids.push_back(tok.front());
  }
  if (rows.empty()) throw ParseError(content_path.string(), 0, "no nodes");

  std::set<std::pair<Index, Index>> pairs;
  line_no = 0;
  Index citation_lines = 0;
  while (std::getline(cites, line)) {
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 2) throw ParseError(cites_path.string(), line_no, "expected 'cited<TAB>citing'");
    ++citation_lines;
    const auto a = id_index.find(tok[0]);
    const auto b = id_index.find(tok[1]);
    if (a == id_index.end() || b == id_index.end()) {
      ++out.dangling_citations;
      continue;
    }
    if (a->second == b->second) {
      ++out.self_citations;
      continue;
    }
    pairs.emplace(std::min(a->second, b->second), std::max(a->second, b->second));
  }
  if (citation_lines == 0) throw ParseError(cites_path.string(), 0, "no citations");
  if (out.dangling_citations > 0) {
    warn("load_citation_raw: dropped " + std::to_string(out.dangling_citations) +
         " citations that reference unknown ids");
  }

  const auto n = static_cast<Index>(rows.size());
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [i, j] : pairs) edges.push_back({i, j, 1.0});
  out.undirected_edges = static_cast<Index>(edges.size());

  LabeledDataset& ds = out.dataset;
  ds.name = content_path.stem().string();
  ds.graph = build_graph(n, edges);
  ds.features.resize(n, feature_dim);
  for (Index i = 0; i < n; ++i) {
    for (Index f = 0; f < feature_dim; ++f) ds.features(i, f) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)];
  }
  std::set<std::string> names(raw_labels.begin(), raw_labels.end());
  ds.class_names.assign(names.begin(), names.end());
  ds.num_classes = static_cast<int>(ds.class_names.size());
  std::map<std::string, int> label_index;
  for (int c = 0; c < ds.num_classes; ++c) label_index[ds.class_names[static_cast<std::size_t>(c)]] = c;
  for (const auto& l : raw_labels) ds.labels.push_back(label_index.at(l));
  return out;
}

void write_citation_raw(const LabeledDataset& ds, const std::filesystem::path& content_path,
                        const std::filesystem::path& cites_path) {
  std::ofstream content(content_path);
  if (!content) throw Error("cannot write " + content_path.string());
  content << std::setprecision(17);
  for (Index i = 0; i < ds.graph.num_nodes(); ++i) {
    content << i;
    for (Index f = 0; f < ds.features.cols(); ++f) content << '\t' << ds.features(i, f);
    content << '\t' << ds.class_names.at(static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])) << '\n';
  }
  std::ofstream cites(cites_path);
  if (!cites) throw Error("cannot write " + cites_path.string());
  for (const Edge& e : ds.graph.edges()) {
    if (e.i != e.j) cites << e.i << '\t' << e.j << '\n';
  }
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256: init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int k = 0; k < len; ++k) hex << std::hex << std::setw(2) << std::setfill('0') << int{digest[k]};
  return hex.str();
}

void write_dataset_manifest(std::ostream& out, const LabeledDataset& ds,
                            const std::vector<std::filesystem::path>& files) {
  nlohmann::json j;
  j["name"] = ds.name;
  j["files"] = nlohmann::json::array();
  for (const auto& f : files) j["files"].push_back({{"path", f.filename().string()}, {"sha256", sha256_file(f)}});
  j["nodes"] = ds.graph.num_nodes();
  j["edges"] = ds.graph.num_edges();
  j["classes"] = ds.num_classes;
  j["features"] = ds.features.cols();
  out << j.dump(2) << '\n';
}

}  // namespace gsd
