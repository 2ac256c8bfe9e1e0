#pragma once

#include "gsd/classify.hpp"
#include "gsd/datasets.hpp"
#include "gsd/filters.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gsd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOptions {
  std::string dataset;
  std::string sbm;
  std::vector<std::string> kernels{"gsdn-f"};
  double alpha = 0.6;
  int k = 4;
  std::optional<double> beta;
  std::vector<double> theta;
  double lambda_max = 2.0;
  std::vector<double> sigma{0.0};
  std::vector<double> edge_ratio{0.0};
  std::string seeds = "0";
  std::string out;
};

struct DenoiseOptions {
  std::string reference = "truth";
  bool write_node_csv = true;
};

struct ClassifyOptions {
  int epochs = 200;
  double learning_rate = 0.02;
  double weight_decay = 5e-4;
  int hidden = 16;
  int layers = 2;
  std::string optimizer = "adam";
  std::vector<double> beta_grid{0.0, 0.05, 0.1, 0.2, 0.5, 1.0};
  std::vector<Index> split{140, 500, 1000};
  bool history = false;
};

struct BiasVarianceOptions {
  std::string graph;
  std::vector<double> alpha_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::optional<int> k;
  int samples = 10000;
};

struct SweepOptions {
  std::vector<double> grid_k;
  std::vector<double> grid_alpha;
};

/// Output directory plus the record of everything a command wrote.
class RunContext {
 public:
  RunContext(fs::path out_dir, std::ostream& log) : out_dir_(std::move(out_dir)), log_(log) {}

  /// Writes `relative` under the output directory through a temporary file
  /// renamed into place.
  void write(const fs::path& relative, const std::function<void(std::ostream&)>& body);
  /// Notes a file the command wrote by other means.
  void record(const fs::path& relative);

  const fs::path& out_dir() const noexcept { return out_dir_; }
  const std::vector<std::string>& outputs() const noexcept { return outputs_; }
  std::ostream& log() noexcept { return log_; }
  json& summary() noexcept { return summary_; }

 private:
  fs::path out_dir_;
  std::ostream& log_;
  std::vector<std::string> outputs_;
  json summary_ = json::object();
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Dataset for one seed with the reference (noise-free) features. File
/// datasets are L1 row-normalized and split at random with `split`.
struct LoadedData {
  LabeledDataset dataset;
  FeatureMatrix truth;
  bool synthetic = false;
};

LoadedData load_data(const CommonOptions& common, std::uint64_t seed, const std::optional<SplitSizes>& file_split);

KernelSpec kernel_spec(const CommonOptions& common, const std::string& name);

json echo_common(const CommonOptions& common);

void cmd_denoise(RunContext& ctx, const CommonOptions& common, const DenoiseOptions& opts);
void cmd_classify(RunContext& ctx, const CommonOptions& common, const ClassifyOptions& opts);
void cmd_bias_variance(RunContext& ctx, const CommonOptions& common, const BiasVarianceOptions& opts);
void cmd_sweep(RunContext& ctx, const CommonOptions& common, const ClassifyOptions& train, const SweepOptions& opts);
void cmd_gen_sbm(RunContext& ctx, const CommonOptions& common);

}  // namespace gsd::cli
