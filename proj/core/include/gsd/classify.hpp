#pragma once

// Semi-supervised node classification: a parameter-free propagation kernel
// per layer followed by learned weights, trained full-batch with manual
// backpropagation.

#include "gsd/datasets.hpp"
#include "gsd/filters.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace gsd {

enum class Optimizer { adam, gradient_descent };

struct TrainConfig {
  double learning_rate = 0.02;
  double l2_weight = 5e-4;
  int hidden_units = 16;
  /// 1: logits = K(X) W2. 2: logits = K(relu(K(X) W1)) W2.
  int layers = 2;
  int epochs = 200;
  KernelSpec kernel{};
  std::uint64_t seed = 0;
  /// Candidates for gsdn-ef's beta, picked by validation accuracy.
  std::vector<double> beta_grid{0.0, 0.05, 0.1, 0.2, 0.5, 1.0};
  Optimizer optimizer = Optimizer::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

struct ClassifierParams {
  /// F x hidden; empty for the 1-layer model.
  Eigen::MatrixXd w1;
  /// hidden x C (2 layers) or F x C (1 layer).
  Eigen::MatrixXd w2;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  ClassifierParams params;
  std::vector<EpochMetrics> history;
  /// The configuration actually trained, with the selected beta filled in.
  TrainConfig config;
  std::optional<double> selected_beta;
  double val_accuracy = 0.0;
  double val_loss = 0.0;
};

/// Glorot-uniform weights for `cfg` on a dataset with `features` inputs and
/// `classes` outputs.
ClassifierParams init_params(Index features, int classes, const TrainConfig& cfg);

/// Trains with a fixed epoch count. For gsdn-ef kernels one model is
/// trained per beta in cfg.beta_grid; the one with the best validation
/// accuracy (ties: lower validation loss, then smaller beta) is returned.
/// Throws DivergenceError when the loss stops being finite.
TrainResult train(const LabeledDataset& ds, const TrainConfig& cfg);

/// Training objective at `params`: mean cross-entropy over the training
/// nodes plus l2_weight (||W1||^2 + ||W2||^2).
double training_loss(const LabeledDataset& ds, const TrainConfig& cfg, const ClassifierParams& params);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  int probes = 0;
  /// W1 entries skipped because the step could flip a relu.
  int rejected = 0;
};

/// Central finite differences (step 1e-5 max(1, |w|)) on random weight
/// entries against the analytic gradient.
GradientCheckResult gradient_check(const LabeledDataset& ds, const TrainConfig& cfg, const ClassifierParams& params,
                                   int n_probes, std::uint64_t seed = 0);

/// Analytic gradient of training_loss, exposed for tests.
ClassifierParams loss_gradient(const LabeledDataset& ds, const TrainConfig& cfg, const ClassifierParams& params);

enum class Split { train, val, test };

struct EvalMetrics {
  double accuracy = 0.0;
  /// Micro-averaged F1; equal to accuracy for single-label prediction.
  double micro_f1 = 0.0;
};

/// Node logits (N x C).
Eigen::MatrixXd predict_logits(const LabeledDataset& ds, const ClassifierParams& params, const TrainConfig& cfg);

EvalMetrics evaluate(const LabeledDataset& ds, const ClassifierParams& params, const TrainConfig& cfg, Split split);

/// Metrics of predicted classes against labels over `mask`. Throws on an
/// empty mask.
EvalMetrics score_predictions(const std::vector<int>& predicted, const std::vector<int>& labels,
                              const std::vector<Index>& mask, int num_classes);

enum class SweepParam { alpha, k_order };

struct SweepRow {
  double value = 0.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::vector<double> accuracies;
};

/// Produces the dataset used for one seed (e.g. a freshly drawn noisy SBM).
using DatasetFactory = std::function<LabeledDataset(std::uint64_t seed)>;

/// Test accuracy per grid value, averaged over seeds. Each seed draws a
/// dataset from `make_dataset` and trains with cfg.seed = seed.
std::vector<SweepRow> sweep(const DatasetFactory& make_dataset, const TrainConfig& base_cfg, SweepParam param,
                            const std::vector<double>& grid, const std::vector<std::uint64_t>& seeds);

/// Same on a fixed dataset; seeds vary the weight initialization only.
std::vector<SweepRow> sweep(const LabeledDataset& ds, const TrainConfig& base_cfg, SweepParam param,
                            const std::vector<double>& grid, const std::vector<std::uint64_t>& seeds);

/// CSV columns: epoch, train_loss, train_acc, val_acc.
void write_history_csv(std::ostream& out, const std::vector<EpochMetrics>& history);

/// JSON object with the resolved config, seed, and test metrics.
void write_train_report(std::ostream& out, const TrainResult& result, const EvalMetrics& test);

}  // namespace gsd
