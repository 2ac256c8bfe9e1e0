#include "gsd/classify.hpp"

#include "gsd/error.hpp"
#include "gsd/random.hpp"
#include "gsd/stats.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace gsd {
namespace {

// Everything about a (dataset, kernel) pair that does not depend on weights.
struct Context {
  const LabeledDataset* ds;
  Propagator prop;
  FeatureMatrix p1;  // K(X)
};

Context make_context(const LabeledDataset& ds, const TrainConfig& cfg) {
  const NormalizedOps ops = normalized_ops(ds.graph);
  Propagator prop = Propagator::prepare(cfg.kernel, ds.graph, ops, ds.features);
  FeatureMatrix p1 = prop.apply(ds.features);
  return Context{&ds, std::move(prop), std::move(p1)};
}

struct Forward {
  Eigen::MatrixXd z1;  // K(X) W1
  Eigen::MatrixXd p2;  // K(relu(z1))
  Eigen::MatrixXd logits;
};

Forward forward(const Context& ctx, const TrainConfig& cfg, const ClassifierParams& params) {
  Forward f;
  if (cfg.layers == 1) {
    f.logits = ctx.p1 * params.w2;
  } else {
    f.z1 = ctx.p1 * params.w1;
    f.p2 = ctx.prop.apply(f.z1.cwiseMax(0.0));
    f.logits = f.p2 * params.w2;
  }
  return f;
}

// Row softmax with the usual max shift.
Eigen::RowVectorXd softmax_row(const Eigen::MatrixXd& logits, Index i) {
  Eigen::RowVectorXd p = logits.row(i).array() - logits.row(i).maxCoeff();
  p = p.array().exp();
  return p / p.sum();
}

double mean_cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels,
                          const std::vector<Index>& mask) {
  double loss = 0.0;
  for (Index i : mask) {
    const double shift = logits.row(i).maxCoeff();
    const double lse = shift + std::log((logits.row(i).array() - shift).exp().sum());
    loss += lse - logits(i, labels[static_cast<std::size_t>(i)]);
  }
  return loss / static_cast<double>(mask.size());
}

double l2_term(const TrainConfig& cfg, const ClassifierParams& params) {
  return cfg.l2_weight * (params.w1.squaredNorm() + params.w2.squaredNorm());
}

ClassifierParams gradient(const Context& ctx, const TrainConfig& cfg, const ClassifierParams& params,
                          const Forward& f) {
  const auto& ds = *ctx.ds;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(f.logits.rows(), f.logits.cols());
  const double inv = 1.0 / static_cast<double>(ds.train.size());
  for (Index i : ds.train) {
    g.row(i) = softmax_row(f.logits, i) * inv;
    g(i, ds.labels[static_cast<std::size_t>(i)]) -= inv;
  }
  ClassifierParams grad;
  if (cfg.layers == 1) {
    grad.w2 = ctx.p1.transpose() * g + 2.0 * cfg.l2_weight * params.w2;
    return grad;
  }
  grad.w2 = f.p2.transpose() * g + 2.0 * cfg.l2_weight * params.w2;
  // Every kernel is a symmetric operator, so K^T = K.
  Eigen::MatrixXd dh = ctx.prop.apply(g * params.w2.transpose());
  dh = dh.cwiseProduct((f.z1.array() > 0.0).cast<double>().matrix());
  grad.w1 = ctx.p1.transpose() * dh + 2.0 * cfg.l2_weight * params.w1;
  return grad;
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Index i = 0; i < logits.rows(); ++i) {
    Index best = 0;
    logits.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double mask_accuracy(const std::vector<int>& pred, const std::vector<int>& labels, const std::vector<Index>& mask) {
  if (mask.empty()) return 0.0;
  Index hits = 0;
  for (Index i : mask) hits += pred[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(i)] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(mask.size());
}

void check_config(const LabeledDataset& ds, const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw DomainError("train: learning_rate must be > 0");
  if (cfg.epochs < 1) throw DomainError("train: epochs must be >= 1");
  if (cfg.layers != 1 && cfg.layers != 2) throw DomainError("train: layers must be 1 or 2");
  if (cfg.layers == 2 && cfg.hidden_units < 1) throw DomainError("train: hidden_units must be >= 1");
  if (!(cfg.l2_weight >= 0.0)) throw DomainError("train: l2_weight must be >= 0");
  validate_dataset(ds, true);
}

bool is_edge_denoising(KernelKind k) { return k == KernelKind::gsdn_ef || k == KernelKind::gsdn_ef_sparse; }

struct Adam {
  Eigen::MatrixXd m, v;
  void step(Eigen::MatrixXd& w, const Eigen::MatrixXd& g, const TrainConfig& cfg, int t) {
    if (m.size() == 0) {
      m = Eigen::MatrixXd::Zero(w.rows(), w.cols());
      v = Eigen::MatrixXd::Zero(w.rows(), w.cols());
    }
    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
    v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g.cwiseAbs2();
    const double c1 = 1.0 - std::pow(cfg.adam_beta1, t);
    const double c2 = 1.0 - std::pow(cfg.adam_beta2, t);
    w.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.adam_epsilon);
  }
};

TrainResult train_fixed(const LabeledDataset& ds, const TrainConfig& cfg) {
  const Context ctx = make_context(ds, cfg);
  TrainResult r;
  r.config = cfg;
  r.params = init_params(ds.features.cols(), ds.num_classes, cfg);
  Adam adam1, adam2;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const Forward f = forward(ctx, cfg, r.params);
    const double loss = mean_cross_entropy(f.logits, ds.labels, ds.train) + l2_term(cfg, r.params);
    if (!std::isfinite(loss)) throw DivergenceError(epoch, "training loss is " + std::to_string(loss));
    const auto pred = argmax_rows(f.logits);
    r.history.push_back({epoch, loss, mask_accuracy(pred, ds.labels, ds.train), mask_accuracy(pred, ds.labels, ds.val)});

    const ClassifierParams grad = gradient(ctx, cfg, r.params, f);
    if (cfg.optimizer == Optimizer::adam) {
      if (cfg.layers == 2) adam1.step(r.params.w1, grad.w1, cfg, epoch);
      adam2.step(r.params.w2, grad.w2, cfg, epoch);
    } else {
      if (cfg.layers == 2) r.params.w1 -= cfg.learning_rate * grad.w1;
      r.params.w2 -= cfg.learning_rate * grad.w2;
    }
  }
  const Forward f = forward(ctx, cfg, r.params);
  if (!f.logits.allFinite()) throw DivergenceError(cfg.epochs, "final logits are not finite");
  if (!ds.val.empty()) {
    r.val_accuracy = mask_accuracy(argmax_rows(f.logits), ds.labels, ds.val);
    r.val_loss = mean_cross_entropy(f.logits, ds.labels, ds.val);
  }
  return r;
}

}  // namespace

ClassifierParams init_params(Index features, int classes, const TrainConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, 10));
  auto glorot = [&](Index fan_in, Index fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    Eigen::MatrixXd w(fan_in, fan_out);
    for (Index i = 0; i < fan_in; ++i) {
      for (Index j = 0; j < fan_out; ++j) w(i, j) = u(rng);
    }
    return w;
  };
  ClassifierParams p;
  if (cfg.layers == 1) {
    p.w2 = glorot(features, classes);
  } else {
    p.w1 = glorot(features, cfg.hidden_units);
    p.w2 = glorot(cfg.hidden_units, classes);
  }
  return p;
}

TrainResult train(const LabeledDataset& ds, const TrainConfig& cfg) {
  check_config(ds, cfg);
  if (!is_edge_denoising(cfg.kernel.kind)) return train_fixed(ds, cfg);
  if (cfg.beta_grid.empty()) throw DomainError("train: empty beta grid for an edge-denoising kernel");

  std::optional<TrainResult> best;
  for (double beta : cfg.beta_grid) {
    TrainConfig c = cfg;
    c.kernel.cfg.beta = beta;
    TrainResult r = train_fixed(ds, c);
    r.selected_beta = beta;
    const bool better = !best || r.val_accuracy > best->val_accuracy ||
                        (r.val_accuracy == best->val_accuracy && r.val_loss < best->val_loss);
    if (better) best = std::move(r);
  }
  return std::move(*best);
}

double training_loss(const LabeledDataset& ds, const TrainConfig& cfg, const ClassifierParams& params) {
  const Context ctx = make_context(ds, cfg);
  const Forward f = forward(ctx, cfg, params);
  return mean_cross_entropy(f.logits, ds.labels, ds.train) + l2_term(cfg, params);
}

ClassifierParams loss_gradient(const LabeledDataset& ds, const TrainConfig& cfg, const ClassifierParams& params) {
  const Context ctx = make_context(ds, cfg);
  return gradient(ctx, cfg, params, forward(ctx, cfg, params));
}

GradientCheckResult gradient_check(const LabeledDataset& ds, const TrainConfig& cfg, const ClassifierParams& params,
                                   int n_probes, std::uint64_t seed) {
  if (n_probes < 10) throw DomainError("gradient_check: n_probes must be >= 10");
  check_config(ds, cfg);
  const Context ctx = make_context(ds, cfg);
  const Forward f0 = forward(ctx, cfg, params);
  const ClassifierParams grad = gradient(ctx, cfg, params, f0);
  auto loss_at = [&](const ClassifierParams& p) {
    return mean_cross_entropy(forward(ctx, cfg, p).logits, ds.labels, ds.train) + l2_term(cfg, p);
  };

  Rng rng(derive_seed(seed, 11));
  GradientCheckResult out;
  const Index n1 = cfg.layers == 2 ? params.w1.size() : 0;
  const Index total = n1 + params.w2.size();
  std::uniform_int_distribution<Index> pick(0, total - 1);
  const int max_attempts = 100 * n_probes;
  for (int attempt = 0; attempt < max_attempts && out.probes < n_probes; ++attempt) {
    const Index flat = pick(rng);
    const bool in_w1 = flat < n1;
    const Eigen::MatrixXd& w = in_w1 ? params.w1 : params.w2;
    const Index k = in_w1 ? flat : flat - n1;
    const Index r = k % w.rows();
    const Index c = k / w.rows();
    const double step = 1e-5 * std::max(1.0, std::abs(w(r, c)));

    if (in_w1) {
      // Moving W1(r, c) shifts column c of the preactivation by step * K(X)(:, r).
      bool crosses = false;
      for (Index i = 0; i < f0.z1.rows() && !crosses; ++i) {
        const double shift = std::abs(step * ctx.p1(i, r));
        crosses = shift > 0.0 && std::abs(f0.z1(i, c)) <= 2.0 * shift + 1e-12;
      }
      if (crosses) {
        ++out.rejected;
        continue;
      }
    }
    ClassifierParams plus = params, minus = params;
    (in_w1 ? plus.w1 : plus.w2)(r, c) += step;
    (in_w1 ? minus.w1 : minus.w2)(r, c) -= step;
    const double fd = (loss_at(plus) - loss_at(minus)) / (2.0 * step);
    const double analytic = (in_w1 ? grad.w1 : grad.w2)(r, c);
    const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-10});
    out.max_relative_error = std::max(out.max_relative_error, std::abs(fd - analytic) / denom);
    ++out.probes;
  }
  return out;
}

Eigen::MatrixXd predict_logits(const LabeledDataset& ds, const ClassifierParams& params, const TrainConfig& cfg) {
  const Context ctx = make_context(ds, cfg);
  return forward(ctx, cfg, params).logits;
}

EvalMetrics score_predictions(const std::vector<int>& predicted, const std::vector<int>& labels,
                              const std::vector<Index>& mask, int num_classes) {
  if (mask.empty()) throw DomainError("evaluate: empty mask");
  std::vector<double> tp(static_cast<std::size_t>(num_classes), 0.0);
  std::vector<double> fp(tp), fn(tp);
  for (Index i : mask) {
    const int p = predicted[static_cast<std::size_t>(i)];
    const int y = labels[static_cast<std::size_t>(i)];
    if (p == y) {
      tp[static_cast<std::size_t>(y)] += 1.0;
    } else {
      fp[static_cast<std::size_t>(p)] += 1.0;
      fn[static_cast<std::size_t>(y)] += 1.0;
    }
  }
  double stp = 0.0, sfp = 0.0, sfn = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    stp += tp[static_cast<std::size_t>(c)];
    sfp += fp[static_cast<std::size_t>(c)];
    sfn += fn[static_cast<std::size_t>(c)];
  }
  EvalMetrics m;
  m.accuracy = stp / static_cast<double>(mask.size());
  const double precision = stp / (stp + sfp);
  const double recall = stp / (stp + sfn);
  m.micro_f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return m;
}

EvalMetrics evaluate(const LabeledDataset& ds, const ClassifierParams& params, const TrainConfig& cfg, Split split) {
  const std::vector<Index>& mask = split == Split::train ? ds.train : split == Split::val ? ds.val : ds.test;
  if (mask.empty()) throw DomainError("evaluate: empty mask");
  return score_predictions(argmax_rows(predict_logits(ds, params, cfg)), ds.labels, mask, ds.num_classes);
}

std::vector<SweepRow> sweep(const DatasetFactory& make_dataset, const TrainConfig& base_cfg, SweepParam param,
                            const std::vector<double>& grid, const std::vector<std::uint64_t>& seeds) {
  if (grid.size() < 2) throw DomainError("sweep: need at least 2 grid points");
  if (seeds.size() < 3) throw DomainError("sweep: need at least 3 seeds");
  std::vector<SweepRow> rows(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) rows[g].value = grid[g];
  for (std::uint64_t seed : seeds) {
    const LabeledDataset ds = make_dataset(seed);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      TrainConfig cfg = base_cfg;
      cfg.seed = seed;
      if (param == SweepParam::alpha) {
        cfg.kernel.cfg.alpha = grid[g];
      } else {
        if (grid[g] < 0.0 || grid[g] != std::floor(grid[g])) throw DomainError("sweep: K values must be integers >= 0");
        cfg.kernel.cfg.k_order = static_cast<int>(grid[g]);
      }
      const TrainResult r = train(ds, cfg);
      rows[g].accuracies.push_back(evaluate(ds, r.params, r.config, Split::test).accuracy);
    }
  }
  for (auto& row : rows) {
    row.mean_accuracy = mean(row.accuracies);
    row.std_accuracy = stddev(row.accuracies);
  }
  return rows;
}

std::vector<SweepRow> sweep(const LabeledDataset& ds, const TrainConfig& base_cfg, SweepParam param,
                            const std::vector<double>& grid, const std::vector<std::uint64_t>& seeds) {
  return sweep([&](std::uint64_t) { return ds; }, base_cfg, param, grid, seeds);
}

void write_history_csv(std::ostream& out, const std::vector<EpochMetrics>& history) {
  const auto old = out.precision(17);
  out << "epoch,train_loss,train_acc,val_acc\n";
  for (const auto& h : history) out << h.epoch << ',' << h.train_loss << ',' << h.train_acc << ',' << h.val_acc << '\n';
  out.precision(old);
}

void write_train_report(std::ostream& out, const TrainResult& result, const EvalMetrics& test) {
  const TrainConfig& c = result.config;
  nlohmann::json j;
  j["config"] = {
      {"learning_rate", c.learning_rate},
      {"l2_weight", c.l2_weight},
      {"hidden_units", c.hidden_units},
      {"layers", c.layers},
      {"epochs", c.epochs},
      {"kernel", std::string(kernel_name(c.kernel.kind))},
      {"alpha", c.kernel.cfg.alpha},
      {"k", c.kernel.cfg.k_order},
      {"beta", c.kernel.cfg.beta},
      {"optimizer", c.optimizer == Optimizer::adam ? "adam" : "gd"},
  };
  j["seed"] = c.seed;
  if (result.selected_beta) j["selected_beta"] = *result.selected_beta;
  j["val_accuracy"] = result.val_accuracy;
  j["test_accuracy"] = test.accuracy;
  j["test_micro_f1"] = test.micro_f1;
  out << j.dump(2) << '\n';
}

}  // namespace gsd
