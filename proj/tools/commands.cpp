#include "commands.hpp"

#include "gsd/bias_variance.hpp"
#include "gsd/denoise.hpp"
#include "gsd/error.hpp"
#include "gsd/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace gsd::cli {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

std::ostream& csv17(std::ostream& out) {
  out.precision(17);
  return out;
}

double sample_std(const std::vector<double>& v) { return stddev(v); }

std::vector<KernelSpec> kernel_specs(const CommonOptions& common) {
  if (common.kernels.empty()) throw DomainError("no kernel given");
  std::vector<KernelSpec> specs;
  for (const auto& name : common.kernels) specs.push_back(kernel_spec(common, name));
  return specs;
}

void check_nonnegative(const std::vector<double>& values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError(std::string(what) + " must be finite and >= 0, got " + fmt(v));
  }
}

SplitSizes split_sizes(const std::vector<Index>& split) {
  if (split.size() != 3) throw DomainError("--split takes exactly three sizes: train,val,test");
  return {split[0], split[1], split[2]};
}

TrainConfig train_config(const CommonOptions& common, const ClassifyOptions& opts) {
  TrainConfig cfg;
  cfg.learning_rate = opts.learning_rate;
  cfg.l2_weight = opts.weight_decay;
  cfg.hidden_units = opts.hidden;
  cfg.layers = opts.layers;
  cfg.epochs = opts.epochs;
  if (opts.optimizer == "adam") {
    cfg.optimizer = Optimizer::adam;
  } else if (opts.optimizer == "gd") {
    cfg.optimizer = Optimizer::gradient_descent;
  } else {
    throw DomainError("unknown optimizer '" + opts.optimizer + "' (adam | gd)");
  }
  cfg.beta_grid = common.beta ? std::vector<double>{*common.beta} : opts.beta_grid;
  return cfg;
}

json train_echo(const TrainConfig& cfg, const ClassifyOptions& opts) {
  return {{"epochs", cfg.epochs},
          {"learning_rate", cfg.learning_rate},
          {"weight_decay", cfg.l2_weight},
          {"hidden", cfg.hidden_units},
          {"layers", cfg.layers},
          {"optimizer", opts.optimizer},
          {"beta_grid", cfg.beta_grid},
          {"split", opts.split}};
}

LabeledDataset add_noise(LabeledDataset ds, double sigma, double edge_ratio, std::uint64_t seed) {
  if (sigma > 0.0) ds.features = inject_feature_noise(ds.features, {0.0, sigma, 0.0, seed});
  if (edge_ratio > 0.0) ds.graph = inject_edge_noise(ds.graph, {0.0, 0.0, edge_ratio, seed}).graph;
  return ds;
}

Graph named_graph(const std::string& name) {
  if (name == "p2") return build_graph(2, std::vector<Edge>{{0, 1, 1.0}});
  if (name.rfind("path:", 0) == 0) {
    Index n = 0;
    const char* first = name.data() + 5;
    const char* last = name.data() + name.size();
    const auto [ptr, ec] = std::from_chars(first, last, n);
    if (ec != std::errc() || ptr != last || n < 2) throw DomainError("bad graph '" + name + "' (path:N with N >= 2)");
    std::vector<Edge> edges;
    for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
    return build_graph(n, edges);
  }
  return read_edge_list(fs::path(name));
}

}  // namespace

void RunContext::write(const fs::path& relative, const std::function<void(std::ostream&)>& body) {
  const fs::path target = out_dir_ / relative;
  fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw Error("cannot write " + tmp.string());
    body(f);
    if (!f) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
  record(relative);
}

void RunContext::record(const fs::path& relative) { outputs_.push_back(relative.generic_string()); }

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
      throw DomainError("bad seed '" + std::string(s) + "' in '" + text + "'");
    return v;
  };
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(number(item));
      continue;
    }
    const std::uint64_t lo = number(std::string_view(item).substr(0, dash));
    const std::uint64_t hi = number(std::string_view(item).substr(dash + 1));
    if (hi < lo) throw DomainError("empty seed range '" + item + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw DomainError("no seeds given");
  return seeds;
}

LoadedData load_data(const CommonOptions& common, std::uint64_t seed, const std::optional<SplitSizes>& file_split) {
  if (!common.dataset.empty() && !common.sbm.empty()) throw DomainError("--dataset and --sbm are exclusive");
  LoadedData data;
  if (common.dataset.empty()) {
    SbmSpec spec = parse_sbm_spec(common.sbm);
    spec.seed = seed;
    SbmResult sbm = gen_sbm(spec);
    data.dataset = std::move(sbm.dataset);
    data.truth = std::move(sbm.ground_truth);
    data.synthetic = true;
    return data;
  }
  fs::path content(common.dataset);
  fs::path cites = content;
  if (content.extension() == ".content") {
    cites.replace_extension(".cites");
  } else {
    content += ".content";
    cites += ".cites";
  }
  CitationLoad load = load_citation_raw(content, cites);
  data.dataset = std::move(load.dataset);
  data.dataset.features = normalize_features(data.dataset.features).features;
  data.truth = data.dataset.features;
  if (file_split) data.dataset = make_split(std::move(data.dataset), *file_split, true, seed);
  return data;
}

KernelSpec kernel_spec(const CommonOptions& common, const std::string& name) {
  KernelSpec spec;
  spec.kind = parse_kernel(name);
  spec.cfg.alpha = common.alpha;
  spec.cfg.k_order = common.k;
  spec.cfg.beta = common.beta.value_or(0.0);
  if (common.k < 0) throw DomainError("--k must be >= 0");
  if (spec.kind == KernelKind::cheby) {
    spec.cheby.theta = common.theta.empty() ? std::vector<double>(static_cast<std::size_t>(common.k) + 1, 1.0)
                                            : common.theta;
    spec.cheby.lambda_max = common.lambda_max;
  }
  return spec;
}

json echo_common(const CommonOptions& common) {
  json j{{"kernels", common.kernels}, {"alpha", common.alpha},         {"k", common.k},
         {"sigma", common.sigma},     {"edge_ratio", common.edge_ratio}, {"seeds", common.seeds}};
  if (!common.dataset.empty()) {
    j["dataset"] = common.dataset;
  } else {
    j["sbm"] = common.sbm;
  }
  j["beta"] = common.beta ? json(*common.beta) : json(nullptr);
  if (!common.theta.empty()) j["theta"] = common.theta;
  j["lambda_max"] = common.lambda_max;
  return j;
}

void cmd_denoise(RunContext& ctx, const CommonOptions& common, const DenoiseOptions& opts) {
  const bool clean_reference = opts.reference == "clean-output";
  if (!clean_reference && opts.reference != "truth")
    throw DomainError("unknown reference '" + opts.reference + "' (truth | clean-output)");
  check_nonnegative(common.sigma, "--sigma");
  const auto seeds = parse_seed_list(common.seeds);
  const auto specs = kernel_specs(common);

  struct Cell {
    std::vector<double> before, after, tv_before, tv_after;
  };
  std::map<std::pair<std::size_t, std::size_t>, Cell> cells;
  std::ostringstream table;
  csv17(table) << "kernel,sigma,seed,mean_noise_before,mean_noise_after,tv_before,tv_after\n";

  for (const auto seed : seeds) {
    const LoadedData data = load_data(common, seed, std::nullopt);
    const Graph& g = data.dataset.graph;
    const NormalizedOps ops = normalized_ops(g);
    for (std::size_t si = 0; si < common.sigma.size(); ++si) {
      const double sigma = common.sigma[si];
      const FeatureMatrix noisy = inject_feature_noise(data.truth, {0.0, sigma, 0.0, seed});
      for (std::size_t ki = 0; ki < specs.size(); ++ki) {
        const Propagator prop = Propagator::prepare(specs[ki], g, ops, noisy);
        const FeatureMatrix out = prop.apply(noisy);
        DenoiseReport report = denoise_report(ops, out, data.truth, noisy);
        if (clean_reference) {
          const FeatureMatrix ref = prop.apply(data.truth);
          double total = 0.0;
          for (Index i = 0; i < out.rows(); ++i) {
            report.noise_after[static_cast<std::size_t>(i)] = (out.row(i) - ref.row(i)).norm();
            total += report.noise_after[static_cast<std::size_t>(i)];
          }
          report.mean_noise_after = total / static_cast<double>(out.rows());
        }
        const std::string kname(kernel_name(specs[ki].kind));
        if (opts.write_node_csv) {
          ctx.write(fs::path("denoise") / (kname + "_sigma" + fmt(sigma) + "_seed" + std::to_string(seed) + ".csv"),
                    [&](std::ostream& f) { write_report_csv(f, report); });
        }
        table << kname << ',' << sigma << ',' << seed << ',' << report.mean_noise_before << ','
              << report.mean_noise_after << ',' << report.tv_before << ',' << report.tv_after << '\n';
        Cell& c = cells[{ki, si}];
        c.before.push_back(report.mean_noise_before);
        c.after.push_back(report.mean_noise_after);
        c.tv_before.push_back(report.tv_before);
        c.tv_after.push_back(report.tv_after);
      }
    }
    ctx.log() << "denoise: seed " << seed << " done\n";
  }

  json aggregate = json::array();
  for (const auto& [key, c] : cells) {
    std::size_t reduced = 0;
    for (std::size_t i = 0; i < c.before.size(); ++i) reduced += c.after[i] < c.before[i] ? 1 : 0;
    aggregate.push_back({{"kernel", std::string(kernel_name(specs[key.first].kind))},
                         {"sigma", common.sigma[key.second]},
                         {"runs", c.before.size()},
                         {"mean_noise_before", mean(c.before)},
                         {"mean_noise_after", mean(c.after)},
                         {"tv_before", mean(c.tv_before)},
                         {"tv_after", mean(c.tv_after)},
                         {"reduced_in", reduced}});
  }
  ctx.write("summary.csv", [&](std::ostream& f) { f << table.str(); });
  ctx.summary() = {{"reference", opts.reference}, {"aggregate", aggregate}};
  ctx.write("summary.json", [&](std::ostream& f) { f << ctx.summary().dump(2) << '\n'; });
}

void cmd_classify(RunContext& ctx, const CommonOptions& common, const ClassifyOptions& opts) {
  check_nonnegative(common.sigma, "--sigma");
  check_nonnegative(common.edge_ratio, "--edge-ratio");
  const auto seeds = parse_seed_list(common.seeds);
  const auto specs = kernel_specs(common);
  const TrainConfig base = train_config(common, opts);
  const SplitSizes split = split_sizes(opts.split);

  std::ostringstream runs;
  csv17(runs) << "kernel,sigma,edge_ratio,seed,selected_beta,val_accuracy,test_accuracy,test_micro_f1\n";
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::vector<double>> acc;

  for (const auto seed : seeds) {
    const LoadedData data = load_data(common, seed, split);
    for (std::size_t si = 0; si < common.sigma.size(); ++si) {
      for (std::size_t ri = 0; ri < common.edge_ratio.size(); ++ri) {
        const LabeledDataset ds = add_noise(data.dataset, common.sigma[si], common.edge_ratio[ri], seed);
        for (std::size_t ki = 0; ki < specs.size(); ++ki) {
          TrainConfig cfg = base;
          cfg.kernel = specs[ki];
          cfg.seed = seed;
          const TrainResult result = train(ds, cfg);
          const EvalMetrics test = evaluate(ds, result.params, result.config, Split::test);
          const std::string kname(kernel_name(specs[ki].kind));
          runs << kname << ',' << common.sigma[si] << ',' << common.edge_ratio[ri] << ',' << seed << ',';
          if (result.selected_beta) runs << *result.selected_beta;
          runs << ',' << result.val_accuracy << ',' << test.accuracy << ',' << test.micro_f1 << '\n';
          acc[{ki, si, ri}].push_back(test.accuracy);
          if (opts.history) {
            const std::string stem = kname + "_sigma" + fmt(common.sigma[si]) + "_r" + fmt(common.edge_ratio[ri]) +
                                     "_seed" + std::to_string(seed);
            ctx.write(fs::path("history") / (stem + ".csv"),
                      [&](std::ostream& f) { write_history_csv(f, result.history); });
          }
        }
      }
    }
    ctx.log() << "classify: seed " << seed << " done\n";
  }

  std::ostringstream table;
  csv17(table) << "kernel,sigma,edge_ratio,runs,mean_accuracy,std_accuracy\n";
  json rows = json::array();
  for (const auto& [key, values] : acc) {
    const auto [ki, si, ri] = key;
    const std::string kname(kernel_name(specs[ki].kind));
    table << kname << ',' << common.sigma[si] << ',' << common.edge_ratio[ri] << ',' << values.size() << ','
          << mean(values) << ',' << sample_std(values) << '\n';
    rows.push_back({{"kernel", kname},
                    {"sigma", common.sigma[si]},
                    {"edge_ratio", common.edge_ratio[ri]},
                    {"runs", values.size()},
                    {"mean_accuracy", mean(values)},
                    {"std_accuracy", sample_std(values)}});
  }
  ctx.write("runs.csv", [&](std::ostream& f) { f << runs.str(); });
  ctx.write("summary.csv", [&](std::ostream& f) { f << table.str(); });
  ctx.summary() = {{"train", train_echo(base, opts)}, {"aggregate", rows}};
  ctx.write("summary.json", [&](std::ostream& f) { f << ctx.summary().dump(2) << '\n'; });
}

void cmd_bias_variance(RunContext& ctx, const CommonOptions& common, const BiasVarianceOptions& opts) {
  check_nonnegative(common.sigma, "--sigma");
  const auto seeds = parse_seed_list(common.seeds);
  BiasVarOptions bv;
  bv.k_order = opts.k.value_or(50);
  bv.n_samples = opts.samples;

  json verdicts = json::array();
  for (const auto seed : seeds) {
    const Graph g = opts.graph.empty() ? load_data(common, seed, std::nullopt).dataset.graph : named_graph(opts.graph);
    const FeatureMatrix x_hat = smooth_plus_bump(g);
    bv.seed = seed;
    for (const double sigma : common.sigma) {
      const BiasVarReport report = mc_bias_variance(g, x_hat, sigma, opts.alpha_grid, bv);
      const std::string name = "bias_variance_sigma" + fmt(sigma) + "_seed" + std::to_string(seed) + ".csv";
      ctx.write(name, [&](std::ostream& f) { write_bias_variance_csv(f, report); });
      json v{{"file", name}, {"sigma", sigma}, {"seed", seed}};
      try {
        const MonotonicityVerdict m = prop3_monotonicity_check(report);
        v["variance_decreasing"] = m.variance_decreasing;
        v["bias_increasing"] = m.bias_increasing;
        v["degenerate"] = m.degenerate;
      } catch (const DomainError& e) {
        v["monotonicity"] = std::string("not checked: ") + e.what();
      }
      verdicts.push_back(std::move(v));
    }
  }
  ctx.summary() = {{"k", bv.k_order}, {"samples", bv.n_samples}, {"alpha_grid", opts.alpha_grid}, {"runs", verdicts}};
  ctx.write("summary.json", [&](std::ostream& f) { f << ctx.summary().dump(2) << '\n'; });
}

void cmd_sweep(RunContext& ctx, const CommonOptions& common, const ClassifyOptions& train_opts,
               const SweepOptions& opts) {
  if (opts.grid_k.empty() == opts.grid_alpha.empty()) throw DomainError("give exactly one of --grid-k and --grid-alpha");
  if (common.kernels.size() != 1) throw DomainError("sweep takes a single --kernel");
  if (common.sigma.size() != 1 || common.edge_ratio.size() != 1)
    throw DomainError("sweep takes a single --sigma and --edge-ratio");
  check_nonnegative(common.sigma, "--sigma");
  check_nonnegative(common.edge_ratio, "--edge-ratio");
  const SweepParam param = opts.grid_k.empty() ? SweepParam::alpha : SweepParam::k_order;
  const auto& grid = opts.grid_k.empty() ? opts.grid_alpha : opts.grid_k;
  const auto seeds = parse_seed_list(common.seeds);
  TrainConfig cfg = train_config(common, train_opts);
  cfg.kernel = kernel_spec(common, common.kernels.front());
  const SplitSizes split = split_sizes(train_opts.split);

  const DatasetFactory factory = [&](std::uint64_t seed) {
    return add_noise(load_data(common, seed, split).dataset, common.sigma.front(), common.edge_ratio.front(), seed);
  };
  const std::vector<SweepRow> rows = sweep(factory, cfg, param, grid, seeds);

  const char* pname = param == SweepParam::alpha ? "alpha" : "k";
  std::ostringstream table, per_seed;
  csv17(table) << "param,value,mean_accuracy,std_accuracy\n";
  csv17(per_seed) << "value,seed,accuracy\n";
  std::vector<double> xs, ys;
  for (const auto& row : rows) {
    table << pname << ',' << row.value << ',' << row.mean_accuracy << ',' << row.std_accuracy << '\n';
    for (std::size_t s = 0; s < row.accuracies.size(); ++s) {
      per_seed << row.value << ',' << seeds[s] << ',' << row.accuracies[s] << '\n';
      xs.push_back(row.value);
      ys.push_back(row.accuracies[s]);
    }
  }
  const auto best = std::max_element(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.mean_accuracy < b.mean_accuracy;
  });
  ctx.write("sweep.csv", [&](std::ostream& f) { f << table.str(); });
  ctx.write("sweep_runs.csv", [&](std::ostream& f) { f << per_seed.str(); });
  json summary{{"param", pname}, {"grid", grid}, {"best_value", best->value}, {"train", train_echo(cfg, train_opts)}};
  try {
    const TrendTest t = spearman_trend_test(xs, ys);
    summary["trend"] = {{"rho", t.rho}, {"p_value", t.p_value}, {"n", t.n}};
  } catch (const Error& e) {
    summary["trend"] = std::string("not computed: ") + e.what();
  }
  ctx.summary() = std::move(summary);
  ctx.write("summary.json", [&](std::ostream& f) { f << ctx.summary().dump(2) << '\n'; });
}

void cmd_gen_sbm(RunContext& ctx, const CommonOptions& common) {
  const auto seeds = parse_seed_list(common.seeds);
  json files = json::array();
  for (const auto seed : seeds) {
    SbmSpec spec = parse_sbm_spec(common.sbm);
    spec.seed = seed;
    const SbmResult sbm = gen_sbm(spec);
    const std::string stem = "sbm_seed" + std::to_string(seed);
    fs::create_directories(ctx.out_dir());
    const fs::path content = ctx.out_dir() / (stem + ".content");
    const fs::path cites = ctx.out_dir() / (stem + ".cites");
    write_citation_raw(sbm.dataset, content, cites);
    ctx.record(content.filename());
    ctx.record(cites.filename());

    ctx.write(stem + ".truth.csv", [&](std::ostream& f) {
      csv17(f) << "node_id";
      for (Index c = 0; c < sbm.ground_truth.cols(); ++c) f << ",f" << c;
      f << '\n';
      for (Index i = 0; i < sbm.ground_truth.rows(); ++i) {
        f << i;
        for (Index c = 0; c < sbm.ground_truth.cols(); ++c) f << ',' << sbm.ground_truth(i, c);
        f << '\n';
      }
    });
    ctx.write(stem + ".split.csv", [&](std::ostream& f) {
      std::vector<std::string> set(static_cast<std::size_t>(sbm.dataset.graph.num_nodes()), "none");
      for (const Index i : sbm.dataset.train) set[static_cast<std::size_t>(i)] = "train";
      for (const Index i : sbm.dataset.val) set[static_cast<std::size_t>(i)] = "val";
      for (const Index i : sbm.dataset.test) set[static_cast<std::size_t>(i)] = "test";
      f << "node_id,set\n";
      for (std::size_t i = 0; i < set.size(); ++i) f << i << ',' << set[i] << '\n';
    });
    const std::vector<fs::path> members{content, cites, ctx.out_dir() / (stem + ".truth.csv"),
                                        ctx.out_dir() / (stem + ".split.csv")};
    ctx.write(stem + ".manifest.json", [&](std::ostream& f) { write_dataset_manifest(f, sbm.dataset, members); });
    files.push_back(stem + ".manifest.json");
  }
  ctx.summary() = {{"datasets", files}};
}

}  // namespace gsd::cli
