#include "cli.hpp"

#include "commands.hpp"

#include "gsd/diagnostics.hpp"
#include "gsd/error.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <ostream>

namespace gsd::cli {

namespace {

constexpr const char* kManifestName = "manifest.json";

std::string error_kind(const std::exception& e) {
  if (const auto* ge = dynamic_cast<const Error*>(&e)) return ge->kind();
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return "io_error";
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return "parse_error";
  return "internal";
}

json error_json(const std::string& command, const std::string& kind, const std::string& message) {
  return {{"status", "error"}, {"command", command}, {"error", {{"type", kind}, {"message", message}}}};
}

fs::path default_out_dir() {
  if (const char* env = std::getenv("GSDKIT_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return "gsdkit_out";
}

void add_common(CLI::App* sub, CommonOptions& common, double& beta) {
  auto* source = sub->add_option_group("source", "Input graph (default: --sbm with default parameters)");
  source->add_option("--dataset", common.dataset, "Raw citation dataset: PATH.content and PATH.cites");
  source->add_option("--sbm", common.sbm, "Stochastic block model, e.g. n=200,communities=2,p_in=0.05");
  source->require_option(0, 1);
  sub->add_option("--kernel", common.kernels, "Kernel name(s), comma separated")->delimiter(',');
  sub->add_option("--alpha", common.alpha, "GSDN smoothing/denoising balance");
  sub->add_option("--k", common.k, "Polynomial order (SGC power, GSDN and Chebyshev order)");
  sub->add_option("--beta", beta, "GSDN-EF edge-denoising strength");
  sub->add_option("--theta", common.theta, "Chebyshev coefficients (default: K+1 ones)")->delimiter(',');
  sub->add_option("--lambda-max", common.lambda_max, "Chebyshev spectrum bound");
  sub->add_option("--sigma,--noise-sigma", common.sigma, "Feature noise standard deviation(s)")->delimiter(',');
  sub->add_option("--edge-ratio", common.edge_ratio, "Edge noise ratio(s)")->delimiter(',');
  sub->add_option("--seeds,--seed", common.seeds, "Seeds: comma list and/or ranges like 0-19");
  sub->add_option("--out", common.out, "Output directory (default: $GSDKIT_OUT_DIR or ./gsdkit_out)");
}

void add_train(CLI::App* sub, ClassifyOptions& opts) {
  sub->add_option("--epochs", opts.epochs);
  sub->add_option("--lr", opts.learning_rate, "Learning rate");
  sub->add_option("--weight-decay", opts.weight_decay, "L2 penalty on the weights");
  sub->add_option("--hidden", opts.hidden, "Hidden units");
  sub->add_option("--layers", opts.layers, "1 or 2");
  sub->add_option("--optimizer", opts.optimizer, "adam | gd");
  sub->add_option("--beta-grid", opts.beta_grid, "GSDN-EF beta candidates (ignored with --beta)")->delimiter(',');
  sub->add_option("--split", opts.split, "train,val,test sizes for file datasets")->delimiter(',');
  sub->add_flag("--history", opts.history, "Write per-run training curves");
}

void write_manifest(const fs::path& dir, const json& manifest) {
  fs::create_directories(dir);
  const fs::path target = dir / kManifestName;
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp);
    f << manifest.dump(2) << '\n';
  }
  fs::rename(tmp, target);
}

std::vector<std::string> strip_out(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0) continue;
    kept.push_back(args[i]);
  }
  return kept;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph signal denoising experiments"};
  app.name("gsdkit");
  app.require_subcommand(1);
  app.set_version_flag("--version", GSDKIT_VERSION);

  CommonOptions common;
  double beta = 0.0;
  DenoiseOptions denoise_opts;
  ClassifyOptions classify_opts;
  BiasVarianceOptions bv_opts;
  SweepOptions sweep_opts;
  std::string replay_manifest;
  std::string replay_out;

  auto* denoise = app.add_subcommand("denoise", "Kernel output vs. ground truth on noisy features");
  add_common(denoise, common, beta);
  denoise->add_option("--reference", denoise_opts.reference,
                      "Distance of the output to: truth (pre-noise features) | clean-output (kernel on them)");
  denoise->add_flag("!--no-node-csv", denoise_opts.write_node_csv, "Skip the per-node CSVs");

  auto* classify = app.add_subcommand("classify", "Semi-supervised node classification");
  add_common(classify, common, beta);
  add_train(classify, classify_opts);

  auto* bias_variance = app.add_subcommand("bias-variance", "Monte-Carlo bias/variance of GSDN-F");
  add_common(bias_variance, common, beta);
  bias_variance->add_option("--graph", bv_opts.graph, "p2 | path:N | edge-list file (default: the dataset graph)");
  bias_variance->add_option("--alpha-grid", bv_opts.alpha_grid)->delimiter(',');
  bias_variance->add_option("--samples", bv_opts.samples, "Monte-Carlo samples");

  auto* sweep = app.add_subcommand("sweep", "Test accuracy over an alpha or K grid");
  add_common(sweep, common, beta);
  add_train(sweep, classify_opts);
  sweep->add_option("--grid-k", sweep_opts.grid_k)->delimiter(',');
  sweep->add_option("--grid-alpha", sweep_opts.grid_alpha)->delimiter(',');

  auto* gen_sbm = app.add_subcommand("gen-sbm", "Write a synthetic dataset with checksums");
  add_common(gen_sbm, common, beta);

  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("manifest", replay_manifest, "manifest.json of an earlier run")->required();
  replay->add_option("--out", replay_out, "Output directory for the re-run")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << error_json("", "usage", e.what()).dump() << '\n';
    return 2;
  }

  if (replay->parsed()) {
    try {
      std::ifstream f(replay_manifest);
      if (!f) throw ParseError(replay_manifest, 0, "cannot open manifest");
      const json m = json::parse(f);
      std::vector<std::string> again = strip_out(m.at("argv").get<std::vector<std::string>>());
      again.push_back("--out");
      again.push_back(replay_out);
      return run(again, out, err);
    } catch (const std::exception& e) {
      err << error_json("replay", error_kind(e), e.what()).dump() << '\n';
      return 1;
    }
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  if (sub->count("--beta") > 0) common.beta = beta;
  if (sub == bias_variance) {
    if (sub->count("--k") > 0) bv_opts.k = common.k;
    if (sub->count("--sigma") == 0) common.sigma = {0.1};
  }

  const fs::path out_dir = common.out.empty() ? default_out_dir() : fs::path(common.out);
  RunContext ctx(out_dir, out);
  std::vector<std::string> warnings;
  ScopedWarningSink sink([&](std::string_view w) { warnings.emplace_back(w); });

  json config = echo_common(common);
  if (sub == denoise) config["reference"] = denoise_opts.reference;
  if (sub == bias_variance) {
    config["k"] = bv_opts.k.value_or(50);
    config["graph"] = bv_opts.graph;
    config["alpha_grid"] = bv_opts.alpha_grid;
    config["samples"] = bv_opts.samples;
  }
  if (sub == sweep) {
    config["grid_k"] = sweep_opts.grid_k;
    config["grid_alpha"] = sweep_opts.grid_alpha;
  }
  json manifest{{"command", command}, {"argv", args}, {"config", config}, {"version", GSDKIT_VERSION}};

  const auto start = std::chrono::steady_clock::now();
  int code = 0;
  try {
    manifest["seeds"] = parse_seed_list(common.seeds);
    if (sub == denoise) {
      cmd_denoise(ctx, common, denoise_opts);
    } else if (sub == classify) {
      cmd_classify(ctx, common, classify_opts);
    } else if (sub == bias_variance) {
      cmd_bias_variance(ctx, common, bv_opts);
    } else if (sub == sweep) {
      cmd_sweep(ctx, common, classify_opts, sweep_opts);
    } else {
      cmd_gen_sbm(ctx, common);
    }
    manifest["status"] = "ok";
  } catch (const std::exception& e) {
    const json failure = error_json(command, error_kind(e), e.what());
    err << failure.dump() << '\n';
    manifest["status"] = "error";
    manifest["error"] = failure["error"];
    code = 1;
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  manifest["outputs"] = ctx.outputs();
  manifest["warnings"] = warnings;
  manifest["duration_seconds"] = elapsed.count();
  try {
    write_manifest(out_dir, manifest);
  } catch (const std::exception& e) {
    err << error_json(command, "io_error", std::string("manifest not written: ") + e.what()).dump() << '\n';
    code = 1;
  }
  if (code == 0) out << command << ": wrote " << ctx.outputs().size() << " files to " << out_dir.string() << '\n';
  return code;
}

}  // namespace gsd::cli
