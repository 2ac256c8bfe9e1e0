#include "gsd/classify.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace gsd;

void BM_TrainEpochs(benchmark::State& state) {
  SbmSpec spec;
  spec.n_nodes = state.range(0);
  spec.p_in = 12.0 / static_cast<double>(spec.n_nodes);
  spec.p_out = 1.0 / static_cast<double>(spec.n_nodes);
  spec.feature_dim = 128;
  spec.split = {40, 100, 200};
  const LabeledDataset ds = gen_sbm(spec).dataset;
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.kernel.kind = static_cast<KernelKind>(state.range(1));
  for (auto _ : state) {
    TrainResult r = train(ds, cfg);
    benchmark::DoNotOptimize(r.val_accuracy);
  }
  state.SetLabel(std::string(kernel_name(cfg.kernel.kind)));
  state.SetItemsProcessed(state.iterations() * cfg.epochs);
}
BENCHMARK(BM_TrainEpochs)
    ->ArgsProduct({{500, 2000},
                   {static_cast<int>(KernelKind::identity), static_cast<int>(KernelKind::gcn),
                    static_cast<int>(KernelKind::gsdn_f)}})
    ->Unit(benchmark::kMillisecond);

}  // namespace
