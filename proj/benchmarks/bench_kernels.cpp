#include "gsd/datasets.hpp"
#include "gsd/filters.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace gsd;

SbmResult graph_of_size(Index n) {
  SbmSpec spec;
  spec.n_nodes = n;
  spec.n_communities = 4;
  // Expected degree near 13.5 at every size, so no node ends up isolated.
  spec.p_in = 48.0 / static_cast<double>(n);
  spec.p_out = 2.0 / static_cast<double>(n);
  spec.feature_dim = 64;
  spec.split = {0, 0, 0};
  spec.per_class_train = false;
  return gen_sbm(spec);
}

void BM_Spmm(benchmark::State& state) {
  const SbmResult s = graph_of_size(state.range(0));
  const NormalizedOps ops = normalized_ops(s.dataset.graph);
  for (auto _ : state) {
    FeatureMatrix y = spmm(ops.a_norm, s.dataset.features);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * ops.a_norm.nnz() * s.dataset.features.cols());
}
BENCHMARK(BM_Spmm)->RangeMultiplier(4)->Range(256, 16384);

void BM_Gsdnf(benchmark::State& state) {
  const SbmResult s = graph_of_size(state.range(0));
  const NormalizedOps ops = normalized_ops(s.dataset.graph);
  const DenoiseConfig cfg{0.6, static_cast<int>(state.range(1))};
  for (auto _ : state) {
    FeatureMatrix y = gsdnf_apply(ops, cfg, s.dataset.features);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_Gsdnf)->ArgsProduct({{1024, 8192}, {4, 16}});

void BM_Cheby(benchmark::State& state) {
  const SbmResult s = graph_of_size(state.range(0));
  const NormalizedOps ops = normalized_ops(s.dataset.graph);
  const ChebyCoeffs coeffs = gsdnf_as_chebyshev(0.6, static_cast<int>(state.range(1)));
  for (auto _ : state) {
    FeatureMatrix y = cheby_apply(ops, coeffs, s.dataset.features);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_Cheby)->ArgsProduct({{1024, 8192}, {4, 16}});

void BM_EdgeDenoise(benchmark::State& state) {
  const SbmResult s = graph_of_size(state.range(0));
  const NormalizedOps ops = normalized_ops(s.dataset.graph);
  DenoiseConfig cfg;
  cfg.beta = 1.0;
  cfg.sparse_edge_mask = state.range(1) != 0;
  for (auto _ : state) {
    DenoisedAdjacency d = gsdnef_denoise_adjacency(s.dataset.graph, ops, s.dataset.features, cfg);
    benchmark::DoNotOptimize(d.ops.a_norm.nnz());
  }
}
BENCHMARK(BM_EdgeDenoise)->ArgsProduct({{256, 1024}, {0, 1}});

}  // namespace
