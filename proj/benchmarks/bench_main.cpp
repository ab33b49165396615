#include <benchmark/benchmark.h>

#include "cvae/datagen.hpp"
#include "cvae/graph.hpp"
#include "cvae/model.hpp"
#include "cvae/numerics.hpp"
#include "cvae/rng.hpp"

namespace {

cvae::Graph random_connected_graph(std::size_t n, std::size_t extra_edges, std::uint64_t seed) {
    cvae::Rng rng(seed);
    std::vector<cvae::Edge> edges;
    for (std::size_t v = 1; v < n; ++v) edges.emplace_back(rng.below(v), v);
    std::size_t added = 0;
    while (added < extra_edges) {
        std::size_t i = rng.below(n), j = rng.below(n);
        if (i == j) continue;
        cvae::Edge e{std::min(i, j), std::max(i, j)};
        if (std::find(edges.begin(), edges.end(), e) != edges.end()) continue;
        edges.push_back(e);
        ++added;
    }
    return cvae::Graph(n, edges);
}

void BM_MasEdgeWeights(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    cvae::Graph g = random_connected_graph(n, 2 * n, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cvae::mas_edge_weights(g));
    }
}
BENCHMARK(BM_MasEdgeWeights)->Arg(32)->Arg(64)->Arg(128);

void BM_SymEigendecomp(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    cvae::Rng rng(11);
    cvae::SymMatrix a(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) a.set(i, j, rng.normal());
    for (auto _ : state) {
        benchmark::DoNotOptimize(cvae::sym_eigendecomp(a));
    }
}
BENCHMARK(BM_SymEigendecomp)->Arg(32)->Arg(64)->Arg(128);

void BM_TrainStep(benchmark::State& state) {
    const std::size_t n = 64, D = 32, d = 8;
    cvae::SyntheticDataset ds = cvae::gen_tree_dataset(n, D, d, 0.9, 3);
    cvae::Rng init = cvae::Rng::substream(3, "init");
    cvae::CvaeModel model = cvae::make_model(cvae::Variant::CvaeCorr, cvae::Likelihood::Bernoulli,
                                             D, d, 32, 0.9, init);
    cvae::EdgeWeightMap weights = cvae::mas_edge_weights(ds.graph);
    cvae::Rng batch_rng = cvae::Rng::substream(3, "batch");
    cvae::Rng noise_rng = cvae::Rng::substream(3, "noise");
    for (auto _ : state) {
        cvae::Batch batch = cvae::sample_batch(model, ds.graph, 16, 32, batch_rng, noise_rng);
        cvae::ModelGrads grads(model);
        benchmark::DoNotOptimize(
            cvae::batch_objective(model, ds.x, ds.graph, weights, 1.0, batch, &grads));
    }
}
BENCHMARK(BM_TrainStep);

}  // namespace

BENCHMARK_MAIN();
