#include <benchmark/benchmark.h>

#include <memory>

#include "topocover/cover.hpp"
#include "topocover/custom_net.hpp"
#include "topocover/experiments.hpp"
#include "topocover/homology.hpp"
#include "topocover/kdtree.hpp"
#include "topocover/mathdice.hpp"
#include "topocover/neuralnet.hpp"

using namespace topocover;

namespace {

std::shared_ptr<const LabeledPointCloud> dice(const char* name) {
    return std::make_shared<const LabeledPointCloud>(
        mathdice::enumerate_dataset(mathdice::DiceConfig::named_preset(name)).cloud);
}

void BM_EnumerateSix(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(mathdice::enumerate_dataset(mathdice::DiceConfig::preset(6)));
}
BENCHMARK(BM_EnumerateSix)->Unit(benchmark::kMillisecond);

void BM_ClassCover(benchmark::State& state) {
    const auto cloud = dice(state.range(0) == 4 ? "4" : "5-mixed");
    for (auto _ : state) benchmark::DoNotOptimize(build_class_cover(cloud, 1));
}
BENCHMARK(BM_ClassCover)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_GaussianCover(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto cloud = std::make_shared<const LabeledPointCloud>(experiments::gaussian_blobs(27, n, 6.0, 1));
    for (auto _ : state) benchmark::DoNotOptimize(build_class_cover(cloud, 1));
}
BENCHMARK(BM_GaussianCover)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_KdTreeNearest(benchmark::State& state) {
    const auto cloud = experiments::gaussian_blobs(static_cast<std::size_t>(state.range(0)), 20000, 0.0, 3);
    std::vector<std::size_t> ids(cloud.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    const KdTree tree(cloud.coords(), cloud.dimension(), ids);
    const auto queries = experiments::gaussian_blobs(cloud.dimension(), 500, 0.0, 4);
    for (auto _ : state) {
        for (std::size_t q = 0; q < queries.size(); ++q) benchmark::DoNotOptimize(tree.nearest(queries.point(q)));
    }
}
BENCHMARK(BM_KdTreeNearest)->Arg(3)->Arg(6)->Arg(27)->Unit(benchmark::kMillisecond);

void BM_CliqueAndBetti(benchmark::State& state) {
    const auto cloud = dice(state.range(0) == 4 ? "4" : "5-mixed");
    const auto cover = build_class_cover(cloud, 1);
    const auto skeleton = build_one_skeleton(cover);
    for (auto _ : state) {
        const auto complex = clique_complex(skeleton, 5);
        benchmark::DoNotOptimize(betti_numbers(complex, 4));
    }
}
BENCHMARK(BM_CliqueAndBetti)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
    const auto cloud = dice("5-mixed");
    nn::TrainConfig cfg;
    cfg.optimizer = nn::Optimizer::Adam;
    cfg.learning_rate = 1e-3;
    cfg.epochs = 1;
    for (auto _ : state) {
        nn::MlpModel model(cloud->dimension(), {256, 16, 2}, nn::Head::Softmax2, 1);
        nn::fit(model, *cloud, cfg, 1);
        benchmark::DoNotOptimize(model);
    }
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_ExactCustomNet(benchmark::State& state) {
    const auto cloud = dice("6");
    const auto net = nn::build_custom_net(nn::CustomNetSpec{});
    for (auto _ : state) benchmark::DoNotOptimize(net.accuracy(*cloud));
}
BENCHMARK(BM_ExactCustomNet)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
