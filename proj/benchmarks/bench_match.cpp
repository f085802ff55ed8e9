#include <benchmark/benchmark.h>

#include <random>

#include "okp/enhance.hpp"
#include "okp/feature_map.hpp"
#include "okp/match.hpp"

namespace {

okp::FeatureMap random_map(std::size_t side, std::size_t channels, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    std::vector<float> data(side * side * channels);
    for (auto& x : data) x = dist(rng);
    return {side, side, channels, std::move(data), okp::GridGeometry::unit(side, side)};
}

// Similarity of two side x side maps with D_B = 17 * range(1) channels.
void BM_SimilarityMatrix(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    const auto d = static_cast<std::size_t>(state.range(1));
    const auto s = okp::enhance(random_map(side, d, 1), okp::EnhanceConfig{});
    const auto q = okp::enhance(random_map(side, d, 2), okp::EnhanceConfig{});
    for (auto _ : state) {
        auto m = okp::similarity_matrix(s, q);
        benchmark::DoNotOptimize(m.values().data());
    }
    const double macs = static_cast<double>(s.cell_count()) * q.cell_count() * s.channels();
    state.counters["MAC/s"] = benchmark::Counter(macs, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_SimilarityMatrix)->Args({16, 32})->Args({32, 64})->Args({64, 32})->Unit(benchmark::kMillisecond);

void BM_BestPrototypes(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    const auto m = random_map(side, 8, 3);
    const auto s = okp::similarity_matrix(m, m);
    for (auto _ : state) benchmark::DoNotOptimize(okp::best_prototypes(s));
}
BENCHMARK(BM_BestPrototypes)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Enhance(benchmark::State& state) {
    const auto m = random_map(64, static_cast<std::size_t>(state.range(0)), 4);
    for (auto _ : state) benchmark::DoNotOptimize(okp::enhance(m, okp::EnhanceConfig{}));
}
BENCHMARK(BM_Enhance)->Arg(32)->Arg(384)->Unit(benchmark::kMillisecond);

}  // namespace
