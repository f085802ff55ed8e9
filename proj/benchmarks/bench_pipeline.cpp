#include <benchmark/benchmark.h>

#include "okp/pipeline.hpp"
#include "okp/synth.hpp"

namespace {

// learn + extract on a synthetic 64 x 64 x 32 pair.
void BM_SynthExtract(benchmark::State& state) {
    okp::SynthParams p;
    p.instances = static_cast<int>(state.range(0));
    p.noise = 0.1;
    const auto fx = okp::generate_fixture(p);
    const auto store = okp::learn_prototypes(fx.support, fx.annotation);
    for (auto _ : state) {
        auto r = okp::extract(store, fx.query, okp::ExtractConfig{}, "query");
        benchmark::DoNotOptimize(r.instances.data());
    }
}
BENCHMARK(BM_SynthExtract)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_Learn(benchmark::State& state) {
    okp::SynthParams p;
    p.keypoints = static_cast<int>(state.range(0));
    const auto fx = okp::generate_fixture(p);
    for (auto _ : state) benchmark::DoNotOptimize(okp::learn_prototypes(fx.support, fx.annotation));
}
BENCHMARK(BM_Learn)->Arg(4)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
