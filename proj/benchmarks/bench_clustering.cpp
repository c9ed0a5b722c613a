#include <benchmark/benchmark.h>

#include "retsyn/hdbscan.hpp"
#include "retsyn/rng.hpp"
#include "retsyn/top_down.hpp"

namespace {

std::vector<std::vector<double>> blob_points(int clusters, int per_cluster, std::uint64_t seed) {
    retsyn::SplitMix rng(seed);
    std::vector<std::vector<double>> points;
    for (int c = 0; c < clusters; ++c) {
        for (int i = 0; i < per_cluster; ++i) {
            points.push_back({c * 10.0 + rng.unit(), (c % 3) * 10.0 + rng.unit()});
        }
    }
    return points;
}

void BM_Hdbscan(benchmark::State& state) {
    auto points = blob_points(static_cast<int>(state.range(0)), 25, 9);
    for (auto _ : state) {
        auto result = retsyn::hdbscan(points, 5);
        benchmark::DoNotOptimize(result);
    }
    state.SetComplexityN(static_cast<int64_t>(points.size()));
}
BENCHMARK(BM_Hdbscan)->Arg(4)->Arg(8)->Arg(16)->Complexity();

void BM_EncodeTime(benchmark::State& state) {
    std::int64_t d = 0;
    for (auto _ : state) {
        auto enc = retsyn::encode_time(d++);
        benchmark::DoNotOptimize(enc);
    }
}
BENCHMARK(BM_EncodeTime);

}  // namespace
