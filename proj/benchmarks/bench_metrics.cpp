#include <benchmark/benchmark.h>

#include "retsyn/evalbench.hpp"
#include "retsyn/rng.hpp"
#include "retsyn/sha256.hpp"

namespace {

void BM_NdcgAtK(benchmark::State& state) {
    retsyn::SplitMix rng(21);
    retsyn::RunResult run;
    retsyn::Qrels qrels;
    for (int q = 0; q < static_cast<int>(state.range(0)); ++q) {
        std::string qid = "q" + std::to_string(q);
        std::vector<retsyn::RankedHit> hits;
        for (int d = 0; d < 100; ++d) {
            hits.push_back({"p" + std::to_string(d), rng.unit()});
        }
        std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
            return a.score > b.score;
        });
        run.ranked[qid] = std::move(hits);
        for (int d = 0; d < 100; ++d) {
            if (rng.bounded(10) == 0) qrels[qid].insert("p" + std::to_string(d));
        }
    }
    for (auto _ : state) {
        double value = retsyn::ndcg_at_k(run, qrels, 10);
        benchmark::DoNotOptimize(value);
    }
}
BENCHMARK(BM_NdcgAtK)->Arg(100)->Arg(1000);

void BM_Sha256(benchmark::State& state) {
    std::string data(static_cast<std::size_t>(state.range(0)), 'r');
    for (auto _ : state) {
        auto digest = retsyn::sha256_hex(data);
        benchmark::DoNotOptimize(digest);
    }
    state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sha256)->Arg(1 << 12)->Arg(1 << 20);

}  // namespace
