#include <benchmark/benchmark.h>

#include "retsyn/corpus.hpp"
#include "support/synthetic.hpp"

namespace {

void BM_SegmentPassages(benchmark::State& state) {
    auto docs = retsyn::testsupport::make_random_documents(
        static_cast<std::size_t>(state.range(0)), 42);
    std::size_t bytes = 0;
    for (const auto& doc : docs) bytes += doc.text.size();
    for (auto _ : state) {
        for (const auto& doc : docs) {
            auto passages = retsyn::segment_passages(doc);
            benchmark::DoNotOptimize(passages);
        }
    }
    state.SetBytesProcessed(static_cast<int64_t>(bytes) * state.iterations());
}
BENCHMARK(BM_SegmentPassages)->Arg(50)->Arg(200);

void BM_SegmentSentences(benchmark::State& state) {
    auto docs = retsyn::testsupport::make_random_documents(100, 43);
    std::vector<retsyn::PassageChunk> passages;
    for (const auto& doc : docs) {
        for (auto& p : retsyn::segment_passages(doc)) passages.push_back(std::move(p));
    }
    for (auto _ : state) {
        for (const auto& p : passages) {
            auto chunks = retsyn::segment_sentences(p);
            benchmark::DoNotOptimize(chunks);
        }
    }
}
BENCHMARK(BM_SegmentSentences);

void BM_CleanPassages(benchmark::State& state) {
    auto docs = retsyn::testsupport::make_pipeline_corpus({4, 7, 2, 44});
    std::vector<retsyn::PassageChunk> passages;
    for (const auto& doc : docs) {
        for (auto& p : retsyn::segment_passages(doc)) passages.push_back(std::move(p));
    }
    auto rules = retsyn::default_clean_rules();
    retsyn::PassthroughScorer scorer;
    for (auto _ : state) {
        auto outcome = retsyn::clean_passages(passages, rules, &scorer);
        benchmark::DoNotOptimize(outcome);
    }
}
BENCHMARK(BM_CleanPassages);

}  // namespace
