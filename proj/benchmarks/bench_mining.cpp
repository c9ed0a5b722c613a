#include <benchmark/benchmark.h>

#include "retsyn/gateway.hpp"
#include "retsyn/relevance.hpp"
#include "retsyn/rng.hpp"
#include "retsyn/utf8.hpp"

namespace {

std::vector<retsyn::Query> sentence_fixture(int passages, int per_passage, std::uint64_t seed) {
    retsyn::SplitMix rng(seed);
    std::vector<retsyn::Query> queries;
    for (int p = 0; p < passages; ++p) {
        for (int s = 0; s < per_passage; ++s) {
            retsyn::Query q;
            q.passage_id = "d0-p" + std::to_string(p);
            q.query_id = q.passage_id + "-s" + std::to_string(s);
            q.level = retsyn::QueryLevel::Sentence;
            q.doc_id = "d0";
            for (std::size_t c = 0; c < 12; ++c) {
                q.text += retsyn::encode_utf8(static_cast<char32_t>(0x4E00 + rng.bounded(128)));
            }
            queries.push_back(std::move(q));
        }
    }
    return queries;
}

void BM_MineSentenceLevel(benchmark::State& state) {
    auto queries = sentence_fixture(static_cast<int>(state.range(0)), 4, 3);
    auto spaces = retsyn::build_sentence_spaces(queries);
    retsyn::BigramDiceReranker reranker;
    retsyn::MiningConfig config;
    for (auto _ : state) {
        auto out = retsyn::mine_sentence_level(spaces, config, reranker);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_MineSentenceLevel)->Arg(4)->Arg(8)->Arg(16);

void BM_RerankPair(benchmark::State& state) {
    retsyn::BigramDiceReranker reranker;
    std::string a = "钢铁行业景气度与需求走势分析";
    std::string b = "钢铁板块需求走势与库存观察";
    for (auto _ : state) {
        auto score = reranker.rerank(a, b);
        benchmark::DoNotOptimize(score);
    }
}
BENCHMARK(BM_RerankPair);

}  // namespace
