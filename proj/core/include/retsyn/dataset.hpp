#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "retsyn/corpus.hpp"
#include "retsyn/relevance.hpp"

namespace retsyn {

struct SubsetBundle {
    std::string name;  // sentence | sentence-mined | passage | passage-mined | topic | all
    std::vector<Query> queries;
    std::vector<RelevanceLabel> qrels;
};

struct StatsRow {
    std::string subset;
    double avg_query_len = 0.0;      // code points
    double avg_doc_len = 0.0;        // over distinct passages referenced by qrels
    double avg_rel_per_query = 0.0;  // |qrels| / distinct query ids
    std::size_t pair_count = 0;
};

const std::vector<std::string>& subset_names();  // the five, fixed order

// corpus.jsonl rows {_id, title, text}, sorted by _id, byte-stable.
void emit_corpus(const std::vector<PassageChunk>& passages,
                 const std::map<std::string, std::string>& doc_titles,
                 const std::filesystem::path& file);

// queries.jsonl {_id, text} + qrels.tsv ("query-id<TAB>corpus-id<TAB>score",
// score fixed at 1). Dangling ids are hard errors naming the id.
void emit_subset(const SubsetBundle& bundle, const std::set<std::string>& corpus_ids,
                 const std::filesystem::path& dir);

// Disjoint-id union of the five subsets; raw ids are namespaced by subset.
SubsetBundle make_all_bundle(const std::vector<SubsetBundle>& subsets);

StatsRow compute_stats(const SubsetBundle& bundle,
                       const std::map<std::string, std::size_t>& passage_cp_len);

void write_stats_tsv(const std::vector<StatsRow>& rows, const std::filesystem::path& file);

// Per-stage inference cost model for a corpus of n documents averaging t
// tokens: NC1 = n*t/100 sentence chunks, NC2 = n*t/500 passage chunks,
//   bert   = (t/500)*n + 2n
//   llm    = 2*t*n + n*L2*3
//   rerank = n*(t/100)^2            (sentence)
//            n^2*t^2 / (m*500^2)    (passage; m clusters, default sqrt(n))
//            m*(n/m)*(t/500)        (topic)
struct CostEstimate {
    double n = 0, t = 0, m = 0, l2 = 0;
    double nc1 = 0, nc2 = 0;
    double bert_cost = 0, llm_cost = 0;
    double rerank_sentence = 0, rerank_passage = 0, rerank_topic = 0;
};

CostEstimate estimate_cost(double n, double t, std::optional<double> m = std::nullopt,
                           std::optional<double> l2 = std::nullopt);

std::string cost_table(const CostEstimate& est);

}  // namespace retsyn
