#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "retsyn/gateway.hpp"

namespace retsyn {

struct RankedHit {
    std::string passage_id;
    double score = 0.0;
};

// Per query: ranked hits, score descending, ties by passage id ascending.
struct RunResult {
    std::map<std::string, std::vector<RankedHit>> ranked;
};

using Qrels = std::map<std::string, std::set<std::string>>;

struct IdText {
    std::string id;
    std::string text;
};

// Exact top-k by cosine over unit embeddings.
RunResult brute_force_retrieve(const std::vector<IdText>& queries, const std::vector<IdText>& corpus,
                               Embedder& embedder, std::size_t k = 10);

struct MetricDiagnostics {
    std::size_t queries_evaluated = 0;
    std::size_t queries_skipped_no_relevant = 0;
};

// Macro-averaged over queries with at least one relevant passage.
double recall_at_k(const RunResult& run, const Qrels& qrels, std::size_t k = 10,
                   MetricDiagnostics* diag = nullptr);

// Binary gains: DCG = sum rel_i / log2(i + 1) over ranks 1..k, normalized by
// the ideal placement of the query's relevant set.
double ndcg_at_k(const RunResult& run, const Qrels& qrels, std::size_t k = 10,
                 MetricDiagnostics* diag = nullptr);

struct MetricRow {
    std::string model;
    std::string subset;
    std::string metric;  // recall@k / ndcg@k
    double value = 0.0;
};

// NaN when either series has zero variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Entry (i, j): Pearson of column i of `a` against column j of `b` across the
// shared model axis (rows).
std::vector<std::vector<double>> pearson_matrix(const std::vector<std::vector<double>>& a,
                                                const std::vector<std::vector<double>>& b);

// TREC run format: "qid Q0 docid rank score tag".
RunResult load_trec_run(const std::filesystem::path& path);

void write_metrics_tsv(const std::vector<MetricRow>& rows, const std::filesystem::path& file);
void write_matrix_tsv(const std::vector<std::string>& row_names,
                      const std::vector<std::string>& col_names,
                      const std::vector<std::vector<double>>& matrix,
                      const std::filesystem::path& file);

Qrels load_qrels_tsv(const std::filesystem::path& file);

}  // namespace retsyn
