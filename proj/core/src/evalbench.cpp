#include "retsyn/evalbench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "retsyn/errors.hpp"
#include "retsyn/io.hpp"

namespace retsyn {

RunResult brute_force_retrieve(const std::vector<IdText>& queries, const std::vector<IdText>& corpus,
                               Embedder& embedder, std::size_t k) {
    std::vector<EmbedVector> corpus_vecs;
    corpus_vecs.reserve(corpus.size());
    for (const auto& doc : corpus) {
        auto v = embedder.embed(doc.text);
        if (!v.ok()) throw BackendFailureError("embed failed for corpus id " + doc.id);
        corpus_vecs.push_back(v.take());
    }
    RunResult run;
    for (const auto& q : queries) {
        auto qv = embedder.embed(q.text);
        if (!qv.ok()) throw BackendFailureError("embed failed for query id " + q.id);
        std::vector<RankedHit> hits;
        hits.reserve(corpus.size());
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            hits.push_back({corpus[i].id, cosine(qv.value(), corpus_vecs[i])});
        }
        std::sort(hits.begin(), hits.end(), [](const RankedHit& a, const RankedHit& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.passage_id < b.passage_id;
        });
        if (hits.size() > k) hits.resize(k);
        run.ranked[q.id] = std::move(hits);
    }
    return run;
}

double recall_at_k(const RunResult& run, const Qrels& qrels, std::size_t k,
                   MetricDiagnostics* diag) {
    double total = 0.0;
    std::size_t evaluated = 0, skipped = 0;
    for (const auto& [qid, relevant] : qrels) {
        if (relevant.empty()) {
            ++skipped;
            continue;
        }
        ++evaluated;
        auto it = run.ranked.find(qid);
        std::size_t found = 0;
        if (it != run.ranked.end()) {
            std::size_t limit = std::min(k, it->second.size());
            for (std::size_t i = 0; i < limit; ++i) {
                if (relevant.count(it->second[i].passage_id)) ++found;
            }
        }
        total += static_cast<double>(found) / static_cast<double>(relevant.size());
    }
    if (diag) {
        diag->queries_evaluated = evaluated;
        diag->queries_skipped_no_relevant = skipped;
    }
    return evaluated ? total / static_cast<double>(evaluated) : 0.0;
}

double ndcg_at_k(const RunResult& run, const Qrels& qrels, std::size_t k,
                 MetricDiagnostics* diag) {
    double total = 0.0;
    std::size_t evaluated = 0, skipped = 0;
    for (const auto& [qid, relevant] : qrels) {
        if (relevant.empty()) {
            ++skipped;
            continue;
        }
        ++evaluated;
        double dcg = 0.0;
        auto it = run.ranked.find(qid);
        if (it != run.ranked.end()) {
            std::size_t limit = std::min(k, it->second.size());
            for (std::size_t i = 0; i < limit; ++i) {
                if (relevant.count(it->second[i].passage_id)) {
                    dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
                }
            }
        }
        double idcg = 0.0;
        std::size_t ideal = std::min(k, relevant.size());
        for (std::size_t i = 0; i < ideal; ++i) {
            idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
        }
        total += idcg > 0.0 ? dcg / idcg : 0.0;
    }
    if (diag) {
        diag->queries_evaluated = evaluated;
        diag->queries_skipped_no_relevant = skipped;
    }
    return evaluated ? total / static_cast<double>(evaluated) : 0.0;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

std::vector<std::vector<double>> pearson_matrix(const std::vector<std::vector<double>>& a,
                                                const std::vector<std::vector<double>>& b) {
    if (a.size() != b.size() || a.size() < 3) {
        throw IoError("pearson_matrix: both result tables need the same model axis with >= 3 models");
    }
    const std::size_t cols_a = a.empty() ? 0 : a[0].size();
    const std::size_t cols_b = b.empty() ? 0 : b[0].size();
    std::vector<std::vector<double>> matrix(cols_a, std::vector<double>(cols_b, 0.0));
    for (std::size_t i = 0; i < cols_a; ++i) {
        std::vector<double> x;
        for (const auto& row : a) x.push_back(row.at(i));
        for (std::size_t j = 0; j < cols_b; ++j) {
            std::vector<double> y;
            for (const auto& row : b) y.push_back(row.at(j));
            matrix[i][j] = pearson(x, y);
        }
    }
    return matrix;
}

RunResult load_trec_run(const std::filesystem::path& path) {
    RunResult run;
    for_each_line(path, [&](std::size_t line_no, std::string_view line) {
        std::istringstream ss{std::string(line)};
        std::string qid, q0, docid, rank, tag;
        double score = 0.0;
        if (!(ss >> qid >> q0 >> docid >> rank >> score >> tag)) {
            throw ParseError(line_no, "expected 'qid Q0 docid rank score tag'");
        }
        run.ranked[qid].push_back({docid, score});
    });
    for (auto& [qid, hits] : run.ranked) {
        std::sort(hits.begin(), hits.end(), [](const RankedHit& a, const RankedHit& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.passage_id < b.passage_id;
        });
    }
    return run;
}

void write_metrics_tsv(const std::vector<MetricRow>& rows, const std::filesystem::path& file) {
    std::vector<std::vector<std::string>> cells;
    cells.reserve(rows.size());
    for (const auto& row : rows) {
        cells.push_back({row.model, row.subset, row.metric, fmt_fixed(row.value, 4)});
    }
    write_tsv(file, {"model", "subset", "metric", "value"}, cells);
}

void write_matrix_tsv(const std::vector<std::string>& row_names,
                      const std::vector<std::string>& col_names,
                      const std::vector<std::vector<double>>& matrix,
                      const std::filesystem::path& file) {
    std::vector<std::string> header{""};
    header.insert(header.end(), col_names.begin(), col_names.end());
    std::vector<std::vector<std::string>> cells;
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        std::vector<std::string> row{i < row_names.size() ? row_names[i] : std::to_string(i)};
        for (double v : matrix[i]) row.push_back(std::isnan(v) ? "NaN" : fmt_fixed(v, 4));
        cells.push_back(std::move(row));
    }
    write_tsv(file, header, cells);
}

Qrels load_qrels_tsv(const std::filesystem::path& file) {
    Qrels qrels;
    for_each_line(file, [&](std::size_t line_no, std::string_view line) {
        if (line_no == 1 && line.rfind("query-id", 0) == 0) return;  // header
        auto t1 = line.find('\t');
        auto t2 = line.find('\t', t1 == std::string_view::npos ? 0 : t1 + 1);
        if (t1 == std::string_view::npos || t2 == std::string_view::npos) {
            throw ParseError(line_no, "expected 'query-id<TAB>corpus-id<TAB>score'");
        }
        qrels[std::string(line.substr(0, t1))].insert(std::string(line.substr(t1 + 1, t2 - t1 - 1)));
    });
    return qrels;
}

}  // namespace retsyn
