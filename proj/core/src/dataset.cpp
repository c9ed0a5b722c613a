#include "retsyn/dataset.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "retsyn/io.hpp"
#include "retsyn/utf8.hpp"

namespace retsyn {

using nlohmann::json;

const std::vector<std::string>& subset_names() {
    static const std::vector<std::string> kNames = {
        "sentence", "sentence-mined", "passage", "passage-mined", "topic"};
    return kNames;
}

void emit_corpus(const std::vector<PassageChunk>& passages,
                 const std::map<std::string, std::string>& doc_titles,
                 const std::filesystem::path& file) {
    std::vector<const PassageChunk*> sorted;
    sorted.reserve(passages.size());
    for (const auto& p : passages) sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(), [](const PassageChunk* a, const PassageChunk* b) {
        return a->passage_id < b->passage_id;
    });
    std::vector<json> rows;
    rows.reserve(sorted.size());
    for (const auto* p : sorted) {
        auto title = doc_titles.find(p->doc_id);
        rows.push_back({{"_id", p->passage_id},
                        {"title", title == doc_titles.end() ? std::string() : title->second},
                        {"text", p->text}});
    }
    write_jsonl(file, rows);
}

void emit_subset(const SubsetBundle& bundle, const std::set<std::string>& corpus_ids,
                 const std::filesystem::path& dir) {
    std::set<std::string> query_ids;
    for (const auto& q : bundle.queries) query_ids.insert(q.query_id);
    for (const auto& label : bundle.qrels) {
        if (!query_ids.count(label.query_id)) {
            throw IoError("subset '" + bundle.name + "': qrel references unknown query id '" +
                          label.query_id + "'");
        }
        if (!corpus_ids.count(label.passage_id)) {
            throw IoError("subset '" + bundle.name + "': qrel references unknown corpus id '" +
                          label.passage_id + "'");
        }
    }

    std::vector<const Query*> sorted_queries;
    sorted_queries.reserve(bundle.queries.size());
    for (const auto& q : bundle.queries) sorted_queries.push_back(&q);
    std::sort(sorted_queries.begin(), sorted_queries.end(),
              [](const Query* a, const Query* b) { return a->query_id < b->query_id; });
    std::vector<json> rows;
    rows.reserve(sorted_queries.size());
    for (const auto* q : sorted_queries) rows.push_back({{"_id", q->query_id}, {"text", q->text}});
    write_jsonl(dir / "queries.jsonl", rows);

    std::vector<RelevanceLabel> sorted_qrels = bundle.qrels;
    std::sort(sorted_qrels.begin(), sorted_qrels.end(),
              [](const RelevanceLabel& a, const RelevanceLabel& b) {
                  if (a.query_id != b.query_id) return a.query_id < b.query_id;
                  return a.passage_id < b.passage_id;
              });
    std::string tsv = "query-id\tcorpus-id\tscore\n";
    for (const auto& label : sorted_qrels) {
        tsv += label.query_id;
        tsv += '\t';
        tsv += label.passage_id;
        tsv += "\t1\n";
    }
    atomic_write_file(dir / "qrels.tsv", tsv);
}

SubsetBundle make_all_bundle(const std::vector<SubsetBundle>& subsets) {
    SubsetBundle all;
    all.name = "all";
    for (const auto& subset : subsets) {
        for (const auto& q : subset.queries) {
            Query copy = q;
            copy.query_id = subset.name + ":" + q.query_id;
            all.queries.push_back(std::move(copy));
        }
        for (const auto& label : subset.qrels) {
            RelevanceLabel copy = label;
            copy.query_id = subset.name + ":" + label.query_id;
            all.qrels.push_back(std::move(copy));
        }
    }
    return all;
}

StatsRow compute_stats(const SubsetBundle& bundle,
                       const std::map<std::string, std::size_t>& passage_cp_len) {
    StatsRow row;
    row.subset = bundle.name;
    row.pair_count = bundle.qrels.size();

    if (!bundle.queries.empty()) {
        double total = 0.0;
        for (const auto& q : bundle.queries) total += static_cast<double>(cp_len(q.text));
        row.avg_query_len = total / static_cast<double>(bundle.queries.size());
    }

    std::set<std::string> referenced;
    std::set<std::string> query_ids;
    for (const auto& label : bundle.qrels) {
        referenced.insert(label.passage_id);
        query_ids.insert(label.query_id);
    }
    if (!referenced.empty()) {
        double total = 0.0;
        for (const auto& pid : referenced) {
            auto it = passage_cp_len.find(pid);
            if (it != passage_cp_len.end()) total += static_cast<double>(it->second);
        }
        row.avg_doc_len = total / static_cast<double>(referenced.size());
    }
    if (!query_ids.empty()) {
        row.avg_rel_per_query =
            static_cast<double>(row.pair_count) / static_cast<double>(query_ids.size());
    }
    return row;
}

void write_stats_tsv(const std::vector<StatsRow>& rows, const std::filesystem::path& file) {
    std::vector<std::vector<std::string>> cells;
    cells.reserve(rows.size());
    for (const auto& row : rows) {
        cells.push_back({row.subset, fmt_fixed(row.avg_query_len, 2), fmt_fixed(row.avg_doc_len, 2),
                         fmt_fixed(row.avg_rel_per_query, 2), std::to_string(row.pair_count)});
    }
    write_tsv(file, {"subset", "avg_query_len", "avg_doc_len", "avg_rel_per_query", "pair_count"},
              cells);
}

CostEstimate estimate_cost(double n, double t, std::optional<double> m,
                           std::optional<double> l2) {
    CostEstimate est;
    est.n = n;
    est.t = t;
    est.m = m.value_or(std::sqrt(n));
    est.l2 = l2.value_or(20.0);
    est.nc1 = n * t / 100.0;
    est.nc2 = n * t / 500.0;
    est.bert_cost = (t / 500.0) * n + 2.0 * n;
    est.llm_cost = 2.0 * t * n + n * est.l2 * 3.0;
    est.rerank_sentence = n * (t / 100.0) * (t / 100.0);
    est.rerank_passage = (n * n * t * t) / (est.m * 500.0 * 500.0);
    est.rerank_topic = est.m * (n / est.m) * (t / 500.0);
    return est;
}

std::string cost_table(const CostEstimate& est) {
    auto line = [](const std::string& name, double value) {
        return name + "\t" + fmt_fixed(value, 2) + "\n";
    };
    std::string out = "quantity\tvalue\n";
    out += line("n_docs", est.n);
    out += line("avg_tokens", est.t);
    out += line("clusters_m", est.m);
    out += line("title_tokens_l2", est.l2);
    out += line("sentence_chunks_nc1", est.nc1);
    out += line("passage_chunks_nc2", est.nc2);
    out += line("bert_cost", est.bert_cost);
    out += line("llm_cost", est.llm_cost);
    out += line("rerank_sentence", est.rerank_sentence);
    out += line("rerank_passage", est.rerank_passage);
    out += line("rerank_topic", est.rerank_topic);
    return out;
}

}  // namespace retsyn
