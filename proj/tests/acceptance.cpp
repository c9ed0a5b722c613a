// Acceptance suite: runs every criterion and prints one PASS/FAIL line each.
// Exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "retsyn/audit.hpp"
#include "retsyn/bottom_up.hpp"
#include "retsyn/corpus.hpp"
#include "retsyn/dataset.hpp"
#include "retsyn/evalbench.hpp"
#include "retsyn/gateway.hpp"
#include "retsyn/hdbscan.hpp"
#include "retsyn/io.hpp"
#include "retsyn/pipeline.hpp"
#include "retsyn/relevance.hpp"
#include "retsyn/rng.hpp"
#include "retsyn/top_down.hpp"
#include "retsyn/utf8.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace retsyn;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Criterion {
    int number;
    std::string description;
    std::function<bool(std::string&)> body;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

#define REQUIRE_OR_FAIL(cond, message)          \
    do {                                        \
        if (!(cond)) {                          \
            detail = (message);                 \
            return false;                       \
        }                                       \
    } while (0)

// --- 1. Chunking round-trip ------------------------------------------------

bool chunking_round_trip(std::string& detail) {
    auto docs = testsupport::make_random_documents(200, 20240601);
    auto start = std::chrono::steady_clock::now();
    for (const auto& doc : docs) {
        auto passages = segment_passages(doc, 500);
        std::string joined;
        for (auto& passage : passages) {
            REQUIRE_OR_FAIL(cp_len(passage.text) <= 500,
                            "passage over 500 code points in " + doc.doc_id);
            joined += passage.text;
            auto sentences = segment_sentences(passage, 100);
            std::string sentence_joined;
            for (const auto& chunk : sentences) {
                if (!chunk.oversize) {
                    REQUIRE_OR_FAIL(cp_len(chunk.text) <= 100,
                                    "unflagged sentence chunk over 100 code points");
                }
                sentence_joined += chunk.text;
            }
            REQUIRE_OR_FAIL(sentence_joined == passage.text,
                            "sentence chunks do not reassemble passage " + passage.passage_id);
        }
        REQUIRE_OR_FAIL(joined == doc.text, "passages do not reassemble document " + doc.doc_id);
    }
    double elapsed = seconds_since(start);
    REQUIRE_OR_FAIL(elapsed < 1.0, "took " + std::to_string(elapsed) + "s, budget 1s");
    detail = "200 documents, " + std::to_string(elapsed).substr(0, 5) + "s";
    return true;
}

// --- 2. Mining oracle equivalence -------------------------------------------

Query mk_query(std::string id, std::string text, QueryLevel level, std::string doc,
               std::string passage) {
    Query q;
    q.query_id = std::move(id);
    q.text = std::move(text);
    q.level = level;
    q.doc_id = std::move(doc);
    q.passage_id = std::move(passage);
    return q;
}

std::string random_text(SplitMix& rng) {
    // Small alphabet so Dice scores cover the whole [0, 1] range, including
    // exact 1.0 via duplicated strings.
    static const std::vector<std::string> kPool = {
        "钢铁需求回升明显", "钢铁需求回升显著", "银行息差企稳回升", "医药集采影响减弱",
        "汽车出口持续增长", "宏观流动性边际宽松"};
    if (rng.bounded(3) == 0) return kPool[rng.bounded(kPool.size())];
    std::string text;
    for (std::size_t i = 0; i < 4 + rng.bounded(6); ++i) {
        text += encode_utf8(static_cast<char32_t>(0x4E00 + rng.bounded(64)));
    }
    return text;
}

bool mining_oracle_equivalence(std::string& detail) {
    auto start = std::chrono::steady_clock::now();
    SplitMix rng(424242);
    BigramDiceReranker reranker;
    MiningConfig config;  // threshold 0.99

    auto score = [&](const std::string& a, const std::string& b) {
        return reranker.rerank(a, b).value().score;
    };
    auto as_set = [](const std::vector<RelevanceLabel>& labels) {
        std::set<std::pair<std::string, std::string>> out;
        for (const auto& l : labels) out.insert({l.query_id, l.passage_id});
        return out;
    };

    for (int trial = 0; trial < 10; ++trial) {
        // Sentence level: 3 docs x up to 4 passages x up to 4 queries (<= 50 per space).
        std::vector<Query> sentence_queries;
        for (int d = 0; d < 3; ++d) {
            std::string doc = "d" + std::to_string(d);
            int passages = 2 + static_cast<int>(rng.bounded(3));
            for (int p = 0; p < passages; ++p) {
                std::string pid = doc + "-p" + std::to_string(p);
                int n = 1 + static_cast<int>(rng.bounded(4));
                for (int s = 0; s < n; ++s) {
                    sentence_queries.push_back(mk_query(pid + "-s" + std::to_string(s),
                                                        random_text(rng), QueryLevel::Sentence,
                                                        doc, pid));
                }
            }
        }
        auto sentence_spaces = build_sentence_spaces(sentence_queries);
        auto mined = mine_sentence_level(sentence_spaces, config, reranker);
        std::set<std::pair<std::string, std::string>> expected;
        for (const auto& space : sentence_spaces) {
            for (const auto& qa : space.queries) {
                for (const auto& qb : space.queries) {
                    if (qa.query_id == qb.query_id || qa.passage_id == qb.passage_id) continue;
                    if (score(qa.text, qb.text) >= config.threshold) {
                        expected.insert({qa.query_id, qb.passage_id});
                    }
                }
            }
        }
        REQUIRE_OR_FAIL(as_set(mined.labels) == expected,
                        "sentence-level mining disagrees with exhaustive scoring");

        // Passage level: two subtrees.
        std::vector<Query> passage_queries;
        std::map<std::string, std::string> subtree;
        for (int d = 0; d < 8; ++d) {
            std::string doc = "pd" + std::to_string(d);
            passage_queries.push_back(
                mk_query(doc + "-p0", random_text(rng), QueryLevel::Passage, doc, doc + "-p0"));
            subtree[doc] = d < 4 ? "t0" : "t1";
        }
        auto passage_spaces = build_passage_spaces(passage_queries, subtree, nullptr);
        auto mined_p = mine_passage_level(passage_spaces, config, reranker);
        expected.clear();
        for (const auto& space : passage_spaces) {
            for (const auto& qa : space.queries) {
                for (const auto& qb : space.queries) {
                    if (qa.query_id == qb.query_id) continue;
                    if (score(qa.text, qb.text) >= config.threshold) {
                        expected.insert({qa.query_id, qb.passage_id});
                    }
                }
            }
        }
        REQUIRE_OR_FAIL(as_set(mined_p.labels) == expected,
                        "passage-level mining disagrees with exhaustive scoring");

        // Topic level: directed subquery -> passage query.
        Query intent = mk_query("t0-i0", "意图", QueryLevel::Topic, "", "");
        intent.topic_id = "t0";
        std::map<std::string, std::vector<std::string>> subqueries = {
            {"t0-i0", {random_text(rng), random_text(rng)}}};
        std::map<std::string, std::vector<std::string>> members;
        for (int d = 0; d < 4; ++d) members["t0"].push_back("pd" + std::to_string(d));
        auto topic_spaces = build_topic_spaces({intent}, subqueries, members, passage_queries);
        auto mined_t = mine_topic_level(topic_spaces, config, reranker);
        expected.clear();
        for (const auto& space : topic_spaces) {
            for (const auto& [sid, stext] : space.subqueries) {
                for (const auto& candidate : space.candidates) {
                    if (score(stext, candidate.text) >= config.threshold) {
                        expected.insert({space.topic_query.query_id, candidate.passage_id});
                    }
                }
            }
        }
        REQUIRE_OR_FAIL(as_set(mined_t.labels) == expected,
                        "topic-level mining disagrees with exhaustive scoring");
    }
    double elapsed = seconds_since(start);
    REQUIRE_OR_FAIL(elapsed < 5.0, "took " + std::to_string(elapsed) + "s, budget 5s");
    detail = "10 fixtures x 3 levels, " + std::to_string(elapsed).substr(0, 5) + "s";
    return true;
}

// --- 3. Threshold monotonicity ----------------------------------------------

bool threshold_monotonicity(std::string& detail) {
    SplitMix rng(778899);
    BigramDiceReranker reranker;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Query> queries;
        int passages = 2 + static_cast<int>(rng.bounded(4));
        for (int p = 0; p < passages; ++p) {
            std::string pid = "d0-p" + std::to_string(p);
            int n = 1 + static_cast<int>(rng.bounded(3));
            for (int s = 0; s < n; ++s) {
                queries.push_back(mk_query(pid + "-s" + std::to_string(s), random_text(rng),
                                           QueryLevel::Sentence, "d0", pid));
            }
        }
        auto spaces = build_sentence_spaces(queries);
        std::vector<std::set<std::pair<std::string, std::string>>> sets;
        for (double threshold : {0.9, 0.95, 0.99}) {
            MiningConfig config;
            config.threshold = threshold;
            config.audit_floor = 0.5;
            auto mined = mine_sentence_level(spaces, config, reranker);
            std::set<std::pair<std::string, std::string>> s;
            for (const auto& l : mined.labels) s.insert({l.query_id, l.passage_id});
            sets.push_back(std::move(s));
        }
        for (const auto& x : sets[1]) REQUIRE_OR_FAIL(sets[0].count(x), "0.95 not within 0.9");
        for (const auto& x : sets[2]) REQUIRE_OR_FAIL(sets[1].count(x), "0.99 not within 0.95");
    }
    detail = "100 random fixtures, thresholds {0.9, 0.95, 0.99}";
    return true;
}

// --- 5/6/7/10: numeric criteria ----------------------------------------------

bool metric_correctness(std::string& detail) {
    SplitMix rng(5150);
    for (int i = 0; i < 100; ++i) {
        RunResult run;
        Qrels qrels;
        std::size_t queries = 1 + rng.bounded(6);
        std::size_t corpus = 4 + rng.bounded(12);
        for (std::size_t q = 0; q < queries; ++q) {
            std::string qid = "q" + std::to_string(q);
            std::vector<RankedHit> hits;
            for (std::size_t d = 0; d < corpus; ++d) {
                if (rng.bounded(3) == 0) continue;
                hits.push_back({"p" + std::to_string(d), rng.unit()});
            }
            std::sort(hits.begin(), hits.end(), [](const RankedHit& a, const RankedHit& b) {
                if (a.score != b.score) return a.score > b.score;
                return a.passage_id < b.passage_id;
            });
            run.ranked[qid] = std::move(hits);
            std::set<std::string> rel;
            for (std::size_t d = 0; d < corpus; ++d) {
                if (rng.bounded(4) == 0) rel.insert("p" + std::to_string(d));
            }
            qrels[qid] = std::move(rel);
        }
        std::size_t k = 1 + rng.bounded(12);
        double recall = recall_at_k(run, qrels, k);
        double ndcg = ndcg_at_k(run, qrels, k);
        REQUIRE_OR_FAIL(std::abs(recall - testsupport::reference_recall(run, qrels, k)) < 1e-9,
                        "recall@k deviates from the reference");
        REQUIRE_OR_FAIL(std::abs(ndcg - testsupport::reference_ndcg(run, qrels, k)) < 1e-9,
                        "ndcg@k deviates from the reference");
    }
    RunResult rank2;
    rank2.ranked["q0"] = {{"px", 0.9}, {"p0", 0.8}};
    Qrels single = {{"q0", {"p0"}}};
    double ndcg = ndcg_at_k(rank2, single, 10);
    REQUIRE_OR_FAIL(std::abs(ndcg - 1.0 / std::log2(3.0)) < 1e-9,
                    "single-relevant-at-rank-2 NDCG@10 != 1/log2(3)");
    detail = "100 random instances vs reference, closed form at rank 2";
    return true;
}

bool pearson_correctness(std::string& detail) {
    REQUIRE_OR_FAIL(std::abs(pearson({1, 2, 3}, {2, 4, 6}) - 1.0) < 1e-12,
                    "[1,2,3] vs [2,4,6] != 1.0");
    SplitMix rng(61);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x, y, ax;
        for (int j = 0; j < 6; ++j) {
            x.push_back(rng.unit());
            y.push_back(rng.unit());
        }
        double a = 0.05 + rng.unit() * 4.0;
        double b = rng.unit() * 20.0 - 10.0;
        for (double v : x) ax.push_back(a * v + b);
        REQUIRE_OR_FAIL(std::abs(pearson(ax, y) - pearson(x, y)) < 1e-9,
                        "not invariant under a positive affine transform");
    }
    detail = "closed form + affine invariance over 100 draws";
    return true;
}

bool temporal_encoding(std::string& detail) {
    auto zero = encode_time(0);
    const double expected_zero[6] = {0, 1, 0, 1, 0, 1};
    for (int i = 0; i < 6; ++i) {
        REQUIRE_OR_FAIL(zero.values[i] == expected_zero[i], "d=0 is not [0,1,0,1,0,1]");
    }
    auto week = encode_time(7);
    REQUIRE_OR_FAIL(std::abs(week.values[0] - 0.0) < 1e-9 && std::abs(week.values[1] - 1.0) < 1e-9,
                    "week pair does not return after 7 days");
    SplitMix rng(20220101);
    for (int i = 0; i < 1000; ++i) {
        auto enc = encode_time(static_cast<std::int64_t>(rng.bounded(60000)) - 30000);
        for (int pair = 0; pair < 3; ++pair) {
            double s = enc.values[2 * pair], c = enc.values[2 * pair + 1];
            REQUIRE_OR_FAIL(std::abs(s * s + c * c - 1.0) < 1e-9, "sin^2+cos^2 drifts from 1");
        }
    }
    detail = "1000 random displacements, exact zero case, period-7 return";
    return true;
}

bool cost_estimator(std::string& detail) {
    SplitMix rng(7171);
    for (int i = 0; i < 100; ++i) {
        double n = 1.0 + static_cast<double>(rng.bounded(2000000));
        double t = 1.0 + static_cast<double>(rng.bounded(200000));
        auto est = estimate_cost(n, t);
        REQUIRE_OR_FAIL(est.nc1 == n * t / 100.0, "NC1 != n*t/100");
        REQUIRE_OR_FAIL(est.nc2 == n * t / 500.0, "NC2 != n*t/500");
        REQUIRE_OR_FAIL(std::abs(est.nc1 - 5.0 * est.nc2) <= 1e-9 * est.nc1,
                        "NC1 != 5*NC2 beyond tolerance");
        auto doubled = estimate_cost(2.0 * n, t);
        double ratio = doubled.rerank_passage / est.rerank_passage;
        REQUIRE_OR_FAIL(std::abs(ratio - 2.0 * std::sqrt(2.0)) < 1e-9,
                        "rerank_passage(2n)/rerank_passage(n) != 2*sqrt(2)");
    }
    detail = "100 random (n, t), ratio 2*sqrt(2) at m=sqrt(n)";
    return true;
}

// --- 8. Clustering sanity -----------------------------------------------------

bool clustering_sanity(std::string& detail) {
    SplitMix rng(314159);
    auto blob = [&](double cx, double cy, int count) {
        std::vector<std::vector<double>> points;
        for (int i = 0; i < count; ++i) {
            points.push_back({cx + (rng.unit() - 0.5) * 0.4, cy + (rng.unit() - 0.5) * 0.4});
        }
        return points;
    };
    auto points = blob(0.0, 0.0, 20);
    auto right = blob(12.0, 0.0, 20);
    points.insert(points.end(), right.begin(), right.end());

    auto result = hdbscan(points, 5);
    REQUIRE_OR_FAIL(result.selected.size() == 2,
                    "expected exactly 2 leaves, got " + std::to_string(result.selected.size()));
    std::set<int> blob_a, blob_b, got_a, got_b;
    for (int i = 0; i < 20; ++i) blob_a.insert(i);
    for (int i = 20; i < 40; ++i) blob_b.insert(i);
    for (int p = 0; p < 40; ++p) {
        REQUIRE_OR_FAIL(result.label[p] >= 0, "blob point labeled noise");
        (result.label[p] == result.selected[0] ? got_a : got_b).insert(p);
    }
    bool match = (got_a == blob_a && got_b == blob_b) || (got_a == blob_b && got_b == blob_a);
    REQUIRE_OR_FAIL(match, "leaf membership does not match the blobs");

    testsupport::SingleLinkageOracle oracle(points, 5);
    bool oracle_match =
        (oracle.top_split[0] == blob_a && oracle.top_split[1] == blob_b) ||
        (oracle.top_split[0] == blob_b && oracle.top_split[1] == blob_a);
    REQUIRE_OR_FAIL(oracle_match, "single-linkage oracle disagrees on the top split");

    auto with_outlier = blob(0.0, 0.0, 20);
    with_outlier.push_back({100.0, 100.0});
    auto outlier_result = hdbscan(with_outlier, 5);
    REQUIRE_OR_FAIL(outlier_result.label[20] == -1, "isolated outlier not labeled noise");
    detail = "2x20-point blobs exact, oracle agreement, outlier noise";
    return true;
}

// --- 9. Audit binning -----------------------------------------------------------

bool audit_binning(std::string& detail) {
    auto bins = audit_bins();
    REQUIRE_OR_FAIL(bins.size() == 8, "expected 8 bins");
    REQUIRE_OR_FAIL(bins.front().lower == 0.99 && bins.front().upper == 1.0 &&
                        bins.front().upper_inclusive,
                    "top bin is not [0.99, 1.00]");
    REQUIRE_OR_FAIL(bins.back().lower == 0.85, "bottom bin does not start at 0.85");
    for (std::size_t i = 1; i < bins.size(); ++i) {
        REQUIRE_OR_FAIL(bins[i].upper == bins[i - 1].lower, "bins do not tile the interval");
    }
    SplitMix rng(888);
    for (int i = 0; i < 2000; ++i) {
        double s = 0.85 + rng.unit() * 0.15;
        int idx = bin_index(s);
        REQUIRE_OR_FAIL(idx >= 0 && idx < 8, "score inside [0.85, 1] missed every bin");
        bool upper_ok = bins[idx].upper_inclusive ? s <= bins[idx].upper : s < bins[idx].upper;
        REQUIRE_OR_FAIL(s >= bins[idx].lower && upper_ok, "bin assignment not exclusive");
    }
    REQUIRE_OR_FAIL(bin_index(0.80) == -1, "score below 0.85 binned");

    std::vector<ScoredPair> log;
    for (int i = 0; i < 400; ++i) {
        ScoredPair pair;
        pair.query_a_id = "a" + std::to_string(i);
        pair.query_b_id = "b" + std::to_string(i);
        pair.score = 0.85 + rng.unit() * 0.15;
        pair.level = QueryLevel::Sentence;
        log.push_back(pair);
    }
    auto sampled = bin_and_sample(log, 50, 5);
    for (const auto& bin : sampled) {
        REQUIRE_OR_FAIL(bin.samples.size() <= 50, "bin sample exceeds 50");
        REQUIRE_OR_FAIL(bin.samples.size() == std::min<std::size_t>(50, bin.population),
                        "sample size is not min(50, population)");
    }

    // Hand-counted crafted set: above threshold {5,4,2,1} -> FP 0.5;
    // below {5,4,3,2,1} -> FN 0.4 (two ratings > 3 of five).
    std::vector<JudgeScore> judged;
    auto add = [&](double score, int rating) {
        JudgeScore j;
        j.pair.query_a_id = "x";
        j.pair.query_b_id = "y";
        j.pair.score = score;
        j.pair.level = QueryLevel::Sentence;
        j.rating = rating;
        j.judged = true;
        judged.push_back(j);
    };
    for (int rating : {5, 4, 2, 1}) add(0.995, rating);
    for (int rating : {5, 4, 3, 2, 1}) add(0.95, rating);
    auto report = estimate_rates(judged, 0.99);
    REQUIRE_OR_FAIL(report.pooled.fp_rate == 0.5, "FP rate != hand count 0.5");
    REQUIRE_OR_FAIL(report.pooled.fn_rate == 0.4, "FN rate != hand count 0.4");
    detail = "partition exact, samples <= 50, FP 0.5 / FN 0.4 hand counts";
    return true;
}

// --- 4/11/12. Pipeline-level criteria --------------------------------------------

struct PipelineFixture {
    fs::path root;
    fs::path corpus;
    json config_body;

    PipelineFixture() {
        root = fs::temp_directory_path() / "retsyn_acceptance";
        fs::remove_all(root);
        fs::create_directories(root);
        auto docs = testsupport::make_pipeline_corpus({4, 7, 2, 20250808});  // 30 documents
        corpus = root / "corpus.jsonl";
        testsupport::write_corpus_jsonl(docs, corpus);
        config_body["input"]["corpus"] = corpus.string();
        config_body["seed"] = 11;
        config_body["cost"]["n"] = 100;
        config_body["cost"]["t"] = 500;
    }

    std::string run_all(const fs::path& workdir) const {
        PipelineRunner runner(config_from_json(config_body), workdir);
        for (const auto& stage : stage_names()) runner.run_stage(stage);
        return tree_digest(workdir / "artifacts");
    }
};

PipelineFixture& pipeline_fixture() {
    static PipelineFixture fixture;
    return fixture;
}

bool e2e_determinism(std::string& detail) {
    auto start = std::chrono::steady_clock::now();
    auto& fixture = pipeline_fixture();
    std::string digest_a = fixture.run_all(fixture.root / "run_a");
    std::string digest_b = fixture.run_all(fixture.root / "run_b");
    REQUIRE_OR_FAIL(digest_a == digest_b, "artifact trees differ between identical runs");
    double elapsed = seconds_since(start);
    REQUIRE_OR_FAIL(elapsed < 60.0, "took " + std::to_string(elapsed) + "s, budget 60s");
    detail = "30 docs, two runs, tree sha256 " + digest_a.substr(0, 12) + "..., " +
             std::to_string(elapsed).substr(0, 5) + "s";
    return true;
}

bool direct_label_statistic(std::string& detail) {
    auto& fixture = pipeline_fixture();
    fs::path stats_file = fixture.root / "run_a/artifacts/dataset/stats.tsv";
    REQUIRE_OR_FAIL(fs::exists(stats_file), "stats.tsv missing (run criterion 11 first)");
    std::string stats = read_file(stats_file);
    int direct_rows = 0;
    std::size_t pos = 0;
    while (pos < stats.size()) {
        std::size_t end = stats.find('\n', pos);
        if (end == std::string::npos) end = stats.size();
        std::string line = stats.substr(pos, end - pos);
        pos = end + 1;
        if (line.rfind("sentence\t", 0) == 0 || line.rfind("passage\t", 0) == 0) {
            ++direct_rows;
            // Column 4 is avg_rel_per_query.
            std::vector<std::string> cells;
            std::size_t c = 0;
            while (true) {
                std::size_t tab = line.find('\t', c);
                cells.push_back(line.substr(c, tab == std::string::npos ? tab : tab - c));
                if (tab == std::string::npos) break;
                c = tab + 1;
            }
            REQUIRE_OR_FAIL(cells.size() == 5, "stats row has wrong arity");
            REQUIRE_OR_FAIL(cells[3] == "1.00",
                            "direct subset " + cells[0] + " reports " + cells[3] + " != 1.00");
        }
    }
    REQUIRE_OR_FAIL(direct_rows == 2, "expected sentence and passage rows");

    // Same property at the library level, exact.
    std::vector<Query> queries;
    for (int i = 0; i < 7; ++i) {
        queries.push_back(mk_query("d0-p" + std::to_string(i), "q", QueryLevel::Passage, "d0",
                                   "d0-p" + std::to_string(i)));
    }
    auto labels = direct_map(queries);
    SubsetBundle bundle;
    bundle.name = "passage";
    bundle.qrels = labels;
    for (const auto& q : queries) bundle.queries.push_back(q);
    REQUIRE_OR_FAIL(compute_stats(bundle, {}).avg_rel_per_query == 1.0,
                    "direct avg_rel_per_query != 1.0 exactly");
    detail = "stats.tsv rows sentence/passage = 1.00, exact library check";
    return true;
}

bool emitted_format_integrity(std::string& detail) {
    auto& fixture = pipeline_fixture();
    fs::path dataset = fixture.root / "run_a/artifacts/dataset";
    REQUIRE_OR_FAIL(fs::exists(dataset), "dataset missing (run criterion 11 first)");

    std::set<std::string> corpus_ids;
    for (const auto& row : read_jsonl(dataset / "corpus.jsonl")) {
        corpus_ids.insert(row.at("_id").get<std::string>());
    }
    REQUIRE_OR_FAIL(!corpus_ids.empty(), "empty corpus");

    std::vector<std::string> names = subset_names();
    names.push_back("all");
    std::size_t total_rows = 0;
    for (const auto& name : names) {
        std::set<std::string> query_ids;
        for (const auto& row : read_jsonl(dataset / name / "queries.jsonl")) {
            query_ids.insert(row.at("_id").get<std::string>());
        }
        auto qrels = load_qrels_tsv(dataset / name / "qrels.tsv");
        for (const auto& [qid, docs] : qrels) {
            REQUIRE_OR_FAIL(query_ids.count(qid), "dangling query id " + qid + " in " + name);
            for (const auto& doc : docs) {
                REQUIRE_OR_FAIL(corpus_ids.count(doc), "dangling corpus id " + doc + " in " + name);
                ++total_rows;
            }
        }
    }
    REQUIRE_OR_FAIL(total_rows > 0, "no qrels emitted");

    std::string stats = read_file(dataset / "stats.tsv");
    REQUIRE_OR_FAIL(
        stats.rfind("subset\tavg_query_len\tavg_doc_len\tavg_rel_per_query\tpair_count\n", 0) == 0,
        "stats.tsv header mismatch");
    std::size_t lines = static_cast<std::size_t>(std::count(stats.begin(), stats.end(), '\n'));
    REQUIRE_OR_FAIL(lines == 7, "stats.tsv must have one row per subset plus all");
    detail = std::to_string(total_rows) + " qrels rows resolve, header + 6 stats rows";
    return true;
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "chunking round-trip on 200 randomized documents", chunking_round_trip},
        {2, "mining equals exhaustive scoring at threshold 0.99 on all levels",
         mining_oracle_equivalence},
        {3, "mined label sets nest across thresholds {0.9, 0.95, 0.99}", threshold_monotonicity},
        {4, "direct subsets report avg_rel_per_query = 1.00 exactly", direct_label_statistic},
        {5, "recall@k / ndcg@k match an independent reference within 1e-9", metric_correctness},
        {6, "pearson matches closed forms and affine invariance", pearson_correctness},
        {7, "temporal encoding stays on the unit circle", temporal_encoding},
        {8, "two blobs cluster exactly, outlier is noise, oracle agrees", clustering_sanity},
        {9, "audit bins partition [0.85, 1.00], FP/FN match hand counts", audit_binning},
        {10, "cost estimator formulas and the 2*sqrt(2) scaling ratio", cost_estimator},
        {11, "end-to-end determinism: identical artifact trees across runs", e2e_determinism},
        {12, "emitted dataset referential integrity and stats.tsv shape", emitted_format_integrity},
    };
    // Criterion 4 and 12 read the artifacts produced by criterion 11.
    std::stable_sort(criteria.begin(), criteria.end(), [](const Criterion& a, const Criterion& b) {
        auto key = [](const Criterion& c) { return c.number == 11 ? -1 : c.number; };
        return key(a) < key(b);
    });

    int failures = 0;
    std::vector<std::pair<int, std::string>> lines;
    for (auto& criterion : criteria) {
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.body(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        if (!ok) ++failures;
        char buf[512];
        std::snprintf(buf, sizeof(buf), "%s  %2d. %s%s%s", ok ? "PASS" : "FAIL", criterion.number,
                      criterion.description.c_str(), detail.empty() ? "" : " — ", detail.c_str());
        lines.emplace_back(criterion.number, buf);
    }
    std::sort(lines.begin(), lines.end());
    for (const auto& [number, line] : lines) std::cout << line << "\n";
    std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(failures))
              << "\n";
    fs::remove_all(fs::temp_directory_path() / "retsyn_acceptance");
    return failures == 0 ? 0 : 1;
}
