#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "retsyn/evalbench.hpp"
#include "retsyn/gateway.hpp"
#include "retsyn/io.hpp"
#include "retsyn/rng.hpp"
#include "support/oracles.hpp"

using namespace retsyn;

namespace {

RunResult run_of(std::map<std::string, std::vector<RankedHit>> ranked) {
    RunResult r;
    r.ranked = std::move(ranked);
    return r;
}

// Random (run, qrels) instance over a small id universe.
std::pair<RunResult, Qrels> random_instance(SplitMix& rng) {
    RunResult run;
    Qrels qrels;
    std::size_t queries = 1 + rng.bounded(8);
    std::size_t corpus = 3 + rng.bounded(15);
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
        std::set<std::string> relevant;
        for (std::size_t d = 0; d < corpus; ++d) {
            if (rng.bounded(4) == 0) relevant.insert("p" + std::to_string(d));
        }
        qrels[qid] = std::move(relevant);
    }
    return {std::move(run), std::move(qrels)};
}

}  // namespace

TEST_CASE("brute_force_retrieve: trivial geometries") {
    BigramHashEmbedder embedder(64);

    SUBCASE("corpus of one always ranks that passage first") {
        auto run = brute_force_retrieve({{"q0", "任意查询文本"}}, {{"p0", "唯一语料段落"}},
                                        embedder, 10);
        REQUIRE(run.ranked.at("q0").size() == 1);
        CHECK(run.ranked.at("q0")[0].passage_id == "p0");
    }
    SUBCASE("a query equal to a passage scores 1.0 at rank 1") {
        auto run = brute_force_retrieve({{"q0", "钢铁需求增长"}},
                                        {{"p0", "钢铁需求增长"}, {"p1", "银行息差企稳"}},
                                        embedder, 10);
        CHECK(run.ranked.at("q0")[0].passage_id == "p0");
        CHECK(run.ranked.at("q0")[0].score == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("top-3 matches an exhaustive sort") {
        std::vector<IdText> corpus;
        for (int i = 0; i < 10; ++i) {
            corpus.push_back({"p" + std::to_string(i),
                              "语料段落编号" + std::to_string(i) + "与钢铁需求相关文本"});
        }
        auto run = brute_force_retrieve({{"q0", "钢铁需求相关"}}, corpus, embedder, 3);
        auto full = brute_force_retrieve({{"q0", "钢铁需求相关"}}, corpus, embedder, 10);
        REQUIRE(run.ranked.at("q0").size() == 3);
        for (int i = 0; i < 3; ++i) {
            CHECK(run.ranked.at("q0")[i].passage_id == full.ranked.at("q0")[i].passage_id);
        }
        for (std::size_t i = 1; i < full.ranked.at("q0").size(); ++i) {
            CHECK(full.ranked.at("q0")[i - 1].score >= full.ranked.at("q0")[i].score);
        }
    }
}

TEST_CASE("recall_at_k: definitions") {
    Qrels qrels = {{"q0", {"p0", "p1"}}};
    CHECK(recall_at_k(run_of({{"q0", {{"p0", 0.9}, {"p1", 0.8}}}}), qrels, 10) == 1.0);
    CHECK(recall_at_k(run_of({{"q0", {{"p0", 0.9}, {"px", 0.8}}}}), qrels, 10) == 0.5);
    CHECK(recall_at_k(run_of({}), qrels, 10) == 0.0);

    MetricDiagnostics diag;
    Qrels with_empty = {{"q0", {"p0"}}, {"q1", {}}};
    recall_at_k(run_of({{"q0", {{"p0", 0.9}}}}), with_empty, 10, &diag);
    CHECK(diag.queries_evaluated == 1);
    CHECK(diag.queries_skipped_no_relevant == 1);
}

TEST_CASE("ndcg_at_k: closed forms") {
    Qrels qrels = {{"q0", {"p0"}}};
    CHECK(ndcg_at_k(run_of({{"q0", {{"p0", 0.9}}}}), qrels, 10) == doctest::Approx(1.0));
    // Single relevant at rank 2: 1/log2(3).
    CHECK(ndcg_at_k(run_of({{"q0", {{"px", 0.9}, {"p0", 0.8}}}}), qrels, 10) ==
          doctest::Approx(1.0 / std::log2(3.0)).epsilon(1e-9));
    CHECK(ndcg_at_k(run_of({{"q0", {{"px", 0.9}, {"py", 0.8}}}}), qrels, 10) == 0.0);
}

TEST_CASE("metrics equal the independent references on random instances") {
    SplitMix rng(321);
    for (int i = 0; i < 100; ++i) {
        auto [run, qrels] = random_instance(rng);
        std::size_t k = 1 + rng.bounded(12);
        CHECK(std::abs(recall_at_k(run, qrels, k) - testsupport::reference_recall(run, qrels, k)) <
              1e-9);
        CHECK(std::abs(ndcg_at_k(run, qrels, k) - testsupport::reference_ndcg(run, qrels, k)) <
              1e-9);
    }
}

TEST_CASE("metrics are invariant to query order") {
    SplitMix rng(99);
    auto [run, qrels] = random_instance(rng);
    Qrels reversed(qrels.rbegin(), qrels.rend());
    CHECK(recall_at_k(run, qrels, 5) == recall_at_k(run, reversed, 5));
    CHECK(ndcg_at_k(run, qrels, 5) == ndcg_at_k(run, reversed, 5));
}

TEST_CASE("perfect ranking at full depth gives ndcg 1.0") {
    Qrels qrels = {{"q0", {"p0", "p1", "p2"}}};
    auto run = run_of({{"q0", {{"p0", 0.9}, {"p1", 0.8}, {"p2", 0.7}, {"px", 0.1}}}});
    CHECK(ndcg_at_k(run, qrels, 4) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pearson: closed forms and affine invariance") {
    CHECK(pearson({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson({1, 2, 3}, {-1, -2, -3}) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(pearson({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0));
    CHECK(std::isnan(pearson({1, 1, 1}, {1, 2, 3})));

    SplitMix rng(12);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> x, y;
        for (int j = 0; j < 8; ++j) {
            x.push_back(rng.unit());
            y.push_back(rng.unit());
        }
        double a = 0.1 + rng.unit() * 5.0;
        double b = rng.unit() * 10.0 - 5.0;
        std::vector<double> ax;
        for (double v : x) ax.push_back(a * v + b);
        CHECK(std::abs(pearson(ax, y) - pearson(x, y)) < 1e-9);
    }
}

TEST_CASE("pearson_matrix: column-by-column correlations") {
    // models x subsets
    std::vector<std::vector<double>> a = {{0.1, 0.9}, {0.2, 0.8}, {0.3, 0.7}};
    std::vector<std::vector<double>> b = {{0.2}, {0.4}, {0.6}};
    auto matrix = pearson_matrix(a, b);
    REQUIRE(matrix.size() == 2);
    REQUIRE(matrix[0].size() == 1);
    CHECK(matrix[0][0] == doctest::Approx(1.0));
    CHECK(matrix[1][0] == doctest::Approx(-1.0));

    CHECK_THROWS_AS(pearson_matrix({{0.1}}, {{0.2}}), IoError);  // needs >= 3 shared models
}

TEST_CASE("trec run loading and matrix tsv output") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "retsyn_eval_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    atomic_write_file(dir / "run.trec",
                      "q0 Q0 p1 1 0.9 mock\n"
                      "q0 Q0 p0 2 0.8 mock\n"
                      "q1 Q0 p2 1 0.7 mock\n");
    auto run = load_trec_run(dir / "run.trec");
    REQUIRE(run.ranked.at("q0").size() == 2);
    CHECK(run.ranked.at("q0")[0].passage_id == "p1");
    CHECK(run.ranked.at("q1")[0].passage_id == "p2");

    write_matrix_tsv({"rowA"}, {"colA", "colB"},
                     {{1.0, std::numeric_limits<double>::quiet_NaN()}}, dir / "matrix.tsv");
    CHECK(read_file(dir / "matrix.tsv") == "\tcolA\tcolB\nrowA\t1.0000\tNaN\n");

    atomic_write_file(dir / "qrels.tsv", "query-id\tcorpus-id\tscore\nq0\tp0\t1\n");
    auto qrels = load_qrels_tsv(dir / "qrels.tsv");
    CHECK(qrels.at("q0").count("p0") == 1);
    fs::remove_all(dir);
}
