#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "retsyn/hdbscan.hpp"
#include "retsyn/rng.hpp"
#include "support/oracles.hpp"

using namespace retsyn;

namespace {

std::vector<std::vector<double>> gaussian_blob(SplitMix& rng, double cx, double cy, double sigma,
                                               int count) {
    std::vector<std::vector<double>> points;
    for (int i = 0; i < count; ++i) {
        // Box-Muller-ish jitter from uniform draws; exact shape is irrelevant.
        double dx = (rng.unit() + rng.unit() + rng.unit() - 1.5) * sigma;
        double dy = (rng.unit() + rng.unit() + rng.unit() - 1.5) * sigma;
        points.push_back({cx + dx, cy + dy});
    }
    return points;
}

std::set<int> members_of(const HdbscanResult& result, int cluster) {
    std::set<int> out;
    for (std::size_t p = 0; p < result.label.size(); ++p) {
        if (result.label[p] == cluster) out.insert(static_cast<int>(p));
    }
    return out;
}

}  // namespace

TEST_CASE("two well-separated blobs produce exactly two selected clusters") {
    SplitMix rng(2024);
    auto points = gaussian_blob(rng, 0.0, 0.0, 0.15, 20);
    auto right = gaussian_blob(rng, 10.0, 0.0, 0.15, 20);
    points.insert(points.end(), right.begin(), right.end());

    auto result = hdbscan(points, 5);
    REQUIRE(result.selected.size() == 2);

    std::set<int> blob_a, blob_b;
    for (int i = 0; i < 20; ++i) blob_a.insert(i);
    for (int i = 20; i < 40; ++i) blob_b.insert(i);

    auto m0 = members_of(result, result.selected[0]);
    auto m1 = members_of(result, result.selected[1]);
    bool split_matches = (m0 == blob_a && m1 == blob_b) || (m0 == blob_b && m1 == blob_a);
    CHECK(split_matches);
    for (int label : result.label) CHECK(label >= 0);  // no noise

    // The independent single-linkage oracle agrees on the top split.
    testsupport::SingleLinkageOracle oracle(points, 5);
    REQUIRE(oracle.top_split.size() == 2);
    bool oracle_matches = (oracle.top_split[0] == blob_a && oracle.top_split[1] == blob_b) ||
                          (oracle.top_split[0] == blob_b && oracle.top_split[1] == blob_a);
    CHECK(oracle_matches);
}

TEST_CASE("identical points collapse to a single cluster without noise") {
    std::vector<std::vector<double>> points(12, {1.0, 2.0, 3.0});
    auto result = hdbscan(points, 5);
    REQUIRE(result.selected.size() == 1);
    for (int label : result.label) CHECK(label == result.selected[0]);
}

TEST_CASE("an isolated far point is labeled noise") {
    SplitMix rng(7);
    auto points = gaussian_blob(rng, 0.0, 0.0, 0.2, 20);
    points.push_back({50.0, 50.0});

    auto result = hdbscan(points, 5);
    CHECK(result.label[20] == -1);
    // The blob itself stays clustered.
    std::size_t clustered = 0;
    for (int i = 0; i < 20; ++i) {
        if (result.label[i] >= 0) ++clustered;
    }
    CHECK(clustered >= 15);

    testsupport::SingleLinkageOracle oracle(points, 5);
    bool outlier_alone = (oracle.top_split[0].size() == 1 && oracle.top_split[0].count(20)) ||
                         (oracle.top_split[1].size() == 1 && oracle.top_split[1].count(20));
    CHECK(outlier_alone);
}

TEST_CASE("fewer points than min_cluster_size degenerate to a flagged root") {
    std::vector<std::vector<double>> points = {{0, 0}, {1, 0}, {0, 1}};
    auto result = hdbscan(points, 5);
    CHECK(result.degenerate_single_root);
    REQUIRE(result.clusters.size() == 1);
    CHECK(result.selected == std::vector<int>{0});
    for (int label : result.label) CHECK(label == 0);
}

TEST_CASE("condensed tree accounting: sizes, parents, stability") {
    SplitMix rng(99);
    auto points = gaussian_blob(rng, 0.0, 0.0, 0.25, 25);
    auto right = gaussian_blob(rng, 8.0, 0.0, 0.25, 25);
    points.insert(points.end(), right.begin(), right.end());
    auto result = hdbscan(points, 5);

    REQUIRE_FALSE(result.clusters.empty());
    CHECK(result.clusters[0].parent == -1);
    CHECK(result.clusters[0].size == 50);
    for (const auto& cluster : result.clusters) {
        CHECK(cluster.stability >= 0.0);
        CHECK(cluster.death_lambda >= cluster.birth_lambda);
        for (int child : cluster.children) {
            CHECK(result.clusters[static_cast<std::size_t>(child)].parent == cluster.id);
            CHECK(result.clusters[static_cast<std::size_t>(child)].birth_lambda >=
                  cluster.birth_lambda);
        }
    }

    // Every point departs exactly once.
    std::vector<int> departures(points.size(), 0);
    for (const auto& cluster : result.clusters) {
        for (const auto& [p, lambda] : cluster.fallouts) {
            (void)lambda;
            ++departures[static_cast<std::size_t>(p)];
        }
    }
    for (int count : departures) CHECK(count == 1);
}

TEST_CASE("clustering is deterministic") {
    SplitMix rng(5);
    auto points = gaussian_blob(rng, 0.0, 0.0, 0.5, 30);
    auto a = hdbscan(points, 4);
    auto b = hdbscan(points, 4);
    CHECK(a.label == b.label);
    CHECK(a.selected == b.selected);
    REQUIRE(a.clusters.size() == b.clusters.size());
    for (std::size_t i = 0; i < a.clusters.size(); ++i) {
        CHECK(a.clusters[i].birth_lambda == b.clusters[i].birth_lambda);
        CHECK(a.clusters[i].stability == b.clusters[i].stability);
    }
}
