#pragma once

#include <map>
#include <string>
#include <vector>

#include "retsyn/bottom_up.hpp"
#include "retsyn/gateway.hpp"

namespace retsyn {

// Information relation between a query and a passage: Subset (the passage
// holds more than the query asks), Equivalent, Superset (the query spans
// several passages).
enum class RelationKind { Subset, Equivalent, Superset };
std::string_view relation_name(RelationKind kind);

enum class Provenance { Direct, Mined };

struct RelevanceLabel {
    std::string query_id;
    std::string passage_id;
    RelationKind kind = RelationKind::Subset;
    Provenance provenance = Provenance::Direct;
    double score = 1.0;  // 1.0 for direct, reranker score for mined
};

struct ScoredPair {
    std::string query_a_id;
    std::string query_b_id;
    double score = 0.0;
    QueryLevel level = QueryLevel::Sentence;
    std::string space_id;  // doc id | subtree topic id | topic space id
};

struct MiningConfig {
    double threshold = 0.99;       // inclusive
    double audit_floor = 0.85;     // pairs at or above land in the audit log
    std::size_t max_pairs_per_space = 250000;
};

// One label per non-empty sentence/passage query onto its source passage:
// sentence -> Subset, passage -> Equivalent, score 1.0.
std::vector<RelevanceLabel> direct_map(const std::vector<Query>& queries);

// Traversal spaces. Queries inside a space are sorted by query id so pair
// enumeration and truncation are deterministic.
struct SentenceSpace {
    std::string doc_id;
    std::vector<Query> queries;  // sentence-level queries of this document
};

struct PassageSpace {
    std::string space_id;        // subtree topic id
    std::vector<Query> queries;  // passage-level queries under the subtree
};

struct TopicSpace {
    std::string space_id;  // topic query id
    Query topic_query;
    std::vector<std::pair<std::string, std::string>> subqueries;  // (id, text)
    std::vector<Query> candidates;  // passage-level queries in the hierarchy
};

// Sentence level: same document, other passages only (the same-passage
// exclusion happens during pair enumeration).
std::vector<SentenceSpace> build_sentence_spaces(const std::vector<Query>& queries);

// Passage level: grouped by the document's maximum same-industry subtree;
// documents without an assignment are skipped and reported.
std::vector<PassageSpace> build_passage_spaces(
    const std::vector<Query>& queries, const std::map<std::string, std::string>& subtree_of_doc,
    std::vector<std::string>* flagged_docs = nullptr);

// Topic level: directed (subquery, passage query) pairs confined to the
// passage queries of the topic node's member documents.
std::vector<TopicSpace> build_topic_spaces(
    const std::vector<Query>& topic_queries,
    const std::map<std::string, std::vector<std::string>>& subqueries_of_topic_query,
    const std::map<std::string, std::vector<std::string>>& member_docs_of_topic,
    const std::vector<Query>& passage_queries);

struct MineOutcome {
    std::vector<RelevanceLabel> labels;  // sorted by (query_id, passage_id)
    std::vector<ScoredPair> audit_log;   // pairs scoring >= audit_floor
    std::size_t pairs_scored = 0;
    std::size_t truncated_spaces = 0;
};

MineOutcome mine_sentence_level(const std::vector<SentenceSpace>& spaces,
                                const MiningConfig& config, Reranker& reranker);
MineOutcome mine_passage_level(const std::vector<PassageSpace>& spaces,
                               const MiningConfig& config, Reranker& reranker);
MineOutcome mine_topic_level(const std::vector<TopicSpace>& spaces, const MiningConfig& config,
                             Reranker& reranker);

// The five emitted label sets, keyed by subset name. The *-mined subsets are
// restricted to queries with at least one mined label; duplicate
// (query, passage) pairs keep the direct label.
std::map<std::string, std::vector<RelevanceLabel>> assemble_qrels(
    const std::vector<RelevanceLabel>& direct, const std::vector<RelevanceLabel>& mined);

}  // namespace retsyn
