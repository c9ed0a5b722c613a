#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "retsyn/bottom_up.hpp"
#include "retsyn/corpus.hpp"
#include "retsyn/gateway.hpp"
#include "retsyn/hdbscan.hpp"

namespace retsyn {

struct TitleRecord {
    std::string doc_id;
    std::string title;
    std::string publish_date;
    std::string industry;  // taxonomy label or "none"
};

// [sin, cos] pairs at week / month / year periods of the day displacement.
struct TemporalEncoding {
    std::array<double, 6> values{};
};

TemporalEncoding encode_time(std::int64_t day_displacement);
TemporalEncoding encode_time(std::string_view date, std::string_view reference);

// Keeps titles with at least `min_cjk` CJK characters, deduplicates exact
// matches (first wins), labels industries via the classifier.
std::vector<TitleRecord> collect_titles(const std::vector<Document>& docs,
                                        IndustryClassifier& classifier,
                                        std::size_t min_cjk = 5);

// concat(unit-norm title embedding, temporal_weight * TemporalEncoding).
std::vector<double> build_features(const TitleRecord& record, Embedder& embedder,
                                   std::string_view reference_date,
                                   double temporal_weight = 0.1);

struct TopicNode {
    int topic_id = 0;
    int parent_id = -1;
    std::vector<int> children;
    std::vector<std::string> member_doc_ids;  // sorted
    std::vector<std::string> keywords;        // ranked
    std::string dominant_industry = "none";
    double persistence = 0.0;
    bool is_leaf() const { return children.empty(); }
};

struct TopicTree {
    std::vector<TopicNode> nodes;            // topic_id == index, 0 is the root
    std::map<std::string, int> leaf_of_doc;  // non-noise titles -> leaf topic id
    std::vector<std::string> noise_docs;     // sorted
    bool degenerate = false;                 // fewer titles than min_cluster_size
};

// HDBSCAN over the feature matrix; selected clusters become leaves, their
// condensed ancestors the internal nodes.
TopicTree cluster_topics(const std::vector<TitleRecord>& titles,
                         const std::vector<std::vector<double>>& features,
                         int min_cluster_size = 5);

enum class Tokenizer { CharBigram, Whitespace };
std::vector<std::string> tokenize(std::string_view text, Tokenizer tokenizer);

// Class-based TF-IDF: W(t, c) = tf(t, c) * ln(1 + A / tf(t)) with leaf
// clusters as classes; ties break lexicographically.
void ctfidf_keywords(TopicTree& tree, const std::vector<TitleRecord>& titles,
                     std::size_t top_k = 10, Tokenizer tokenizer = Tokenizer::CharBigram);

// k member titles closest (cosine) to the node's feature centroid; ties by
// doc id.
std::vector<std::string> representative_titles(const TopicTree& tree, int topic_id,
                                               const std::vector<TitleRecord>& titles,
                                               const std::vector<std::vector<double>>& features,
                                               std::size_t k = 5);

struct IntentRecord {
    int topic_id = 0;
    std::string intent;
    std::vector<std::string> subqueries;
};

ChatRequest build_intent_prompt(const std::vector<std::string>& keywords,
                                const std::vector<std::string>& representative);

Expected<std::vector<IntentRecord>> parse_intent_response(const std::string& body, int topic_id);

// Retry-then-skip: a node whose response stays unparsable is skipped and
// reported through `failed`.
std::vector<IntentRecord> generate_intents(int topic_id, const std::vector<std::string>& keywords,
                                           const std::vector<std::string>& representative,
                                           ChatBackend& backend, int retries,
                                           const RetryDelays& delays, double temperature,
                                           bool* failed);

// Strictly more than two thirds of member titles, else "none".
std::string dominant_industry(const std::vector<std::string>& member_industries);
void assign_dominant_industries(TopicTree& tree, const std::vector<TitleRecord>& titles);

// Highest ancestor-or-self of the title's leaf whose dominant industry equals
// the title's; the leaf itself when nothing matches.
int max_same_industry_subtree(const TopicTree& tree, const std::string& doc_id,
                              const std::string& title_industry);

}  // namespace retsyn
