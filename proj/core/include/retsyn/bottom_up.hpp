#pragma once

#include <optional>
#include <string>
#include <vector>

#include "retsyn/corpus.hpp"
#include "retsyn/gateway.hpp"

namespace retsyn {

enum class QueryLevel { Sentence, Passage, Topic };

std::string_view level_name(QueryLevel level);
std::optional<QueryLevel> level_from_name(std::string_view name);

struct Query {
    std::string query_id;
    std::string text;
    QueryLevel level = QueryLevel::Sentence;
    std::string doc_id;
    std::string passage_id;                  // empty for topic-level queries
    std::optional<std::string> sentence_id;  // sentence-level only
    std::optional<std::string> topic_id;     // topic-level only
};

// One LLM call yields a passage-level query plus one aligned query per
// sentence; empty strings mark sentences the model found unclear.
struct HierarchicalQuerySet {
    std::string passage_id;
    std::string passage_query;
    std::vector<std::string> sentence_queries;  // same length as passage.sentences
    bool repaired = false;                      // padded/truncated after retry budget
};

// Embeds the sentence list as a JSON array inside the fixed instruction
// template.
ChatRequest build_generation_prompt(const PassageChunk& passage);

// Accepts optional markdown code fences; validates key names and list length.
// Length mismatches and unparsable bodies are retryable errors.
Expected<HierarchicalQuerySet> parse_generation_response(const std::string& body,
                                                         std::size_t n_sentences);

// Retry-then-repair: after the retry budget, a wrong-length list is padded or
// truncated with empty strings and the record is flagged.
HierarchicalQuerySet generate_queries(ChatBackend& backend, const PassageChunk& passage,
                                      int retries, const RetryDelays& delays = {},
                                      double temperature = 0.2);

std::vector<std::string> default_referents();

// Replaces ambiguous referents (公司, 该公司, ...) with the resolved company
// name. Whole-token for ASCII referents, longest referent first; occurrences
// inside the company name itself are never rewritten.
std::string complete_entity_text(const std::string& text, const std::string& company,
                                 const std::vector<std::string>& referents,
                                 std::size_t* replaced = nullptr);

Query complete_entities(Query query, const std::optional<std::string>& company,
                        const std::vector<std::string>& referents);

struct MergeResult {
    std::vector<Query> queries;       // doc order: passage query, then sentence queries
    std::size_t empty_skipped = 0;    // empty-string queries excluded
};

// Turns per-passage query sets into Query records with provenance; empty
// strings are excluded and counted.
MergeResult merge_doc_queries(const std::string& doc_id,
                              const std::vector<PassageChunk>& passages,
                              const std::vector<HierarchicalQuerySet>& sets);

}  // namespace retsyn
