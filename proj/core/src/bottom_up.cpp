#include "retsyn/bottom_up.hpp"

#include <algorithm>

#include <json.hpp>

#include "retsyn/utf8.hpp"

namespace retsyn {

using nlohmann::json;

std::string_view level_name(QueryLevel level) {
    switch (level) {
        case QueryLevel::Sentence: return "sentence";
        case QueryLevel::Passage: return "passage";
        case QueryLevel::Topic: return "topic";
    }
    return "sentence";
}

std::optional<QueryLevel> level_from_name(std::string_view name) {
    if (name == "sentence") return QueryLevel::Sentence;
    if (name == "passage") return QueryLevel::Passage;
    if (name == "topic") return QueryLevel::Topic;
    return std::nullopt;
}

ChatRequest build_generation_prompt(const PassageChunk& passage) {
    json sentences = json::array();
    for (const auto& s : passage.sentences) sentences.push_back(s.text);

    std::string prompt;
    prompt +=
        "Given a passage from a financial report (provided as a list of sentences), "
        "generate hierarchical queries including both passage-level and sentence-level "
        "queries. Follow these requirements strictly and return results in JSON format.\n"
        "\n";
    prompt += "Input: " + sentences.dump() + "\n";
    prompt +=
        "\n"
        "Requirements:\n"
        "1. Ignore disclaimers, copyright notices, or sensitive information\n"
        "2. Include passage-specific information (company names, events, data)\n"
        "3. Use empty string (\"\") for unclear sentences\n"
        "4. Return in specified JSON format\n"
        "\n"
        "Output Format: {\"passage_query\": \"query 0\", \"sentence_queries\": "
        "[\"Query 1\", \"Query 2\", ..., \"Query N\"]}";

    ChatRequest request;
    request.messages.push_back({"user", std::move(prompt)});
    return request;
}

namespace {

// Strips optional markdown fences and surrounding noise down to the outermost
// JSON value.
std::string extract_json_body(const std::string& body) {
    std::size_t fence = body.find("```");
    if (fence != std::string::npos) {
        std::size_t start = body.find('\n', fence);
        if (start != std::string::npos) {
            std::size_t end = body.find("```", start);
            if (end != std::string::npos) return body.substr(start + 1, end - start - 1);
        }
    }
    std::size_t obj = body.find_first_of("{[");
    if (obj == std::string::npos) return body;
    std::size_t close = body.find_last_of("}]");
    if (close == std::string::npos || close < obj) return body;
    return body.substr(obj, close - obj + 1);
}

}  // namespace

Expected<HierarchicalQuerySet> parse_generation_response(const std::string& body,
                                                         std::size_t n_sentences) {
    json j = json::parse(extract_json_body(body), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        return BackendError{BackendErrorKind::MalformedBody, 0,
                            "generation response is not a JSON object", true};
    }
    if (!j.contains("passage_query") || !j["passage_query"].is_string()) {
        return BackendError{BackendErrorKind::MalformedBody, 0,
                            "generation response missing string 'passage_query'", true};
    }
    if (!j.contains("sentence_queries") || !j["sentence_queries"].is_array()) {
        return BackendError{BackendErrorKind::MalformedBody, 0,
                            "generation response missing array 'sentence_queries'", true};
    }
    HierarchicalQuerySet set;
    set.passage_query = j["passage_query"].get<std::string>();
    for (const auto& q : j["sentence_queries"]) {
        if (!q.is_string()) {
            return BackendError{BackendErrorKind::MalformedBody, 0,
                                "sentence_queries entries must be strings", true};
        }
        set.sentence_queries.push_back(q.get<std::string>());
    }
    if (set.sentence_queries.size() != n_sentences) {
        return BackendError{BackendErrorKind::MalformedBody, 0,
                            "sentence_queries length " + std::to_string(set.sentence_queries.size()) +
                                " does not match sentence count " + std::to_string(n_sentences),
                            true};
    }
    return set;
}

HierarchicalQuerySet generate_queries(ChatBackend& backend, const PassageChunk& passage,
                                      int retries, const RetryDelays& delays,
                                      double temperature) {
    ChatRequest request = build_generation_prompt(passage);
    request.temperature = temperature;
    request.retries = retries;

    std::optional<HierarchicalQuerySet> wrong_length;
    for (int attempt = 0; attempt <= retries; ++attempt) {
        auto response = chat(backend, request, delays);
        if (!response.ok()) {
            throw BackendFailureError("chat backend failed for passage " + passage.passage_id +
                                      ": " + response.error().message);
        }
        auto parsed = parse_generation_response(response.value().text, passage.sentences.size());
        if (parsed.ok()) {
            auto set = parsed.take();
            set.passage_id = passage.passage_id;
            return set;
        }
        // Keep the best malformed candidate for the repair path.
        json j = json::parse(extract_json_body(response.value().text), nullptr, false);
        if (!j.is_discarded() && j.is_object() && j.contains("passage_query") &&
            j["passage_query"].is_string() && j.contains("sentence_queries") &&
            j["sentence_queries"].is_array()) {
            HierarchicalQuerySet candidate;
            candidate.passage_query = j["passage_query"].get<std::string>();
            for (const auto& q : j["sentence_queries"]) {
                candidate.sentence_queries.push_back(q.is_string() ? q.get<std::string>()
                                                                   : std::string());
            }
            wrong_length = std::move(candidate);
        }
    }

    // Repair: pad/truncate to the sentence count and flag the record.
    HierarchicalQuerySet set;
    if (wrong_length) set = std::move(*wrong_length);
    set.passage_id = passage.passage_id;
    set.sentence_queries.resize(passage.sentences.size());
    set.repaired = true;
    return set;
}

std::vector<std::string> default_referents() {
    return {"该公司", "公司", "the company"};
}

namespace {

bool is_ascii_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool ascii_word_bounded(const std::string& text, std::size_t pos, std::size_t len) {
    if (pos > 0 && is_ascii_word_char(text[pos - 1])) return false;
    if (pos + len < text.size() && is_ascii_word_char(text[pos + len])) return false;
    return true;
}

bool has_ascii_letter(const std::string& s) {
    return std::any_of(s.begin(), s.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    });
}

}  // namespace

std::string complete_entity_text(const std::string& text, const std::string& company,
                                 const std::vector<std::string>& referents,
                                 std::size_t* replaced) {
    if (company.empty() || referents.empty()) {
        if (replaced) *replaced = 0;
        return text;
    }
    std::vector<std::string> ordered = referents;
    std::sort(ordered.begin(), ordered.end(),
              [](const std::string& a, const std::string& b) { return a.size() > b.size(); });

    std::string out;
    out.reserve(text.size());
    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        // Never rewrite inside an occurrence of the company name itself.
        if (text.compare(pos, company.size(), company) == 0) {
            out += company;
            pos += company.size();
            continue;
        }
        bool matched = false;
        for (const auto& referent : ordered) {
            if (referent.empty() || text.compare(pos, referent.size(), referent) != 0) continue;
            if (has_ascii_letter(referent) && !ascii_word_bounded(text, pos, referent.size())) {
                continue;
            }
            out += company;
            pos += referent.size();
            ++count;
            matched = true;
            break;
        }
        if (!matched) {
            std::size_t size = cp_size_at(text, pos);
            out.append(text, pos, size);
            pos += size;
        }
    }
    if (replaced) *replaced = count;
    return out;
}

Query complete_entities(Query query, const std::optional<std::string>& company,
                        const std::vector<std::string>& referents) {
    if (!company || company->empty()) return query;
    query.text = complete_entity_text(query.text, *company, referents);
    return query;
}

MergeResult merge_doc_queries(const std::string& doc_id,
                              const std::vector<PassageChunk>& passages,
                              const std::vector<HierarchicalQuerySet>& sets) {
    MergeResult result;
    for (std::size_t i = 0; i < passages.size() && i < sets.size(); ++i) {
        const auto& passage = passages[i];
        const auto& set = sets[i];
        if (!set.passage_query.empty()) {
            Query q;
            q.query_id = passage.passage_id;
            q.text = set.passage_query;
            q.level = QueryLevel::Passage;
            q.doc_id = doc_id;
            q.passage_id = passage.passage_id;
            result.queries.push_back(std::move(q));
        } else {
            ++result.empty_skipped;
        }
        for (std::size_t s = 0; s < set.sentence_queries.size(); ++s) {
            if (set.sentence_queries[s].empty()) {
                ++result.empty_skipped;
                continue;
            }
            Query q;
            q.query_id = s < passage.sentences.size() ? passage.sentences[s].sentence_id
                                                      : sentence_id_for(passage.passage_id, s);
            q.text = set.sentence_queries[s];
            q.level = QueryLevel::Sentence;
            q.doc_id = doc_id;
            q.passage_id = passage.passage_id;
            q.sentence_id = q.query_id;
            result.queries.push_back(std::move(q));
        }
    }
    return result;
}

}  // namespace retsyn
