#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "retsyn/errors.hpp"

namespace retsyn {

struct Document {
    std::string doc_id;
    std::string title;
    std::string text;          // normalized: CRLF folded to LF, trimmed
    std::string publish_date;  // ISO-8601 date
    std::string report_type;
    std::optional<std::string> company;
};

struct SentenceChunk {
    std::string sentence_id;
    std::string text;
    bool oversize = false;  // single fragment longer than the cap, kept whole
};

struct PassageChunk {
    std::string passage_id;
    std::string doc_id;
    std::size_t ordinal = 0;
    std::string text;
    std::size_t char_len = 0;  // code points, not bytes
    std::vector<SentenceChunk> sentences;
};

struct CleaningReport {
    std::size_t total = 0;
    std::size_t dropped = 0;
    double drop_fraction = 0.0;
    std::map<std::string, std::size_t> per_rule_counts;
};

struct LoadWarning {
    std::size_t line_no = 0;
    std::string message;
};

struct LoadResult {
    std::vector<Document> documents;  // input order; duplicate ids keep first
    std::vector<LoadWarning> warnings;
};

// JSONL with keys id, title, text, date, report_type, optional company.
// Malformed lines raise ParseError naming the line; duplicate ids warn.
LoadResult load_corpus(const std::filesystem::path& path);

std::string normalize_text(std::string_view text);

std::string passage_id_for(const std::string& doc_id, std::size_t ordinal);
std::string sentence_id_for(const std::string& passage_id, std::size_t ordinal);

// Greedy fill up to `passage_max_len` code points, cutting at sentence-terminal
// punctuation (。！？), then at ；, then hard. Outputs concatenate to the input.
std::vector<PassageChunk> segment_passages(const Document& doc, std::size_t passage_max_len = 500);

// Splits at 。！？ and greedily re-merges neighbours while the merged chunk
// stays within `sentence_max_len`; an over-long single fragment is kept whole
// and flagged.
std::vector<SentenceChunk> segment_sentences(const PassageChunk& passage,
                                             std::size_t sentence_max_len = 100);

struct CleanRules {
    double url_density_max = 0.1;
    double table_char_ratio_max = 0.4;
    std::vector<std::string> drop_keywords;  // disclaimers, privacy boilerplate
};
CleanRules default_clean_rules();

class QualityScorer {
  public:
    virtual ~QualityScorer() = default;
    // Quality in [0, 1]; higher is better.
    virtual Expected<double> score(const std::string& text) = 0;
};

// Stand-in when no scorer backend is configured.
class PassthroughScorer : public QualityScorer {
  public:
    Expected<double> score(const std::string&) override { return 1.0; }
};

enum class ScorerPolicy { FailStage, RuleOnly };

struct CleanOutcome {
    std::vector<PassageChunk> kept;
    std::vector<PassageChunk> dropped;
    CleaningReport report;
    std::vector<std::string> warnings;
};

CleanOutcome clean_passages(const std::vector<PassageChunk>& passages, const CleanRules& rules,
                            QualityScorer* scorer, double drop_threshold = 0.5,
                            ScorerPolicy policy = ScorerPolicy::RuleOnly);

// First capturing match wins. Patterns are ECMAScript regexes over UTF-8 bytes
// with the company token captured in group 1.
std::optional<std::string> extract_company(const std::string& title,
                                           const std::vector<std::string>& patterns);
std::vector<std::string> default_company_patterns();

// Metadata wins over title extraction.
std::optional<std::string> resolve_company(const Document& doc,
                                           const std::vector<std::string>& patterns);

// Numeric-aware id comparison: digit runs compare as numbers, so
// "doc2-p10" sorts after "doc2-p9".
bool natural_id_less(std::string_view a, std::string_view b);

}  // namespace retsyn
