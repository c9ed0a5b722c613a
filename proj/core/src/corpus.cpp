#include "retsyn/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

#include <json.hpp>

#include "retsyn/dates.hpp"
#include "retsyn/io.hpp"
#include "retsyn/utf8.hpp"

namespace retsyn {

namespace {

bool is_terminal(char32_t cp) { return cp == U'。' || cp == U'！' || cp == U'？'; }
bool is_semi(char32_t cp) { return cp == U'；'; }

// Fragment boundaries: byte ranges ending after a terminal (or at EOS).
std::vector<std::pair<std::size_t, std::size_t>> split_fragments(std::string_view text) {
    std::vector<std::pair<std::size_t, std::size_t>> frags;
    std::size_t start = 0, pos = 0;
    while (pos < text.size()) {
        std::size_t size = cp_size_at(text, pos);
        char32_t cp = cp_at(text, pos);
        pos += size;
        if (is_terminal(cp)) {
            frags.emplace_back(start, pos);
            start = pos;
        }
    }
    if (start < text.size()) frags.emplace_back(start, text.size());
    return frags;
}

}  // namespace

std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\r') {
            if (i + 1 < text.size() && text[i + 1] == '\n') continue;  // CRLF -> LF
            out.push_back('\n');
            continue;
        }
        out.push_back(text[i]);
    }
    // Trim leading/trailing whitespace code points.
    std::size_t begin = 0;
    while (begin < out.size()) {
        if (!is_space_cp(cp_at(out, begin))) break;
        begin += cp_size_at(out, begin);
    }
    std::size_t end = out.size();
    while (end > begin) {
        std::size_t prev = begin;
        std::size_t pos = begin;
        while (pos < end) {
            prev = pos;
            pos += cp_size_at(out, pos);
        }
        if (!is_space_cp(cp_at(out, prev))) break;
        end = prev;
    }
    return out.substr(begin, end - begin);
}

std::string passage_id_for(const std::string& doc_id, std::size_t ordinal) {
    return doc_id + "-p" + std::to_string(ordinal);
}

std::string sentence_id_for(const std::string& passage_id, std::size_t ordinal) {
    return passage_id + "-s" + std::to_string(ordinal);
}

LoadResult load_corpus(const std::filesystem::path& path) {
    LoadResult result;
    std::set<std::string> seen;
    for_each_line(path, [&](std::size_t line_no, std::string_view line) {
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError(line_no, "malformed JSON");
        if (!j.is_object()) throw ParseError(line_no, "expected a JSON object");
        auto need_string = [&](const char* key) -> std::string {
            if (!j.contains(key)) throw ParseError(line_no, std::string("missing field '") + key + "'");
            if (!j[key].is_string()) throw ParseError(line_no, std::string("field '") + key + "' must be a string");
            return j[key].get<std::string>();
        };
        Document doc;
        doc.doc_id = need_string("id");
        doc.title = need_string("title");
        doc.text = normalize_text(need_string("text"));
        doc.publish_date = need_string("date");
        doc.report_type = need_string("report_type");
        if (j.contains("company") && !j["company"].is_null()) {
            if (!j["company"].is_string()) throw ParseError(line_no, "field 'company' must be a string");
            doc.company = j["company"].get<std::string>();
        }
        if (doc.text.empty()) throw ParseError(line_no, "field 'text' is empty after normalization");
        if (!parse_iso_date(doc.publish_date)) {
            throw ParseError(line_no, "field 'date' is not an ISO-8601 date: '" + doc.publish_date + "'");
        }
        if (!seen.insert(doc.doc_id).second) {
            result.warnings.push_back({line_no, "duplicate doc id '" + doc.doc_id + "' ignored (first wins)"});
            return;
        }
        result.documents.push_back(std::move(doc));
    });
    return result;
}

std::vector<PassageChunk> segment_passages(const Document& doc, std::size_t passage_max_len) {
    std::vector<PassageChunk> passages;
    std::string_view text = doc.text;
    if (text.empty()) return passages;

    auto emit = [&](std::size_t begin, std::size_t end) {
        PassageChunk p;
        p.doc_id = doc.doc_id;
        p.ordinal = passages.size();
        p.passage_id = passage_id_for(doc.doc_id, p.ordinal);
        p.text = std::string(text.substr(begin, end - begin));
        p.char_len = cp_len(p.text);
        passages.push_back(std::move(p));
    };

    auto frags = split_fragments(text);
    std::size_t cur_begin = frags.empty() ? 0 : frags.front().first;
    std::size_t cur_len = 0;

    std::size_t i = 0;
    while (i < frags.size()) {
        auto [fb, fe] = frags[i];
        std::size_t flen = cp_len(text.substr(fb, fe - fb));
        if (cur_len + flen <= passage_max_len) {
            cur_len += flen;
            ++i;
            continue;
        }
        if (cur_len > 0) {
            // Close the passage at the previous sentence boundary.
            emit(cur_begin, fb);
            cur_begin = fb;
            cur_len = 0;
            continue;
        }
        // Single over-long sentence: prefer the last ； within the cap, else hard cut.
        std::size_t cut = fb;
        std::size_t best_semi = std::string::npos;
        std::size_t seen_cps = 0;
        std::size_t pos = fb;
        while (pos < fe && seen_cps < passage_max_len) {
            char32_t cp = cp_at(text, pos);
            pos += cp_size_at(text, pos);
            ++seen_cps;
            if (is_semi(cp)) best_semi = pos;  // cut after the ；
            cut = pos;
        }
        std::size_t cut_at = (best_semi != std::string::npos) ? best_semi : cut;
        emit(cur_begin, cut_at);
        // Re-enter the remainder of this fragment.
        frags[i].first = cut_at;
        cur_begin = cut_at;
        cur_len = 0;
    }
    if (cur_len > 0) emit(cur_begin, text.size());
    return passages;
}

std::vector<SentenceChunk> segment_sentences(const PassageChunk& passage,
                                             std::size_t sentence_max_len) {
    std::vector<SentenceChunk> out;
    std::string_view text = passage.text;
    if (text.empty()) return out;

    auto frags = split_fragments(text);
    std::size_t acc_begin = 0, acc_end = 0, acc_len = 0;
    auto flush = [&]() {
        if (acc_end == acc_begin) return;
        SentenceChunk s;
        s.sentence_id = sentence_id_for(passage.passage_id, out.size());
        s.text = std::string(text.substr(acc_begin, acc_end - acc_begin));
        s.oversize = acc_len > sentence_max_len;
        out.push_back(std::move(s));
    };
    for (auto [fb, fe] : frags) {
        std::size_t flen = cp_len(text.substr(fb, fe - fb));
        if (acc_len == 0) {
            acc_begin = fb;
            acc_end = fe;
            acc_len = flen;
        } else if (acc_len + flen <= sentence_max_len) {
            acc_end = fe;
            acc_len += flen;
        } else {
            flush();
            acc_begin = fb;
            acc_end = fe;
            acc_len = flen;
        }
    }
    flush();
    return out;
}

CleanRules default_clean_rules() {
    CleanRules rules;
    rules.drop_keywords = {
        "免责声明", "分析师声明", "法律声明", "披露声明", "评级说明",
        "版权所有",  "隐私政策",  "风险提示：本报告", "disclaimer", "all rights reserved",
    };
    return rules;
}

namespace {

double url_density(std::string_view text, std::size_t total_cps) {
    static const std::regex kUrl(R"((https?://|www\.)[!-~]+)", std::regex::icase);
    std::size_t url_cps = 0;
    auto begin = std::cregex_iterator(text.data(), text.data() + text.size(), kUrl);
    for (auto it = begin; it != std::cregex_iterator(); ++it) {
        url_cps += cp_len(std::string_view(text.data() + it->position(), it->length()));
    }
    return total_cps == 0 ? 0.0 : static_cast<double>(url_cps) / static_cast<double>(total_cps);
}

bool is_table_char(char32_t cp) {
    if (cp >= U'0' && cp <= U'9') return true;
    if (cp >= 0xFF10 && cp <= 0xFF19) return true;  // full-width digits
    switch (cp) {
        case U'.': case U',': case U'%': case U'|': case U'/': case U'\\':
        case U'-': case U'+': case U':': case U';': case U'(': case U')':
        case U'[': case U']': case U' ': case U'\t': case U'\n':
        case U'，': case U'．': case U'％': case U'｜': case U'／':
        case U'－': case U'：': case U'；': case U'（': case U'）': case U'、':
            return true;
        default:
            return false;
    }
}

double table_char_ratio(std::string_view text, std::size_t total_cps) {
    if (total_cps == 0) return 0.0;
    std::size_t hits = 0, pos = 0;
    while (pos < text.size()) {
        if (is_table_char(cp_at(text, pos))) ++hits;
        pos += cp_size_at(text, pos);
    }
    return static_cast<double>(hits) / static_cast<double>(total_cps);
}

bool caption_prefix(std::string_view text) {
    // 图/表/图表/Figure/Table/Fig. followed by a digit (half or full width).
    // Full-width digits are spelled out: byte-mode regex ranges cannot span
    // multi-byte characters.
    static const std::regex kCaption(
        R"(^[\s]*(图表|图|表|Figure|Fig\.?|Table)[\s]*([0-9]|０|１|２|３|４|５|６|７|８|９))");
    std::string head(text.substr(0, std::min<std::size_t>(text.size(), 96)));
    return std::regex_search(head, kCaption);
}

}  // namespace

CleanOutcome clean_passages(const std::vector<PassageChunk>& passages, const CleanRules& rules,
                            QualityScorer* scorer, double drop_threshold, ScorerPolicy policy) {
    CleanOutcome outcome;
    outcome.report.total = passages.size();
    bool scorer_warned = false;

    for (const auto& p : passages) {
        std::vector<std::string> fired;
        std::size_t total_cps = p.char_len ? p.char_len : cp_len(p.text);
        if (url_density(p.text, total_cps) > rules.url_density_max) fired.push_back("url_density");
        if (table_char_ratio(p.text, total_cps) > rules.table_char_ratio_max) fired.push_back("table_like");
        for (const auto& kw : rules.drop_keywords) {
            if (!kw.empty() && p.text.find(kw) != std::string::npos) {
                fired.push_back("keyword");
                break;
            }
        }
        if (caption_prefix(p.text)) fired.push_back("caption_prefix");

        if (scorer) {
            auto quality = scorer->score(p.text);
            if (quality.ok()) {
                if (quality.value() < drop_threshold) fired.push_back("quality_score");
            } else if (policy == ScorerPolicy::FailStage) {
                throw BackendFailureError("quality scorer failed: " + quality.error().message);
            } else if (!scorer_warned) {
                outcome.warnings.push_back("quality scorer unavailable, falling back to rules only: " +
                                           quality.error().message);
                scorer_warned = true;
            }
        }

        if (fired.empty()) {
            outcome.kept.push_back(p);
        } else {
            outcome.dropped.push_back(p);
            for (const auto& rule : fired) ++outcome.report.per_rule_counts[rule];
        }
    }
    outcome.report.dropped = outcome.dropped.size();
    outcome.report.drop_fraction =
        outcome.report.total == 0
            ? 0.0
            : static_cast<double>(outcome.report.dropped) / static_cast<double>(outcome.report.total);
    return outcome;
}

std::vector<std::string> default_company_patterns() {
    // Company token before a report-type keyword, with optional bracketed
    // ticker and year in between. The year variant comes first: an optional
    // year group would leak its digits into the lazy capture, since the
    // engine prefers growing the capture over re-entering the group.
    static const std::string kKeywords =
        "(?:年报|年度报告|半年报|中报|一季报|三季报|季报|业绩快报|业绩点评|业绩|点评|深度报告|"
        "深度研究|深度|研究报告|调研报告|调研|首次覆盖|跟踪报告|动态报告|公告)";
    return {
        "^(.+?)(?:（.*?）)?(?:[0-9]{4}年|[0-9]{4})" + kKeywords,
        "^(.+?)(?:（.*?）)?" + kKeywords,
    };
}

namespace {

// Generic prefixes that regex capture must not end with: they mark industry
// or market reports rather than company names.
const std::vector<std::string>& capture_stop_suffixes() {
    static const std::vector<std::string> kStops = {"行业", "市场", "宏观", "策略", "专题", "周期"};
    return kStops;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::optional<std::string> extract_company(const std::string& title,
                                           const std::vector<std::string>& patterns) {
    for (const auto& pattern : patterns) {
        std::regex re(pattern);
        std::smatch m;
        if (std::regex_search(title, m, re) && m.size() > 1 && m[1].matched) {
            std::string captured = m[1].str();
            if (captured.empty()) continue;
            bool generic = false;
            for (const auto& stop : capture_stop_suffixes()) {
                if (ends_with(captured, stop)) {
                    generic = true;
                    break;
                }
            }
            if (generic) continue;
            return captured;
        }
    }
    return std::nullopt;
}

std::optional<std::string> resolve_company(const Document& doc,
                                           const std::vector<std::string>& patterns) {
    if (doc.company && !doc.company->empty()) return doc.company;
    return extract_company(doc.title, patterns);
}

bool natural_id_less(std::string_view a, std::string_view b) {
    std::size_t i = 0, j = 0;
    auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
    while (i < a.size() && j < b.size()) {
        if (is_digit(a[i]) && is_digit(b[j])) {
            std::size_t i2 = i, j2 = j;
            while (i2 < a.size() && is_digit(a[i2])) ++i2;
            while (j2 < b.size() && is_digit(b[j2])) ++j2;
            std::string_view da = a.substr(i, i2 - i), db = b.substr(j, j2 - j);
            std::string_view ta = da.substr(std::min(da.find_first_not_of('0'), da.size()));
            std::string_view tb = db.substr(std::min(db.find_first_not_of('0'), db.size()));
            if (ta.size() != tb.size()) return ta.size() < tb.size();
            if (ta != tb) return ta < tb;
            i = i2;
            j = j2;
            continue;
        }
        if (a[i] != b[j]) return static_cast<unsigned char>(a[i]) < static_cast<unsigned char>(b[j]);
        ++i;
        ++j;
    }
    return a.size() - i < b.size() - j;
}

}  // namespace retsyn
