#pragma once

// Deterministic synthetic corpora for tests and benchmarks.
//
// The pipeline corpus is built from fixed-width sentences (exactly 100 code
// points) so passages fall on exact 500-point boundaries:
//   p0: title-led sentence + doc body        (topic-level overlap)
//   p1: topic boilerplate + body + repeat R  (passage-level overlap)
//   p2: body + repeat R                      (sentence-level overlap)
//   p3: disclaimer block                     (dropped by cleaning)

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "retsyn/corpus.hpp"
#include "retsyn/io.hpp"
#include "retsyn/rng.hpp"
#include "retsyn/utf8.hpp"

namespace retsyn::testsupport {

inline std::string cjk_numeral(std::size_t n) {
    static const std::array<const char*, 12> kNum = {"一", "二", "三", "四", "五", "六",
                                                     "七", "八", "九", "十", "百", "千"};
    std::string out;
    do {
        out += kNum[n % kNum.size()];
        n /= kNum.size();
    } while (n > 0);
    return out;
}

// core + "，" + filler + "。", exactly `target` code points.
inline std::string pad_sentence(const std::string& core, std::size_t target = 100) {
    std::size_t core_len = cp_len(core);
    if (core_len + 2 > target) return core + "。";
    std::string out = core + "，";
    for (std::size_t i = core_len + 2; i < target; ++i) out += "之";
    out += "。";
    return out;
}

struct TopicSpecFixture {
    std::string industry;     // taxonomy keyword, classifies titles
    std::string title_body;   // per-topic title template after the company
    std::string boilerplate;  // identical lead sentence of p1 within the topic
};

inline const std::vector<TopicSpecFixture>& topic_fixtures() {
    static const std::vector<TopicSpecFixture> kTopics = {
        {"钢铁", "年报点评：钢铁产量与需求分析", "本文系统梳理钢铁行业的基本面变化与投资主线"},
        {"银行", "业绩快报解读：银行息差与资产质量观察", "本文系统梳理银行板块的盈利结构与风险走势"},
        {"医药", "深度研究：创新药管线与集采影响展望", "本文系统梳理医药产业的研发进展与政策环境"},
        {"汽车", "调研报告：智能汽车出海与销量前瞻", "本文系统梳理汽车产业链的竞争格局与出海节奏"},
    };
    return kTopics;
}

struct SynthOptions {
    int topics = 4;
    int docs_per_topic = 7;
    int extra_docs = 2;  // off-topic strays, likely noise
    std::uint64_t seed = 42;
};

inline std::string date_from_index(std::size_t i) {
    int month = 1 + static_cast<int>(i % 12);
    int day = 3 + static_cast<int>((i * 7) % 25);
    int year = 2022 + static_cast<int>((i / 12) % 2);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

inline std::vector<Document> make_pipeline_corpus(const SynthOptions& opt = {}) {
    static const std::array<const char*, 8> kPrefixes = {"华鑫", "宏远", "泰和", "金石",
                                                         "中瑞", "东升", "瑞丰", "联创"};
    std::vector<Document> docs;
    SplitMix rng(opt.seed);
    std::size_t index = 0;
    for (int t = 0; t < opt.topics; ++t) {
        const auto& topic = topic_fixtures()[static_cast<std::size_t>(t) % topic_fixtures().size()];
        for (int d = 0; d < opt.docs_per_topic; ++d, ++index) {
            std::string company =
                std::string(kPrefixes[static_cast<std::size_t>(d) % kPrefixes.size()]) +
                topic.industry;
            Document doc;
            doc.doc_id = "doc" + std::to_string(index);
            doc.title = company + topic.title_body + cjk_numeral(static_cast<std::size_t>(d));
            doc.publish_date = date_from_index(index);
            doc.report_type = d % 2 == 0 ? "company" : "industry";
            if (index == 0) doc.company = company;  // metadata precedence path

            std::string repeat_core = "公司主营业务收入与净利润保持稳定增长态势";
            auto body = [&](int k) {
                return pad_sentence("公司" + topic.industry + "业务板块" + cjk_numeral(k) +
                                    "经营表现" + cjk_numeral(rng.bounded(9)) + "稳健");
            };
            std::string text;
            text += pad_sentence(doc.title);  // p0 lead: title as first clause
            for (int k = 0; k < 4; ++k) text += body(k);
            text += pad_sentence(topic.boilerplate);  // p1 lead: shared within topic
            for (int k = 4; k < 7; ++k) text += body(k);
            text += pad_sentence(repeat_core);  // repeated sentence, first copy
            for (int k = 7; k < 11; ++k) text += body(k);
            text += pad_sentence(repeat_core);  // second copy, different passage
            text += pad_sentence("免责声明：本报告仅供研究使用，不构成任何投资建议");
            text += pad_sentence("分析师声明：署名分析师具备相应的执业资格");
            doc.text = std::move(text);
            docs.push_back(std::move(doc));
        }
    }
    for (int e = 0; e < opt.extra_docs; ++e, ++index) {
        Document doc;
        doc.doc_id = "doc" + std::to_string(index);
        doc.title = "宏观经济与大类资产配置月度观察" + cjk_numeral(static_cast<std::size_t>(e));
        doc.publish_date = date_from_index(index);
        doc.report_type = "strategy";
        std::string text;
        for (int k = 0; k < 10; ++k) {
            text += pad_sentence("宏观层面" + cjk_numeral(static_cast<std::size_t>(k)) + "号指标走势" +
                                 cjk_numeral(rng.bounded(9)) + "波动");
        }
        doc.text = std::move(text);
        docs.push_back(std::move(doc));
    }
    return docs;
}

inline void write_corpus_jsonl(const std::vector<Document>& docs,
                               const std::filesystem::path& path) {
    std::vector<nlohmann::json> rows;
    rows.reserve(docs.size());
    for (const auto& doc : docs) {
        nlohmann::json row{{"id", doc.doc_id},
                           {"title", doc.title},
                           {"text", doc.text},
                           {"date", doc.publish_date},
                           {"report_type", doc.report_type}};
        if (doc.company) row["company"] = *doc.company;
        rows.push_back(std::move(row));
    }
    write_jsonl(path, rows);
}

// Random documents for chunk round-trip checks: mixed CJK/ASCII sentences,
// stray CRLFs and surrounding whitespace, occasional over-long sentences.
inline std::vector<Document> make_random_documents(std::size_t count, std::uint64_t seed) {
    std::vector<Document> docs;
    SplitMix rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        Document doc;
        doc.doc_id = "rand" + std::to_string(i);
        doc.title = "随机文档" + cjk_numeral(i);
        doc.publish_date = date_from_index(i);
        doc.report_type = "random";
        std::string text = "  ";
        std::size_t sentences = 1 + rng.bounded(24);
        for (std::size_t s = 0; s < sentences; ++s) {
            std::size_t length = 5 + rng.bounded(140);
            if (rng.bounded(12) == 0) length = 520 + rng.bounded(300);  // over-long sentence
            for (std::size_t c = 0; c < length; ++c) {
                switch (rng.bounded(8)) {
                    case 0: text += static_cast<char>('a' + rng.bounded(26)); break;
                    case 1: text += static_cast<char>('0' + rng.bounded(10)); break;
                    case 2:
                        if (rng.bounded(10) == 0) {
                            text += "；";
                            break;
                        }
                        [[fallthrough]];
                    default:
                        text += encode_utf8(static_cast<char32_t>(0x4E00 + rng.bounded(2000)));
                }
            }
            switch (rng.bounded(5)) {
                case 0: text += "！"; break;
                case 1: text += "？"; break;
                case 2: text += "。"; break;
                case 3: text += "。"; if (rng.bounded(3) == 0) text += "\r\n"; break;
                default: text += "。";
            }
        }
        text += " ";
        doc.text = normalize_text(text);
        if (doc.text.empty()) doc.text = "空。";
        docs.push_back(std::move(doc));
    }
    return docs;
}

}  // namespace retsyn::testsupport
