#include "retsyn/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <semaphore>
#include <set>

#include <httplib.h>
#include <json.hpp>

#include "retsyn/rng.hpp"
#include "retsyn/utf8.hpp"

namespace retsyn {

using nlohmann::json;

Expected<ChatResponse> chat(ChatBackend& backend, const ChatRequest& request,
                            const RetryDelays& delays) {
    auto delay = delays.initial;
    for (int attempt = 0;; ++attempt) {
        auto result = backend.complete(request);
        if (result.ok() || !result.error().retryable || attempt >= request.retries) return result;
        if (delay.count() > 0) std::this_thread::sleep_for(delay);
        delay = std::chrono::milliseconds(
            static_cast<long long>(static_cast<double>(delay.count()) * delays.factor));
    }
}

double cosine(const EmbedVector& a, const EmbedVector& b) {
    std::size_t n = std::min(a.values.size(), b.values.size());
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) na += a.values[i] * a.values[i];
    for (std::size_t i = 0; i < b.values.size(); ++i) nb += b.values[i] * b.values[i];
    for (std::size_t i = 0; i < n; ++i) dot += a.values[i] * b.values[i];
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// ---------------------------------------------------------------------------
// Mocks
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> bigrams_of(const std::string& text) {
    std::u32string cps;
    for (char32_t cp : decode_utf8(text)) {
        if (!is_space_cp(cp)) cps.push_back(cp);
    }
    std::vector<std::string> grams;
    if (cps.size() < 2) return grams;
    grams.reserve(cps.size() - 1);
    for (std::size_t i = 0; i + 1 < cps.size(); ++i) {
        grams.push_back(encode_utf8(cps[i]) + encode_utf8(cps[i + 1]));
    }
    return grams;
}

std::string strip_trailing_punct(std::string_view text) {
    auto offs = cp_offsets(text);
    std::size_t end = text.size();
    while (offs.size() >= 2) {
        std::size_t start = offs[offs.size() - 2];
        char32_t cp = cp_at(text, start);
        if (cp == U'。' || cp == U'！' || cp == U'？' || cp == U'；' || cp == U'，' ||
            is_space_cp(cp)) {
            end = start;
            offs.pop_back();
            continue;
        }
        break;
    }
    return std::string(text.substr(0, end));
}

// First clause of the first sentence: cut at the first comma/terminal.
std::string lead_clause(std::string_view text) {
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp = cp_at(text, pos);
        if (cp == U'，' || cp == U',' || cp == U'。' || cp == U'！' || cp == U'？' ||
            cp == U'；') {
            return std::string(text.substr(0, pos));
        }
        pos += cp_size_at(text, pos);
    }
    return std::string(text);
}

std::string extract_marked_line(const std::string& prompt, std::string_view marker) {
    std::size_t pos = prompt.find(marker);
    if (pos == std::string::npos) return {};
    pos += marker.size();
    std::size_t end = prompt.find('\n', pos);
    if (end == std::string::npos) end = prompt.size();
    return prompt.substr(pos, end - pos);
}

ChatResponse make_response(const std::string& prompt, std::string text) {
    ChatResponse resp;
    resp.usage.prompt_tokens = static_cast<long long>(cp_len(prompt));
    resp.usage.completion_tokens = static_cast<long long>(cp_len(text));
    resp.text = std::move(text);
    resp.finish_reason = "stop";
    return resp;
}

}  // namespace

Expected<ChatResponse> MockChatBackend::complete(const ChatRequest& request) {
    if (request.messages.empty()) {
        return BackendError{BackendErrorKind::MalformedBody, 0, "empty message list", false};
    }
    std::string prompt;
    for (const auto& m : request.messages) prompt += m.content;

    // Hierarchical query generation: derive queries from the embedded sentences.
    if (prompt.find("\"sentence_queries\"") != std::string::npos &&
        prompt.find("Input: ") != std::string::npos) {
        std::string input_line = extract_marked_line(prompt, "Input: ");
        json sentences = json::parse(input_line, nullptr, false);
        if (sentences.is_discarded() || !sentences.is_array()) {
            return BackendError{BackendErrorKind::MalformedBody, 0, "mock could not read input sentences", false};
        }
        json out;
        std::string first;
        for (const auto& s : sentences) {
            if (s.is_string() && !s.get<std::string>().empty()) {
                first = s.get<std::string>();
                break;
            }
        }
        out["passage_query"] = first.empty() ? std::string() : ("请概述" + lead_clause(first));
        json sq = json::array();
        for (const auto& s : sentences) {
            std::string text = s.is_string() ? s.get<std::string>() : std::string();
            std::string stripped = strip_trailing_punct(text);
            if (cp_len(stripped) < 4) {
                sq.push_back("");
            } else {
                sq.push_back(stripped + "是什么？");
            }
        }
        out["sentence_queries"] = std::move(sq);
        return make_response(prompt, out.dump());
    }

    // Topic intent generation: derive an intent and subqueries from keywords
    // and representative documents.
    if (prompt.find("\"subqueries\"") != std::string::npos) {
        std::string keyword_line = extract_marked_line(prompt, "keywords: ");
        std::string docs_line = extract_marked_line(prompt, "documents: ");
        json docs = json::parse(docs_line, nullptr, false);
        std::vector<std::string> titles;
        if (docs.is_array()) {
            for (const auto& d : docs) {
                if (d.is_string()) titles.push_back(d.get<std::string>());
            }
        }
        std::string first_kw = lead_clause(keyword_line);
        if (auto comma = first_kw.find(','); comma != std::string::npos) first_kw.resize(comma);
        json intent;
        intent["intent"] = "了解" + (first_kw.empty() ? std::string("该主题") : first_kw) + "的研究动态";
        json subs = json::array();
        for (std::size_t i = 0; i < titles.size() && i < 2; ++i) {
            subs.push_back("请概述" + titles[i]);
        }
        if (subs.empty()) subs.push_back("该主题的核心结论是什么？");
        intent["subqueries"] = std::move(subs);
        json out = json::array({intent});
        return make_response(prompt, out.dump());
    }

    // Synonymy judging: deterministic rating from the pair content.
    if (prompt.find("synonymy") != std::string::npos || prompt.find("同义") != std::string::npos) {
        std::uint64_t h = mix64(hash64(prompt), seed_);
        int rating = 1 + static_cast<int>(h % 5);
        std::string text = "Score: " + std::to_string(rating) +
                           ". Deterministic mock judgement of the sentence pair.";
        return make_response(prompt, text);
    }

    // Fallback: echo a digest of the prompt.
    std::uint64_t h = mix64(hash64(prompt), seed_);
    return make_response(prompt, "mock-response-" + std::to_string(h % 100000000ULL));
}

KeywordClassifier::KeywordClassifier(std::vector<std::pair<std::string, std::string>> table,
                                     std::vector<std::string> taxonomy)
    : table_(std::move(table)), taxonomy_(std::move(taxonomy)) {}

Expected<std::string> KeywordClassifier::classify(const std::string& text) {
    const std::string* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& [keyword, label] : table_) {
        if (keyword.empty()) continue;
        if (text.find(keyword) == std::string::npos) continue;
        if (keyword.size() > best_len) {
            best_len = keyword.size();
            best = &label;
        }
    }
    return best ? *best : std::string("none");
}

Expected<EmbedVector> BigramHashEmbedder::embed(const std::string& text) {
    EmbedVector v;
    v.values.assign(dim_, 0.0);
    auto grams = bigrams_of(text);
    if (grams.empty()) {
        v.values[0] = 1.0;
        v.degenerate = true;
        return v;
    }
    for (const auto& g : grams) {
        v.values[hash64(g) % dim_] += 1.0;
    }
    double norm = 0.0;
    for (double x : v.values) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v.values) x /= norm;
    return v;
}

Expected<RerankScore> BigramDiceReranker::rerank(const std::string& a, const std::string& b) {
    if (a == b) return RerankScore{1.0, false};
    auto ga = bigrams_of(a);
    auto gb = bigrams_of(b);
    std::set<std::string> sa(ga.begin(), ga.end());
    std::set<std::string> sb(gb.begin(), gb.end());
    if (sa.empty() && sb.empty()) return RerankScore{0.0, false};
    std::size_t inter = 0;
    for (const auto& g : sa) inter += sb.count(g);
    double dice = 2.0 * static_cast<double>(inter) /
                  static_cast<double>(sa.size() + sb.size());
    return RerankScore{dice, false};
}

const std::vector<std::string>& default_taxonomy() {
    static const std::vector<std::string> kTaxonomy = {
        "石油石化", "煤炭",   "有色金属", "电力及公用事业", "钢铁",     "基础化工", "建筑",
        "建材",     "轻工制造", "机械",   "电力设备及新能源", "国防军工", "汽车",     "商贸零售",
        "消费者服务", "家电",  "纺织服装", "医药",           "食品饮料", "农林牧渔", "银行",
        "非银行金融", "房地产", "交通运输", "电子",           "通信",     "计算机",   "传媒",
    };
    return kTaxonomy;
}

std::vector<std::pair<std::string, std::string>> default_classifier_table() {
    std::vector<std::pair<std::string, std::string>> table;
    for (const auto& label : default_taxonomy()) table.emplace_back(label, label);
    return table;
}

// ---------------------------------------------------------------------------
// HTTP backends
// ---------------------------------------------------------------------------

namespace {

struct ParsedUrl {
    std::string host_port;  // "http://host:port"
    std::string path;       // "/v1/chat"
};

Expected<ParsedUrl> parse_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        return BackendError{BackendErrorKind::Transport, 0, "malformed backend url: " + url, false};
    }
    std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http") {
        return BackendError{BackendErrorKind::Transport, 0,
                            "unsupported url scheme '" + scheme + "' (plain http only)", false};
    }
    auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl out;
    if (path_start == std::string::npos) {
        out.host_port = url;
        out.path = "/";
    } else {
        out.host_port = url.substr(0, path_start);
        out.path = url.substr(path_start);
    }
    return out;
}

// Shared plumbing: bounded in-flight requests, bearer auth, JSON bodies.
class HttpJsonClient {
  public:
    explicit HttpJsonClient(const HttpBackendConfig& config)
        : config_(config),
          in_flight_(std::max(1, config.max_in_flight)) {}

    Expected<json> post(const json& body) {
        auto parsed = parse_url(config_.url);
        if (!parsed.ok()) return parsed.error();

        in_flight_.acquire();
        struct Release {
            std::counting_semaphore<>& sem;
            ~Release() { sem.release(); }
        } release{in_flight_};

        httplib::Client client(parsed.value().host_port);
        client.set_connection_timeout(0, config_.connect_timeout_ms * 1000);
        client.set_read_timeout(config_.read_timeout_ms / 1000,
                                (config_.read_timeout_ms % 1000) * 1000);
        httplib::Headers headers;
        if (!config_.bearer_token.empty()) {
            headers.emplace("Authorization", "Bearer " + config_.bearer_token);
        }
        auto res = client.Post(parsed.value().path, headers, body.dump(), "application/json");
        if (!res) {
            return BackendError{BackendErrorKind::Transport, 0,
                                "transport error: " + httplib::to_string(res.error()), true};
        }
        if (res->status < 200 || res->status >= 300) {
            bool retryable = res->status >= 500 || res->status == 408 || res->status == 429;
            return BackendError{BackendErrorKind::HttpStatus, res->status,
                                "backend returned status " + std::to_string(res->status), retryable};
        }
        json parsed_body = json::parse(res->body, nullptr, false);
        if (parsed_body.is_discarded()) {
            return BackendError{BackendErrorKind::MalformedBody, res->status,
                                "backend body is not valid JSON", true};
        }
        return parsed_body;
    }

  private:
    HttpBackendConfig config_;
    std::counting_semaphore<> in_flight_;
};

class HttpChatBackend : public ChatBackend {
  public:
    explicit HttpChatBackend(const HttpBackendConfig& config)
        : client_(config), model_(config.model) {}

    Expected<ChatResponse> complete(const ChatRequest& request) override {
        json body;
        json messages = json::array();
        for (const auto& m : request.messages) {
            messages.push_back({{"role", m.role}, {"content", m.content}});
        }
        body["messages"] = std::move(messages);
        body["temperature"] = request.temperature;
        body["max_tokens"] = request.max_output_tokens;
        if (!model_.empty()) body["model"] = model_;

        auto res = client_.post(body);
        if (!res.ok()) return res.error();
        const json& j = res.value();
        if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty() ||
            !j["choices"][0].contains("message") ||
            !j["choices"][0]["message"].contains("content") ||
            !j["choices"][0]["message"]["content"].is_string()) {
            return BackendError{BackendErrorKind::MalformedBody, 0,
                                "chat response missing choices[0].message.content", true};
        }
        ChatResponse out;
        out.text = j["choices"][0]["message"]["content"].get<std::string>();
        out.finish_reason = j["choices"][0].value("finish_reason", std::string("stop"));
        if (j.contains("usage") && j["usage"].is_object()) {
            out.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0LL);
            out.usage.completion_tokens = j["usage"].value("completion_tokens", 0LL);
        }
        return out;
    }

  private:
    HttpJsonClient client_;
    std::string model_;
};

class HttpClassifier : public IndustryClassifier {
  public:
    HttpClassifier(const HttpBackendConfig& config, std::vector<std::string> taxonomy)
        : client_(config), taxonomy_(std::move(taxonomy)) {}

    Expected<std::string> classify(const std::string& text) override {
        auto res = client_.post(json{{"text", text}});
        if (!res.ok()) return res.error();
        if (!res.value().contains("label") || !res.value()["label"].is_string()) {
            return BackendError{BackendErrorKind::MalformedBody, 0,
                                "classify response missing string field 'label'", true};
        }
        std::string label = res.value()["label"].get<std::string>();
        if (label != "none" &&
            std::find(taxonomy_.begin(), taxonomy_.end(), label) == taxonomy_.end()) {
            return BackendError{BackendErrorKind::MalformedBody, 0,
                                "label '" + label + "' is outside the configured taxonomy", false};
        }
        return label;
    }

    const std::vector<std::string>& taxonomy() const override { return taxonomy_; }

  private:
    HttpJsonClient client_;
    std::vector<std::string> taxonomy_;
};

class HttpEmbedder : public Embedder {
  public:
    HttpEmbedder(const HttpBackendConfig& config, std::size_t dim)
        : client_(config), dim_(dim) {}

    Expected<EmbedVector> embed(const std::string& text) override {
        auto res = client_.post(json{{"text", text}});
        if (!res.ok()) return res.error();
        if (!res.value().contains("values") || !res.value()["values"].is_array()) {
            return BackendError{BackendErrorKind::MalformedBody, 0,
                                "embed response missing array field 'values'", true};
        }
        EmbedVector v;
        for (const auto& x : res.value()["values"]) {
            if (!x.is_number()) {
                return BackendError{BackendErrorKind::MalformedBody, 0,
                                    "embed values must be numbers", true};
            }
            v.values.push_back(x.get<double>());
        }
        double norm = 0.0;
        for (double x : v.values) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0 || v.values.empty()) {
            v.values.assign(dim_ ? dim_ : 1, 0.0);
            v.values[0] = 1.0;
            v.degenerate = true;
            return v;
        }
        for (double& x : v.values) x /= norm;
        return v;
    }

    std::size_t dim() const override { return dim_; }

  private:
    HttpJsonClient client_;
    std::size_t dim_;
};

class HttpReranker : public Reranker {
  public:
    explicit HttpReranker(const HttpBackendConfig& config) : client_(config) {}

    Expected<RerankScore> rerank(const std::string& a, const std::string& b) override {
        auto res = client_.post(json{{"text_a", a}, {"text_b", b}});
        if (!res.ok()) return res.error();
        if (!res.value().contains("score") || !res.value()["score"].is_number()) {
            return BackendError{BackendErrorKind::MalformedBody, 0,
                                "rerank response missing numeric field 'score'", true};
        }
        double raw = res.value()["score"].get<double>();
        RerankScore out;
        out.score = std::clamp(raw, 0.0, 1.0);
        out.clamped = raw != out.score;
        return out;
    }

  private:
    HttpJsonClient client_;
};

class HttpScorer : public QualityScorer {
  public:
    explicit HttpScorer(const HttpBackendConfig& config) : client_(config) {}

    Expected<double> score(const std::string& text) override {
        auto res = client_.post(json{{"text", text}});
        if (!res.ok()) return res.error();
        if (!res.value().contains("score") || !res.value()["score"].is_number()) {
            return BackendError{BackendErrorKind::MalformedBody, 0,
                                "score response missing numeric field 'score'", true};
        }
        return std::clamp(res.value()["score"].get<double>(), 0.0, 1.0);
    }

  private:
    HttpJsonClient client_;
};

}  // namespace

std::unique_ptr<ChatBackend> make_http_chat_backend(const HttpBackendConfig& config) {
    return std::make_unique<HttpChatBackend>(config);
}

std::unique_ptr<IndustryClassifier> make_http_classifier(const HttpBackendConfig& config,
                                                         std::vector<std::string> taxonomy) {
    return std::make_unique<HttpClassifier>(config, std::move(taxonomy));
}

std::unique_ptr<Embedder> make_http_embedder(const HttpBackendConfig& config, std::size_t dim) {
    return std::make_unique<HttpEmbedder>(config, dim);
}

std::unique_ptr<Reranker> make_http_reranker(const HttpBackendConfig& config) {
    return std::make_unique<HttpReranker>(config);
}

std::unique_ptr<QualityScorer> make_http_scorer(const HttpBackendConfig& config) {
    return std::make_unique<HttpScorer>(config);
}

}  // namespace retsyn
