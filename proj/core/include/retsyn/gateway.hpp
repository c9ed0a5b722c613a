#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "retsyn/corpus.hpp"
#include "retsyn/errors.hpp"

namespace retsyn {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.2;
    int max_output_tokens = 1024;
    int retries = 3;  // retry budget on top of the first attempt
};

struct TokenUsage {
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
};

struct ChatResponse {
    std::string text;
    std::string finish_reason;
    TokenUsage usage;
};

struct EmbedVector {
    std::vector<double> values;  // unit L2 norm
    bool degenerate = false;     // input had no n-grams; fixed basis vector used
    std::size_t dim() const { return values.size(); }
};

struct RerankScore {
    double score = 0.0;  // in [0, 1]
    bool clamped = false;
};

class ChatBackend {
  public:
    virtual ~ChatBackend() = default;
    // One attempt; retry orchestration lives in chat().
    virtual Expected<ChatResponse> complete(const ChatRequest& request) = 0;
};

class IndustryClassifier {
  public:
    virtual ~IndustryClassifier() = default;
    // Exactly one taxonomy label, or "none".
    virtual Expected<std::string> classify(const std::string& text) = 0;
    virtual const std::vector<std::string>& taxonomy() const = 0;
};

class Embedder {
  public:
    virtual ~Embedder() = default;
    virtual Expected<EmbedVector> embed(const std::string& text) = 0;
    virtual std::size_t dim() const = 0;
};

class Reranker {
  public:
    virtual ~Reranker() = default;
    // Relevance of the (a, b) pair in [0, 1].
    virtual Expected<RerankScore> rerank(const std::string& a, const std::string& b) = 0;
};

struct RetryDelays {
    std::chrono::milliseconds initial{200};
    double factor = 2.0;
};

// Retries `request.retries` times on retryable errors with exponential backoff.
Expected<ChatResponse> chat(ChatBackend& backend, const ChatRequest& request,
                            const RetryDelays& delays = {});

// Generic retry wrapper for the other backends.
template <class F>
auto with_retries(int retries, const RetryDelays& delays, F&& attempt)
    -> decltype(attempt()) {
    auto delay = delays.initial;
    for (int i = 0;; ++i) {
        auto result = attempt();
        if (result.ok() || !result.error().retryable || i >= retries) return result;
        if (delay.count() > 0) std::this_thread::sleep_for(delay);
        delay = std::chrono::milliseconds(
            static_cast<long long>(static_cast<double>(delay.count()) * delays.factor));
    }
}

double cosine(const EmbedVector& a, const EmbedVector& b);

// ---------------------------------------------------------------------------
// Deterministic in-process mocks. Pure functions of (input, seed): repeated
// pipeline runs produce byte-identical artifacts.
// ---------------------------------------------------------------------------

class MockChatBackend : public ChatBackend {
  public:
    explicit MockChatBackend(std::uint64_t seed = 0) : seed_(seed) {}
    Expected<ChatResponse> complete(const ChatRequest& request) override;

  private:
    std::uint64_t seed_;
};

// Keyword table lookup with "none" fallback; longest keyword wins, ties by
// table order.
class KeywordClassifier : public IndustryClassifier {
  public:
    KeywordClassifier(std::vector<std::pair<std::string, std::string>> table,
                      std::vector<std::string> taxonomy);
    Expected<std::string> classify(const std::string& text) override;
    const std::vector<std::string>& taxonomy() const override { return taxonomy_; }

  private:
    std::vector<std::pair<std::string, std::string>> table_;
    std::vector<std::string> taxonomy_;
};

// Hashed character-bigram bag, L2-normalized. Inputs with no bigrams map to a
// fixed basis vector and are flagged.
class BigramHashEmbedder : public Embedder {
  public:
    explicit BigramHashEmbedder(std::size_t dim = 128) : dim_(dim) {}
    Expected<EmbedVector> embed(const std::string& text) override;
    std::size_t dim() const override { return dim_; }

  private:
    std::size_t dim_;
};

// Dice coefficient over character-bigram sets (identity monotone map).
// Identical strings score 1.0 even when no bigram exists.
class BigramDiceReranker : public Reranker {
  public:
    Expected<RerankScore> rerank(const std::string& a, const std::string& b) override;
};

// The CITIC-style primary industry taxonomy (28 categories).
const std::vector<std::string>& default_taxonomy();
// keyword -> label identity table over the taxonomy.
std::vector<std::pair<std::string, std::string>> default_classifier_table();

// ---------------------------------------------------------------------------
// JSON-over-HTTP backends. Request/response bodies are JSON; concurrent
// in-flight requests per backend are bounded by a semaphore.
// ---------------------------------------------------------------------------

struct HttpBackendConfig {
    std::string url;           // http://host:port/path
    std::string bearer_token;  // optional Authorization: Bearer
    std::string model;         // optional model tag forwarded to chat backends
    int max_in_flight = 4;
    int connect_timeout_ms = 5000;
    int read_timeout_ms = 60000;
};

std::unique_ptr<ChatBackend> make_http_chat_backend(const HttpBackendConfig& config);
std::unique_ptr<IndustryClassifier> make_http_classifier(const HttpBackendConfig& config,
                                                         std::vector<std::string> taxonomy);
std::unique_ptr<Embedder> make_http_embedder(const HttpBackendConfig& config, std::size_t dim);
std::unique_ptr<Reranker> make_http_reranker(const HttpBackendConfig& config);
std::unique_ptr<QualityScorer> make_http_scorer(const HttpBackendConfig& config);

}  // namespace retsyn
