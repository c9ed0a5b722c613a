#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "retsyn/corpus.hpp"
#include "retsyn/gateway.hpp"
#include "retsyn/relevance.hpp"

namespace retsyn {

struct PipelineConfig {
    std::string input_corpus;

    struct Chunk {
        std::size_t passage_len = 500;
        std::size_t sentence_len = 100;
    } chunk;

    struct Clean {
        double drop_threshold = 0.5;
        std::string scorer_url;
        std::string scorer_policy = "rule_only";  // rule_only | fail
        std::vector<std::string> keywords;        // defaulted from default_clean_rules()
    } clean;

    struct Entity {
        std::vector<std::string> referents;
        std::vector<std::string> company_patterns;
    } entity;

    struct Cluster {
        int min_cluster_size = 5;
        std::size_t top_k_keywords = 10;
        std::size_t representatives = 5;
        std::string tokenizer = "char_bigram";  // char_bigram | whitespace
    } cluster;

    struct Temporal {
        double weight = 0.1;
        std::string reference_date = "2022-01-01";
    } temporal;

    MiningConfig mining;

    struct Llm {
        int retries = 3;
        double temperature = 0.2;
        int max_output_tokens = 1024;
    } llm;

    struct Audit {
        std::size_t per_bin = 50;
    } audit;

    struct Eval {
        std::size_t k = 10;
        std::string model_tag = "bigram-hash";
        std::string run_file;    // optional TREC run replacing brute-force retrieval
        std::string results_a;   // optional result matrices for the correlation table
        std::string results_b;
    } eval;

    struct Cost {
        double n = 0.0;
        double t = 0.0;
        double m = 0.0;   // 0 = default sqrt(n)
        double l2 = 20.0;
    } cost;

    struct Backends {
        std::string chat_url;
        std::string classify_url;
        std::string embed_url;
        std::size_t embed_dim = 128;
        std::string rerank_url;
    } backends;

    std::vector<std::string> taxonomy;  // defaulted from default_taxonomy()
    int max_in_flight = 4;
    std::uint64_t seed = 0;

    // Fully-materialized effective config (defaults + file + env overrides);
    // stage config digests are computed from subtrees of this document.
    nlohmann::json effective;
};

// Empty/missing file means all defaults. Violations are collected and thrown
// together; unknown keys are rejected.
PipelineConfig validate_config(const std::filesystem::path& path);
PipelineConfig config_from_json(const nlohmann::json& doc);

// BACKEND_CHAT_URL, BACKEND_CLASSIFY_URL, BACKEND_EMBED_URL,
// BACKEND_RERANK_URL override the configured endpoints.
void apply_env_overrides(PipelineConfig& config);

struct StageManifest {
    std::string stage;
    std::string config_digest;
    std::map<std::string, std::string> inputs;   // artifact relpath -> digest
    std::map<std::string, std::string> outputs;  // artifact relpath -> digest
    std::int64_t started_at = 0;
    std::int64_t finished_at = 0;
};

const std::vector<std::string>& stage_names();

// Stage-wise driver with content-addressed checkpoints under
//   <workdir>/artifacts   pure stage outputs (byte-stable given config+seed)
//   <workdir>/manifests   bookkeeping (digests + timestamps)
//   <workdir>/tmp         staging area for atomic publication
// A stage re-runs iff any input or config digest changed.
class PipelineRunner {
  public:
    enum class Outcome { Ran, UpToDate };

    PipelineRunner(PipelineConfig config, std::filesystem::path workdir);

    Outcome run_stage(const std::string& name);

    void override_seed(std::uint64_t seed);

    const PipelineConfig& config() const { return config_; }
    std::filesystem::path artifacts_dir() const { return workdir_ / "artifacts"; }

  private:
    struct StageSpec {
        std::vector<std::string> upstream;     // stage names
        std::vector<std::string> inputs;       // artifact relpaths
        std::vector<std::string> outputs;      // artifact relpaths (dirs allowed)
        std::vector<std::string> config_keys;  // JSON pointers into the effective config
    };
    static const std::map<std::string, StageSpec>& stage_specs();

    std::string artifact_digest(const std::string& relpath) const;
    std::string config_digest_for(const StageSpec& spec) const;
    std::optional<StageManifest> load_manifest(const std::string& stage) const;
    void save_manifest(const StageManifest& manifest) const;
    void publish(const std::string& stage, const std::vector<std::string>& outputs);
    std::filesystem::path staging_dir(const std::string& stage) const;

    std::uint64_t stage_seed(const std::string& stage) const;

    // Backends are built per call: mocks when no URL is configured.
    std::unique_ptr<ChatBackend> make_chat() const;
    std::unique_ptr<IndustryClassifier> make_classifier() const;
    std::unique_ptr<Embedder> make_embedder() const;
    std::unique_ptr<Reranker> make_reranker() const;
    std::unique_ptr<QualityScorer> make_scorer() const;

    void run_ingest(const std::filesystem::path& out);
    void run_chunk(const std::filesystem::path& out);
    void run_clean(const std::filesystem::path& out);
    void run_gen_bottomup(const std::filesystem::path& out);
    void run_cluster(const std::filesystem::path& out);
    void run_gen_topdown(const std::filesystem::path& out);
    void run_mine(const std::filesystem::path& out);
    void run_emit(const std::filesystem::path& out);
    void run_audit(const std::filesystem::path& out);
    void run_eval(const std::filesystem::path& out);
    void run_estimate_cost(const std::filesystem::path& out);

    PipelineConfig config_;
    std::filesystem::path workdir_;
};

}  // namespace retsyn
