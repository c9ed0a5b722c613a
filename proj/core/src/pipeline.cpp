#include "retsyn/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <set>
#include <thread>

#include "retsyn/audit.hpp"
#include "retsyn/bottom_up.hpp"
#include "retsyn/dataset.hpp"
#include "retsyn/dates.hpp"
#include "retsyn/evalbench.hpp"
#include "retsyn/io.hpp"
#include "retsyn/rng.hpp"
#include "retsyn/sha256.hpp"
#include "retsyn/top_down.hpp"

namespace retsyn {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

namespace {

json default_config_json() {
    json j;
    j["input"] = {{"corpus", ""}};
    j["chunk"] = {{"passage_len", 500}, {"sentence_len", 100}};
    j["clean"] = {{"drop_threshold", 0.5},
                  {"scorer_url", ""},
                  {"scorer_policy", "rule_only"},
                  {"keywords", default_clean_rules().drop_keywords}};
    j["entity"] = {{"referents", default_referents()},
                   {"company_patterns", default_company_patterns()}};
    j["cluster"] = {{"min_cluster_size", 5},
                    {"top_k_keywords", 10},
                    {"representatives", 5},
                    {"tokenizer", "char_bigram"}};
    j["temporal"] = {{"weight", 0.1}, {"reference_date", "2022-01-01"}};
    j["mining"] = {{"threshold", 0.99}, {"audit_floor", 0.85}, {"max_pairs_per_space", 250000}};
    j["llm"] = {{"retries", 3}, {"temperature", 0.2}, {"max_output_tokens", 1024}};
    j["audit"] = {{"per_bin", 50}};
    j["eval"] = {{"k", 10},
                 {"model_tag", "bigram-hash"},
                 {"run_file", ""},
                 {"results_a", ""},
                 {"results_b", ""}};
    j["cost"] = {{"n", 0.0}, {"t", 0.0}, {"m", 0.0}, {"l2", 20.0}};
    j["backends"] = {{"chat", {{"url", ""}}},
                     {"classify", {{"url", ""}}},
                     {"embed", {{"url", ""}, {"dim", 128}}},
                     {"rerank", {{"url", ""}}}};
    j["taxonomy"] = default_taxonomy();
    j["concurrency"] = {{"max_in_flight", 4}};
    j["seed"] = 0;
    return j;
}

void collect_unknown_keys(const json& user, const json& schema, const std::string& prefix,
                          std::vector<std::string>& violations) {
    if (!user.is_object()) return;
    for (auto it = user.begin(); it != user.end(); ++it) {
        std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (!schema.contains(it.key())) {
            violations.push_back("unknown key '" + path + "'");
            continue;
        }
        if (schema[it.key()].is_object() && !it.value().is_object() && !it.value().is_null()) {
            violations.push_back("key '" + path + "' must be an object");
            continue;
        }
        if (schema[it.key()].is_object()) {
            collect_unknown_keys(it.value(), schema[it.key()], path, violations);
        }
    }
}

// Unknown keys are reported separately; merging skips them so every other
// violation can still be detected in the same pass.
void deep_merge_known(json& base, const json& user) {
    if (!user.is_object()) return;
    for (auto it = user.begin(); it != user.end(); ++it) {
        if (!base.contains(it.key())) continue;
        if (base[it.key()].is_object() && it.value().is_object()) {
            deep_merge_known(base[it.key()], it.value());
        } else {
            base[it.key()] = it.value();
        }
    }
}

}  // namespace

PipelineConfig config_from_json(const json& user) {
    std::vector<std::string> violations;
    json effective = default_config_json();
    collect_unknown_keys(user, effective, "", violations);
    deep_merge_known(effective, user);

    PipelineConfig config;
    auto number = [&](const char* pointer, double lo, double hi, double fallback) -> double {
        const json& v = effective.at(json::json_pointer(pointer));
        if (!v.is_number()) {
            violations.push_back(std::string(pointer) + " must be a number");
            return fallback;
        }
        double x = v.get<double>();
        if (x < lo || x > hi) {
            violations.push_back(std::string(pointer) + " out of range [" + std::to_string(lo) +
                                 ", " + std::to_string(hi) + "]");
            return fallback;
        }
        return x;
    };
    auto text = [&](const char* pointer) -> std::string {
        const json& v = effective.at(json::json_pointer(pointer));
        if (!v.is_string()) {
            violations.push_back(std::string(pointer) + " must be a string");
            return {};
        }
        return v.get<std::string>();
    };
    auto string_list = [&](const char* pointer) -> std::vector<std::string> {
        const json& v = effective.at(json::json_pointer(pointer));
        std::vector<std::string> out;
        if (!v.is_array()) {
            violations.push_back(std::string(pointer) + " must be an array of strings");
            return out;
        }
        for (const auto& s : v) {
            if (!s.is_string()) {
                violations.push_back(std::string(pointer) + " must contain only strings");
                return out;
            }
            out.push_back(s.get<std::string>());
        }
        return out;
    };

    config.input_corpus = text("/input/corpus");
    config.chunk.passage_len = static_cast<std::size_t>(number("/chunk/passage_len", 1, 1e9, 500));
    config.chunk.sentence_len = static_cast<std::size_t>(number("/chunk/sentence_len", 1, 1e9, 100));
    config.clean.drop_threshold = number("/clean/drop_threshold", 0.0, 1.0, 0.5);
    config.clean.scorer_url = text("/clean/scorer_url");
    config.clean.scorer_policy = text("/clean/scorer_policy");
    if (config.clean.scorer_policy != "rule_only" && config.clean.scorer_policy != "fail") {
        violations.push_back("/clean/scorer_policy must be 'rule_only' or 'fail'");
    }
    config.clean.keywords = string_list("/clean/keywords");
    config.entity.referents = string_list("/entity/referents");
    config.entity.company_patterns = string_list("/entity/company_patterns");
    config.cluster.min_cluster_size = static_cast<int>(number("/cluster/min_cluster_size", 2, 1e6, 5));
    config.cluster.top_k_keywords = static_cast<std::size_t>(number("/cluster/top_k_keywords", 1, 1e6, 10));
    config.cluster.representatives = static_cast<std::size_t>(number("/cluster/representatives", 1, 1e6, 5));
    config.cluster.tokenizer = text("/cluster/tokenizer");
    if (config.cluster.tokenizer != "char_bigram" && config.cluster.tokenizer != "whitespace") {
        violations.push_back("/cluster/tokenizer must be 'char_bigram' or 'whitespace'");
    }
    config.temporal.weight = number("/temporal/weight", 0.0, 1e6, 0.1);
    config.temporal.reference_date = text("/temporal/reference_date");
    if (!parse_iso_date(config.temporal.reference_date)) {
        violations.push_back("/temporal/reference_date must be an ISO-8601 date");
    }
    config.mining.threshold = number("/mining/threshold", 0.0, 1.0, 0.99);
    config.mining.audit_floor = number("/mining/audit_floor", 0.0, 1.0, 0.85);
    if (!(config.mining.audit_floor < config.mining.threshold)) {
        violations.push_back("/mining/audit_floor must be strictly below /mining/threshold");
    }
    config.mining.max_pairs_per_space =
        static_cast<std::size_t>(number("/mining/max_pairs_per_space", 1, 1e15, 250000));
    config.llm.retries = static_cast<int>(number("/llm/retries", 0, 100, 3));
    config.llm.temperature = number("/llm/temperature", 0.0, 2.0, 0.2);
    config.llm.max_output_tokens = static_cast<int>(number("/llm/max_output_tokens", 1, 1e9, 1024));
    config.audit.per_bin = static_cast<std::size_t>(number("/audit/per_bin", 1, 1e9, 50));
    config.eval.k = static_cast<std::size_t>(number("/eval/k", 1, 1e9, 10));
    config.eval.model_tag = text("/eval/model_tag");
    config.eval.run_file = text("/eval/run_file");
    config.eval.results_a = text("/eval/results_a");
    config.eval.results_b = text("/eval/results_b");
    config.cost.n = number("/cost/n", 0.0, 1e15, 0.0);
    config.cost.t = number("/cost/t", 0.0, 1e15, 0.0);
    config.cost.m = number("/cost/m", 0.0, 1e15, 0.0);
    config.cost.l2 = number("/cost/l2", 0.0, 1e15, 20.0);
    config.backends.chat_url = text("/backends/chat/url");
    config.backends.classify_url = text("/backends/classify/url");
    config.backends.embed_url = text("/backends/embed/url");
    config.backends.embed_dim = static_cast<std::size_t>(number("/backends/embed/dim", 8, 1e6, 128));
    config.backends.rerank_url = text("/backends/rerank/url");
    config.taxonomy = string_list("/taxonomy");
    config.max_in_flight = static_cast<int>(number("/concurrency/max_in_flight", 1, 4096, 4));
    {
        const json& v = effective.at(json::json_pointer("/seed"));
        if (!v.is_number_unsigned() && !v.is_number_integer()) {
            violations.push_back("/seed must be a non-negative integer");
        } else if (v.is_number_integer() && v.get<long long>() < 0) {
            violations.push_back("/seed must be a non-negative integer");
        } else {
            config.seed = v.get<std::uint64_t>();
        }
    }

    if (!violations.empty()) throw ConfigError(std::move(violations));
    config.effective = std::move(effective);
    return config;
}

PipelineConfig validate_config(const fs::path& path) {
    json user = json::object();
    if (!path.empty() && fs::exists(path)) {
        std::string raw = read_file(path);
        bool blank = raw.find_first_not_of(" \t\r\n") == std::string::npos;
        if (!blank) {
            user = json::parse(raw, nullptr, false);
            if (user.is_discarded() || !user.is_object()) {
                throw ConfigError({"config file is not a JSON object: " + path.string()});
            }
        }
    } else if (!path.empty()) {
        throw ConfigError({"config file not found: " + path.string()});
    }
    return config_from_json(user);
}

void apply_env_overrides(PipelineConfig& config) {
    struct Override {
        const char* env;
        std::string* field;
        const char* pointer;
    } overrides[] = {
        {"BACKEND_CHAT_URL", &config.backends.chat_url, "/backends/chat/url"},
        {"BACKEND_CLASSIFY_URL", &config.backends.classify_url, "/backends/classify/url"},
        {"BACKEND_EMBED_URL", &config.backends.embed_url, "/backends/embed/url"},
        {"BACKEND_RERANK_URL", &config.backends.rerank_url, "/backends/rerank/url"},
    };
    for (const auto& o : overrides) {
        const char* value = std::getenv(o.env);
        if (value && *value) {
            *o.field = value;
            config.effective[json::json_pointer(o.pointer)] = value;
        }
    }
}

// ---------------------------------------------------------------------------
// Artifact (de)serialization
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kDocuments = "documents.jsonl";
constexpr const char* kPassages = "passages.jsonl";
constexpr const char* kKeptPassages = "kept_passages.jsonl";
constexpr const char* kCleaningReport = "cleaning_report.json";
constexpr const char* kQueriesBottomup = "queries_bottomup.jsonl";
constexpr const char* kGenBottomupSummary = "gen_bottomup_summary.json";
constexpr const char* kTitles = "titles.jsonl";
constexpr const char* kTopicTree = "topic_tree.jsonl";
constexpr const char* kDocTopics = "doc_topics.jsonl";
constexpr const char* kIntents = "intents.jsonl";
constexpr const char* kQueriesTopic = "queries_topic.jsonl";
constexpr const char* kGenTopdownSummary = "gen_topdown_summary.json";
constexpr const char* kLabelsDirect = "labels_direct.jsonl";
constexpr const char* kLabelsMined = "labels_mined.jsonl";
constexpr const char* kAuditLog = "audit_log.jsonl";
constexpr const char* kMineSummary = "mine_summary.json";
constexpr const char* kDataset = "dataset";
constexpr const char* kAuditReport = "audit_report.tsv";
constexpr const char* kAuditHistogram = "audit_histogram.tsv";
constexpr const char* kJudgeTranscripts = "judge_transcripts.jsonl";
constexpr const char* kMetrics = "metrics.tsv";
constexpr const char* kCostEstimate = "cost_estimate.tsv";

json doc_to_json(const Document& doc, std::size_t ordinal) {
    json j{{"doc_id", doc.doc_id},   {"ordinal", ordinal},
           {"title", doc.title},     {"text", doc.text},
           {"publish_date", doc.publish_date}, {"report_type", doc.report_type}};
    j["company"] = doc.company ? json(*doc.company) : json(nullptr);
    return j;
}

Document doc_from_json(const json& j) {
    Document doc;
    doc.doc_id = j.at("doc_id").get<std::string>();
    doc.title = j.at("title").get<std::string>();
    doc.text = j.at("text").get<std::string>();
    doc.publish_date = j.at("publish_date").get<std::string>();
    doc.report_type = j.at("report_type").get<std::string>();
    if (j.contains("company") && j["company"].is_string()) {
        doc.company = j["company"].get<std::string>();
    }
    return doc;
}

json passage_to_json(const PassageChunk& p) {
    json sentences = json::array();
    for (const auto& s : p.sentences) {
        sentences.push_back({{"sentence_id", s.sentence_id}, {"text", s.text}, {"oversize", s.oversize}});
    }
    return json{{"passage_id", p.passage_id}, {"doc_id", p.doc_id},   {"ordinal", p.ordinal},
                {"text", p.text},             {"char_len", p.char_len}, {"sentences", sentences}};
}

PassageChunk passage_from_json(const json& j) {
    PassageChunk p;
    p.passage_id = j.at("passage_id").get<std::string>();
    p.doc_id = j.at("doc_id").get<std::string>();
    p.ordinal = j.at("ordinal").get<std::size_t>();
    p.text = j.at("text").get<std::string>();
    p.char_len = j.at("char_len").get<std::size_t>();
    for (const auto& s : j.at("sentences")) {
        SentenceChunk sc;
        sc.sentence_id = s.at("sentence_id").get<std::string>();
        sc.text = s.at("text").get<std::string>();
        sc.oversize = s.value("oversize", false);
        p.sentences.push_back(std::move(sc));
    }
    return p;
}

json query_to_json(const Query& q) {
    json j{{"query_id", q.query_id}, {"text", q.text}, {"level", std::string(level_name(q.level))}};
    if (q.level == QueryLevel::Topic) {
        j["topic_id"] = q.topic_id ? json(*q.topic_id) : json(nullptr);
    } else {
        j["doc_id"] = q.doc_id;
        j["passage_id"] = q.passage_id;
        j["sentence_id"] = q.sentence_id ? json(*q.sentence_id) : json(nullptr);
    }
    return j;
}

Query query_from_json(const json& j) {
    Query q;
    q.query_id = j.at("query_id").get<std::string>();
    q.text = j.at("text").get<std::string>();
    q.level = level_from_name(j.at("level").get<std::string>()).value_or(QueryLevel::Sentence);
    if (q.level == QueryLevel::Topic) {
        if (j.contains("topic_id") && j["topic_id"].is_string()) {
            q.topic_id = j["topic_id"].get<std::string>();
        }
    } else {
        q.doc_id = j.value("doc_id", std::string());
        q.passage_id = j.value("passage_id", std::string());
        if (j.contains("sentence_id") && j["sentence_id"].is_string()) {
            q.sentence_id = j["sentence_id"].get<std::string>();
        }
    }
    return q;
}

json label_to_json(const RelevanceLabel& label) {
    return json{{"query_id", label.query_id},
                {"passage_id", label.passage_id},
                {"kind", std::string(relation_name(label.kind))},
                {"provenance", label.provenance == Provenance::Direct ? "direct" : "mined"},
                {"score", label.score}};
}

RelevanceLabel label_from_json(const json& j) {
    RelevanceLabel label;
    label.query_id = j.at("query_id").get<std::string>();
    label.passage_id = j.at("passage_id").get<std::string>();
    std::string kind = j.at("kind").get<std::string>();
    label.kind = kind == "subset"       ? RelationKind::Subset
                 : kind == "equivalent" ? RelationKind::Equivalent
                                        : RelationKind::Superset;
    label.provenance =
        j.at("provenance").get<std::string>() == "direct" ? Provenance::Direct : Provenance::Mined;
    label.score = j.at("score").get<double>();
    return label;
}

json pair_to_json(const ScoredPair& pair) {
    return json{{"query_a_id", pair.query_a_id},
                {"query_b_id", pair.query_b_id},
                {"score", pair.score},
                {"level", std::string(level_name(pair.level))},
                {"space_id", pair.space_id}};
}

ScoredPair pair_from_json(const json& j) {
    ScoredPair pair;
    pair.query_a_id = j.at("query_a_id").get<std::string>();
    pair.query_b_id = j.at("query_b_id").get<std::string>();
    pair.score = j.at("score").get<double>();
    pair.level = level_from_name(j.at("level").get<std::string>()).value_or(QueryLevel::Sentence);
    pair.space_id = j.at("space_id").get<std::string>();
    return pair;
}

// Bounded-worker loop; results must be written by index for determinism.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    int count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    pool.reserve(count);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (int w = 0; w < count; ++w) {
        pool.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::int64_t now_epoch_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::string topic_space_id(int topic_id) { return "t" + std::to_string(topic_id); }

}  // namespace

// ---------------------------------------------------------------------------
// Runner skeleton
// ---------------------------------------------------------------------------

const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> kNames = {
        "ingest", "chunk",  "clean", "gen-bottomup", "cluster",      "gen-topdown",
        "mine",   "emit",   "audit", "eval",         "estimate-cost"};
    return kNames;
}

PipelineRunner::PipelineRunner(PipelineConfig config, fs::path workdir)
    : config_(std::move(config)), workdir_(std::move(workdir)) {
    fs::create_directories(workdir_ / "artifacts");
    fs::create_directories(workdir_ / "manifests");
    fs::create_directories(workdir_ / "tmp");
}

void PipelineRunner::override_seed(std::uint64_t seed) {
    config_.seed = seed;
    config_.effective["seed"] = seed;
}

const std::map<std::string, PipelineRunner::StageSpec>& PipelineRunner::stage_specs() {
    static const std::map<std::string, StageSpec> kSpecs = {
        {"ingest", {{}, {}, {kDocuments}, {"/input"}}},
        {"chunk", {{"ingest"}, {kDocuments}, {kPassages}, {"/chunk"}}},
        {"clean", {{"chunk"}, {kPassages}, {kKeptPassages, kCleaningReport}, {"/clean"}}},
        {"gen-bottomup",
         {{"clean", "ingest"},
          {kKeptPassages, kDocuments},
          {kQueriesBottomup, kGenBottomupSummary},
          {"/llm", "/entity", "/backends/chat", "/seed"}}},
        {"cluster",
         {{"ingest"},
          {kDocuments},
          {kTitles, kTopicTree, kDocTopics},
          {"/cluster", "/temporal", "/taxonomy", "/backends/classify", "/backends/embed"}}},
        {"gen-topdown",
         {{"cluster"},
          {kTopicTree, kTitles},
          {kIntents, kQueriesTopic, kGenTopdownSummary},
          {"/llm", "/backends/chat", "/backends/embed", "/temporal", "/cluster/representatives",
           "/seed"}}},
        {"mine",
         {{"gen-bottomup", "gen-topdown", "cluster"},
          {kQueriesBottomup, kQueriesTopic, kIntents, kDocTopics, kTopicTree},
          {kLabelsDirect, kLabelsMined, kAuditLog, kMineSummary},
          {"/mining", "/backends/rerank"}}},
        {"emit",
         {{"clean", "ingest", "gen-bottomup", "gen-topdown", "mine"},
          {kKeptPassages, kDocuments, kQueriesBottomup, kQueriesTopic, kLabelsDirect, kLabelsMined},
          {kDataset},
          {}}},
        {"audit",
         {{"mine", "gen-bottomup", "gen-topdown"},
          {kAuditLog, kQueriesBottomup, kQueriesTopic, kIntents},
          {kAuditReport, kAuditHistogram, kJudgeTranscripts},
          {"/audit", "/mining/threshold", "/llm", "/backends/chat", "/seed"}}},
        {"eval", {{"emit"}, {kDataset}, {kMetrics}, {"/eval", "/backends/embed"}}},
        {"estimate-cost", {{}, {}, {kCostEstimate}, {"/cost"}}},
    };
    return kSpecs;
}

std::string PipelineRunner::artifact_digest(const std::string& relpath) const {
    fs::path full = artifacts_dir() / relpath;
    if (fs::is_directory(full)) return tree_digest(full);
    return sha256_file_hex(full);
}

std::string PipelineRunner::config_digest_for(const StageSpec& spec) const {
    json projection = json::object();
    for (const auto& key : spec.config_keys) {
        projection[key] = config_.effective.at(json::json_pointer(key));
    }
    return sha256_hex(projection.dump());
}

std::optional<StageManifest> PipelineRunner::load_manifest(const std::string& stage) const {
    fs::path file = workdir_ / "manifests" / (stage + ".json");
    if (!fs::exists(file)) return std::nullopt;
    json j = json::parse(read_file(file), nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    StageManifest m;
    m.stage = j.value("stage", stage);
    m.config_digest = j.value("config_digest", std::string());
    for (auto it = j["inputs"].begin(); it != j["inputs"].end(); ++it) {
        m.inputs[it.key()] = it.value().get<std::string>();
    }
    for (auto it = j["outputs"].begin(); it != j["outputs"].end(); ++it) {
        m.outputs[it.key()] = it.value().get<std::string>();
    }
    m.started_at = j.value("started_at", 0LL);
    m.finished_at = j.value("finished_at", 0LL);
    return m;
}

void PipelineRunner::save_manifest(const StageManifest& manifest) const {
    json j{{"stage", manifest.stage},
           {"config_digest", manifest.config_digest},
           {"inputs", manifest.inputs},
           {"outputs", manifest.outputs},
           {"started_at", manifest.started_at},
           {"finished_at", manifest.finished_at}};
    atomic_write_file(workdir_ / "manifests" / (manifest.stage + ".json"), j.dump(2) + "\n");
}

fs::path PipelineRunner::staging_dir(const std::string& stage) const {
    return workdir_ / "tmp" / ("stage-" + stage);
}

void PipelineRunner::publish(const std::string& stage, const std::vector<std::string>& outputs) {
    fs::path staging = staging_dir(stage);
    for (const auto& relpath : outputs) {
        fs::path from = staging / relpath;
        if (!fs::exists(from)) {
            throw IoError("stage '" + stage + "' did not produce expected output " + relpath);
        }
        fs::path to = artifacts_dir() / relpath;
        if (fs::exists(to)) fs::remove_all(to);
        fs::rename(from, to);
    }
    fs::remove_all(staging);
}

std::uint64_t PipelineRunner::stage_seed(const std::string& stage) const {
    return mix64(config_.seed, hash64(stage));
}

std::unique_ptr<ChatBackend> PipelineRunner::make_chat() const {
    if (config_.backends.chat_url.empty()) {
        return std::make_unique<MockChatBackend>(config_.seed);
    }
    HttpBackendConfig http;
    http.url = config_.backends.chat_url;
    http.max_in_flight = config_.max_in_flight;
    if (const char* token = std::getenv("BACKEND_CHAT_TOKEN")) http.bearer_token = token;
    return make_http_chat_backend(http);
}

std::unique_ptr<IndustryClassifier> PipelineRunner::make_classifier() const {
    if (config_.backends.classify_url.empty()) {
        std::vector<std::pair<std::string, std::string>> table;
        for (const auto& label : config_.taxonomy) table.emplace_back(label, label);
        return std::make_unique<KeywordClassifier>(std::move(table), config_.taxonomy);
    }
    HttpBackendConfig http;
    http.url = config_.backends.classify_url;
    http.max_in_flight = config_.max_in_flight;
    if (const char* token = std::getenv("BACKEND_CLASSIFY_TOKEN")) http.bearer_token = token;
    return make_http_classifier(http, config_.taxonomy);
}

std::unique_ptr<Embedder> PipelineRunner::make_embedder() const {
    if (config_.backends.embed_url.empty()) {
        return std::make_unique<BigramHashEmbedder>(config_.backends.embed_dim);
    }
    HttpBackendConfig http;
    http.url = config_.backends.embed_url;
    http.max_in_flight = config_.max_in_flight;
    if (const char* token = std::getenv("BACKEND_EMBED_TOKEN")) http.bearer_token = token;
    return make_http_embedder(http, config_.backends.embed_dim);
}

std::unique_ptr<Reranker> PipelineRunner::make_reranker() const {
    if (config_.backends.rerank_url.empty()) {
        return std::make_unique<BigramDiceReranker>();
    }
    HttpBackendConfig http;
    http.url = config_.backends.rerank_url;
    http.max_in_flight = config_.max_in_flight;
    if (const char* token = std::getenv("BACKEND_RERANK_TOKEN")) http.bearer_token = token;
    return make_http_reranker(http);
}

std::unique_ptr<QualityScorer> PipelineRunner::make_scorer() const {
    if (config_.clean.scorer_url.empty()) return std::make_unique<PassthroughScorer>();
    HttpBackendConfig http;
    http.url = config_.clean.scorer_url;
    http.max_in_flight = config_.max_in_flight;
    return make_http_scorer(http);
}

PipelineRunner::Outcome PipelineRunner::run_stage(const std::string& name) {
    auto spec_it = stage_specs().find(name);
    if (spec_it == stage_specs().end()) {
        throw ConfigError({"unknown stage '" + name + "' (expected one of: ingest, chunk, clean, "
                           "gen-bottomup, cluster, gen-topdown, mine, emit, audit, eval, "
                           "estimate-cost)"});
    }
    const StageSpec& spec = spec_it->second;

    // Upstream manifests and artifacts must exist before digesting.
    for (const auto& upstream : spec.upstream) {
        if (!load_manifest(upstream)) {
            throw UpstreamError(upstream, "stage '" + name + "' requires upstream stage '" +
                                              upstream + "' to run first");
        }
    }
    for (const auto& input : spec.inputs) {
        if (!fs::exists(artifacts_dir() / input)) {
            std::string producer = "unknown";
            for (const auto& [other, other_spec] : stage_specs()) {
                if (std::find(other_spec.outputs.begin(), other_spec.outputs.end(), input) !=
                    other_spec.outputs.end()) {
                    producer = other;
                    break;
                }
            }
            throw UpstreamError(producer, "stage '" + name + "' is missing input artifact '" +
                                              input + "' from stage '" + producer + "'");
        }
    }

    std::map<std::string, std::string> input_digests;
    if (name == "ingest") {
        if (config_.input_corpus.empty()) {
            throw ConfigError({"/input/corpus must point at the raw corpus JSONL"});
        }
        if (!fs::exists(config_.input_corpus)) {
            throw UpstreamError("input", "ingest input corpus not found: " + config_.input_corpus);
        }
        input_digests["external:corpus"] = sha256_file_hex(config_.input_corpus);
    }
    for (const auto& input : spec.inputs) input_digests[input] = artifact_digest(input);
    const std::string config_digest = config_digest_for(spec);

    if (auto manifest = load_manifest(name)) {
        bool fresh = manifest->config_digest == config_digest && manifest->inputs == input_digests;
        if (fresh) {
            for (const auto& [relpath, digest] : manifest->outputs) {
                if (!fs::exists(artifacts_dir() / relpath) || artifact_digest(relpath) != digest) {
                    fresh = false;
                    break;
                }
            }
        }
        if (fresh) {
            std::cerr << "[" << name << "] up-to-date\n";
            return Outcome::UpToDate;
        }
        std::cerr << "[" << name << "] stale (inputs or config changed), re-running\n";
    }

    StageManifest manifest;
    manifest.stage = name;
    manifest.config_digest = config_digest;
    manifest.inputs = input_digests;
    manifest.started_at = now_epoch_ms();

    fs::path staging = staging_dir(name);
    fs::remove_all(staging);
    fs::create_directories(staging);

    if (name == "ingest") run_ingest(staging);
    else if (name == "chunk") run_chunk(staging);
    else if (name == "clean") run_clean(staging);
    else if (name == "gen-bottomup") run_gen_bottomup(staging);
    else if (name == "cluster") run_cluster(staging);
    else if (name == "gen-topdown") run_gen_topdown(staging);
    else if (name == "mine") run_mine(staging);
    else if (name == "emit") run_emit(staging);
    else if (name == "audit") run_audit(staging);
    else if (name == "eval") run_eval(staging);
    else if (name == "estimate-cost") run_estimate_cost(staging);

    // Publish everything the stage staged, spec outputs first.
    std::vector<std::string> produced;
    for (const auto& entry : fs::directory_iterator(staging)) {
        produced.push_back(entry.path().filename().string());
    }
    std::sort(produced.begin(), produced.end());
    publish(name, produced);
    for (const auto& relpath : produced) manifest.outputs[relpath] = artifact_digest(relpath);
    manifest.finished_at = now_epoch_ms();
    save_manifest(manifest);
    std::cerr << "[" << name << "] ran (" << produced.size() << " artifact"
              << (produced.size() == 1 ? "" : "s") << ")\n";
    return Outcome::Ran;
}

// ---------------------------------------------------------------------------
// Stage bodies
// ---------------------------------------------------------------------------

void PipelineRunner::run_ingest(const fs::path& out) {
    LoadResult loaded = load_corpus(config_.input_corpus);
    for (const auto& warning : loaded.warnings) {
        std::cerr << "[ingest] WARNING line " << warning.line_no << ": " << warning.message << "\n";
    }
    std::vector<json> rows;
    rows.reserve(loaded.documents.size());
    for (std::size_t i = 0; i < loaded.documents.size(); ++i) {
        rows.push_back(doc_to_json(loaded.documents[i], i));
    }
    write_jsonl(out / kDocuments, rows);
}

void PipelineRunner::run_chunk(const fs::path& out) {
    std::vector<json> rows;
    for (const auto& j : read_jsonl(artifacts_dir() / kDocuments)) {
        Document doc = doc_from_json(j);
        auto passages = segment_passages(doc, config_.chunk.passage_len);
        for (auto& passage : passages) {
            passage.sentences = segment_sentences(passage, config_.chunk.sentence_len);
            rows.push_back(passage_to_json(passage));
        }
    }
    write_jsonl(out / kPassages, rows);
}

void PipelineRunner::run_clean(const fs::path& out) {
    std::vector<PassageChunk> passages;
    for (const auto& j : read_jsonl(artifacts_dir() / kPassages)) {
        passages.push_back(passage_from_json(j));
    }
    CleanRules rules = default_clean_rules();
    rules.drop_keywords = config_.clean.keywords;
    auto scorer = make_scorer();
    ScorerPolicy policy = config_.clean.scorer_policy == "fail" ? ScorerPolicy::FailStage
                                                                : ScorerPolicy::RuleOnly;
    CleanOutcome outcome =
        clean_passages(passages, rules, scorer.get(), config_.clean.drop_threshold, policy);
    for (const auto& warning : outcome.warnings) std::cerr << "[clean] WARNING: " << warning << "\n";

    std::vector<json> rows;
    rows.reserve(outcome.kept.size());
    for (const auto& p : outcome.kept) rows.push_back(passage_to_json(p));
    write_jsonl(out / kKeptPassages, rows);

    json report{{"total", outcome.report.total},
                {"dropped", outcome.report.dropped},
                {"drop_fraction", outcome.report.drop_fraction},
                {"per_rule_counts", outcome.report.per_rule_counts}};
    atomic_write_file(out / kCleaningReport, report.dump(2) + "\n");
}

void PipelineRunner::run_gen_bottomup(const fs::path& out) {
    std::vector<Document> docs;
    for (const auto& j : read_jsonl(artifacts_dir() / kDocuments)) docs.push_back(doc_from_json(j));
    std::map<std::string, std::size_t> doc_order;
    for (std::size_t i = 0; i < docs.size(); ++i) doc_order[docs[i].doc_id] = i;

    std::vector<std::vector<PassageChunk>> per_doc(docs.size());
    for (const auto& j : read_jsonl(artifacts_dir() / kKeptPassages)) {
        PassageChunk p = passage_from_json(j);
        auto it = doc_order.find(p.doc_id);
        if (it != doc_order.end()) per_doc[it->second].push_back(std::move(p));
    }
    for (auto& list : per_doc) {
        std::sort(list.begin(), list.end(),
                  [](const PassageChunk& a, const PassageChunk& b) { return a.ordinal < b.ordinal; });
    }

    struct Item {
        std::size_t doc = 0;
        const PassageChunk* passage = nullptr;
    };
    std::vector<Item> items;
    for (std::size_t d = 0; d < per_doc.size(); ++d) {
        for (const auto& p : per_doc[d]) items.push_back({d, &p});
    }

    auto backend = make_chat();
    std::vector<HierarchicalQuerySet> sets(items.size());
    parallel_for(items.size(), config_.max_in_flight, [&](std::size_t i) {
        sets[i] = generate_queries(*backend, *items[i].passage, config_.llm.retries, {},
                                   config_.llm.temperature);
    });

    std::vector<json> rows;
    json summary;
    summary["empty_queries"] = 0;
    summary["repaired_passages"] = json::array();
    std::size_t empty_total = 0;
    std::size_t cursor = 0;
    for (std::size_t d = 0; d < per_doc.size(); ++d) {
        std::vector<HierarchicalQuerySet> doc_sets;
        for (const auto& p : per_doc[d]) {
            (void)p;
            if (sets[cursor].repaired) summary["repaired_passages"].push_back(sets[cursor].passage_id);
            doc_sets.push_back(sets[cursor++]);
        }
        MergeResult merged = merge_doc_queries(docs[d].doc_id, per_doc[d], doc_sets);
        empty_total += merged.empty_skipped;
        auto company = resolve_company(docs[d], config_.entity.company_patterns);
        for (auto& query : merged.queries) {
            Query completed = complete_entities(std::move(query), company, config_.entity.referents);
            rows.push_back(query_to_json(completed));
        }
    }
    summary["empty_queries"] = empty_total;
    write_jsonl(out / kQueriesBottomup, rows);
    atomic_write_file(out / kGenBottomupSummary, summary.dump(2) + "\n");
}

void PipelineRunner::run_cluster(const fs::path& out) {
    std::vector<Document> docs;
    for (const auto& j : read_jsonl(artifacts_dir() / kDocuments)) docs.push_back(doc_from_json(j));

    auto classifier = make_classifier();
    auto embedder = make_embedder();
    auto titles = collect_titles(docs, *classifier);
    std::vector<std::vector<double>> features(titles.size());
    for (std::size_t i = 0; i < titles.size(); ++i) {
        features[i] = build_features(titles[i], *embedder, config_.temporal.reference_date,
                                     config_.temporal.weight);
    }
    TopicTree tree = cluster_topics(titles, features, config_.cluster.min_cluster_size);
    if (tree.degenerate) {
        std::cerr << "[cluster] WARNING: fewer titles than min_cluster_size, single root topic\n";
    }
    assign_dominant_industries(tree, titles);
    Tokenizer tokenizer = config_.cluster.tokenizer == "whitespace" ? Tokenizer::Whitespace
                                                                    : Tokenizer::CharBigram;
    ctfidf_keywords(tree, titles, config_.cluster.top_k_keywords, tokenizer);

    std::vector<json> title_rows;
    for (const auto& t : titles) {
        title_rows.push_back({{"doc_id", t.doc_id},
                              {"title", t.title},
                              {"publish_date", t.publish_date},
                              {"industry", t.industry}});
    }
    write_jsonl(out / kTitles, title_rows);

    std::vector<json> node_rows;
    for (const auto& node : tree.nodes) {
        node_rows.push_back({{"topic_id", node.topic_id},
                             {"parent_id", node.parent_id},
                             {"children", node.children},
                             {"member_doc_ids", node.member_doc_ids},
                             {"keywords", node.keywords},
                             {"dominant_industry", node.dominant_industry},
                             {"persistence", node.persistence}});
    }
    write_jsonl(out / kTopicTree, node_rows);

    std::vector<json> doc_rows;
    std::set<std::string> noise(tree.noise_docs.begin(), tree.noise_docs.end());
    for (const auto& t : titles) {
        json row{{"doc_id", t.doc_id}};
        if (noise.count(t.doc_id)) {
            row["leaf_id"] = -1;
            row["noise"] = true;
            row["subtree_id"] = "pseudo-" + t.doc_id;
        } else {
            int leaf = tree.leaf_of_doc.at(t.doc_id);
            row["leaf_id"] = leaf;
            row["noise"] = false;
            row["subtree_id"] = topic_space_id(max_same_industry_subtree(tree, t.doc_id, t.industry));
        }
        doc_rows.push_back(std::move(row));
    }
    write_jsonl(out / kDocTopics, doc_rows);
}

namespace {

TopicTree tree_from_rows(const std::vector<json>& rows) {
    TopicTree tree;
    tree.nodes.resize(rows.size());
    for (const auto& j : rows) {
        TopicNode node;
        node.topic_id = j.at("topic_id").get<int>();
        node.parent_id = j.at("parent_id").get<int>();
        node.children = j.at("children").get<std::vector<int>>();
        node.member_doc_ids = j.at("member_doc_ids").get<std::vector<std::string>>();
        node.keywords = j.at("keywords").get<std::vector<std::string>>();
        node.dominant_industry = j.at("dominant_industry").get<std::string>();
        node.persistence = j.at("persistence").get<double>();
        tree.nodes[static_cast<std::size_t>(node.topic_id)] = std::move(node);
    }
    return tree;
}

std::vector<TitleRecord> titles_from_rows(const std::vector<json>& rows) {
    std::vector<TitleRecord> titles;
    titles.reserve(rows.size());
    for (const auto& j : rows) {
        TitleRecord t;
        t.doc_id = j.at("doc_id").get<std::string>();
        t.title = j.at("title").get<std::string>();
        t.publish_date = j.at("publish_date").get<std::string>();
        t.industry = j.at("industry").get<std::string>();
        titles.push_back(std::move(t));
    }
    return titles;
}

}  // namespace

void PipelineRunner::run_gen_topdown(const fs::path& out) {
    TopicTree tree = tree_from_rows(read_jsonl(artifacts_dir() / kTopicTree));
    auto titles = titles_from_rows(read_jsonl(artifacts_dir() / kTitles));

    auto embedder = make_embedder();
    std::vector<std::vector<double>> features(titles.size());
    for (std::size_t i = 0; i < titles.size(); ++i) {
        features[i] = build_features(titles[i], *embedder, config_.temporal.reference_date,
                                     config_.temporal.weight);
    }

    auto backend = make_chat();
    std::vector<json> intent_rows;
    std::vector<json> query_rows;
    json summary;
    summary["failed_topics"] = json::array();
    for (const auto& node : tree.nodes) {
        if (!node.is_leaf() || node.member_doc_ids.empty()) continue;
        auto reps = representative_titles(tree, node.topic_id, titles, features,
                                          config_.cluster.representatives);
        bool failed = false;
        auto intents = generate_intents(node.topic_id, node.keywords, reps, *backend,
                                        config_.llm.retries, {}, config_.llm.temperature, &failed);
        if (failed) {
            summary["failed_topics"].push_back(node.topic_id);
            std::cerr << "[gen-topdown] WARNING: topic " << node.topic_id
                      << " skipped, unparsable intents after retries\n";
            continue;
        }
        for (std::size_t k = 0; k < intents.size(); ++k) {
            std::string query_id = topic_space_id(node.topic_id) + "-i" + std::to_string(k);
            intent_rows.push_back({{"query_id", query_id},
                                   {"topic_id", node.topic_id},
                                   {"intent", intents[k].intent},
                                   {"subqueries", intents[k].subqueries}});
            query_rows.push_back({{"query_id", query_id},
                                  {"text", intents[k].intent},
                                  {"level", "topic"},
                                  {"topic_id", topic_space_id(node.topic_id)}});
        }
    }
    write_jsonl(out / kIntents, intent_rows);
    write_jsonl(out / kQueriesTopic, query_rows);
    atomic_write_file(out / kGenTopdownSummary, summary.dump(2) + "\n");
}

void PipelineRunner::run_mine(const fs::path& out) {
    std::vector<Query> bottomup;
    for (const auto& j : read_jsonl(artifacts_dir() / kQueriesBottomup)) {
        bottomup.push_back(query_from_json(j));
    }
    std::vector<Query> topic_queries;
    for (const auto& j : read_jsonl(artifacts_dir() / kQueriesTopic)) {
        topic_queries.push_back(query_from_json(j));
    }
    std::map<std::string, std::vector<std::string>> subqueries_of;
    for (const auto& j : read_jsonl(artifacts_dir() / kIntents)) {
        subqueries_of[j.at("query_id").get<std::string>()] =
            j.at("subqueries").get<std::vector<std::string>>();
    }
    std::map<std::string, std::string> subtree_of_doc;
    for (const auto& j : read_jsonl(artifacts_dir() / kDocTopics)) {
        subtree_of_doc[j.at("doc_id").get<std::string>()] = j.at("subtree_id").get<std::string>();
    }
    std::map<std::string, std::vector<std::string>> members_of_topic;
    for (const auto& j : read_jsonl(artifacts_dir() / kTopicTree)) {
        members_of_topic[topic_space_id(j.at("topic_id").get<int>())] =
            j.at("member_doc_ids").get<std::vector<std::string>>();
    }

    auto direct = direct_map(bottomup);
    auto reranker = make_reranker();

    std::vector<std::string> flagged_docs;
    auto sentence_spaces = build_sentence_spaces(bottomup);
    auto passage_spaces = build_passage_spaces(bottomup, subtree_of_doc, &flagged_docs);
    auto topic_spaces =
        build_topic_spaces(topic_queries, subqueries_of, members_of_topic, bottomup);
    for (const auto& doc : flagged_docs) {
        std::cerr << "[mine] WARNING: document " << doc
                  << " has no topic subtree assignment; passage-level space empty\n";
    }

    auto mined_s = mine_sentence_level(sentence_spaces, config_.mining, *reranker);
    auto mined_p = mine_passage_level(passage_spaces, config_.mining, *reranker);
    auto mined_t = mine_topic_level(topic_spaces, config_.mining, *reranker);

    std::vector<json> direct_rows;
    for (const auto& label : direct) direct_rows.push_back(label_to_json(label));
    write_jsonl(out / kLabelsDirect, direct_rows);

    std::vector<json> mined_rows;
    for (const auto* outcome : {&mined_s, &mined_p, &mined_t}) {
        for (const auto& label : outcome->labels) mined_rows.push_back(label_to_json(label));
    }
    write_jsonl(out / kLabelsMined, mined_rows);

    std::vector<json> audit_rows;
    for (const auto* outcome : {&mined_s, &mined_p, &mined_t}) {
        for (const auto& pair : outcome->audit_log) audit_rows.push_back(pair_to_json(pair));
    }
    write_jsonl(out / kAuditLog, audit_rows);

    json summary{{"pairs_scored",
                  {{"sentence", mined_s.pairs_scored},
                   {"passage", mined_p.pairs_scored},
                   {"topic", mined_t.pairs_scored}}},
                 {"truncated_spaces",
                  mined_s.truncated_spaces + mined_p.truncated_spaces + mined_t.truncated_spaces},
                 {"docs_without_subtree", flagged_docs}};
    atomic_write_file(out / kMineSummary, summary.dump(2) + "\n");
}

void PipelineRunner::run_emit(const fs::path& out) {
    std::vector<PassageChunk> kept;
    for (const auto& j : read_jsonl(artifacts_dir() / kKeptPassages)) {
        kept.push_back(passage_from_json(j));
    }
    std::map<std::string, std::string> doc_titles;
    for (const auto& j : read_jsonl(artifacts_dir() / kDocuments)) {
        doc_titles[j.at("doc_id").get<std::string>()] = j.at("title").get<std::string>();
    }
    std::map<std::string, Query> query_of;
    for (const char* file : {kQueriesBottomup, kQueriesTopic}) {
        for (const auto& j : read_jsonl(artifacts_dir() / file)) {
            Query q = query_from_json(j);
            query_of[q.query_id] = std::move(q);
        }
    }
    std::vector<RelevanceLabel> direct, mined;
    for (const auto& j : read_jsonl(artifacts_dir() / kLabelsDirect)) {
        direct.push_back(label_from_json(j));
    }
    for (const auto& j : read_jsonl(artifacts_dir() / kLabelsMined)) {
        mined.push_back(label_from_json(j));
    }

    auto subsets = assemble_qrels(direct, mined);

    fs::path dataset = out / kDataset;
    fs::create_directories(dataset);
    emit_corpus(kept, doc_titles, dataset / "corpus.jsonl");

    std::set<std::string> corpus_ids;
    std::map<std::string, std::size_t> passage_cp_len;
    for (const auto& p : kept) {
        corpus_ids.insert(p.passage_id);
        passage_cp_len[p.passage_id] = p.char_len;
    }

    std::vector<SubsetBundle> bundles;
    for (const auto& name : subset_names()) {
        SubsetBundle bundle;
        bundle.name = name;
        bundle.qrels = subsets.at(name);
        std::set<std::string> qids;
        for (const auto& label : bundle.qrels) qids.insert(label.query_id);
        for (const auto& qid : qids) {
            auto it = query_of.find(qid);
            if (it == query_of.end()) {
                throw IoError("emit: qrel query id '" + qid + "' has no query record");
            }
            bundle.queries.push_back(it->second);
        }
        bundles.push_back(std::move(bundle));
    }
    SubsetBundle all = make_all_bundle(bundles);

    std::vector<StatsRow> stats;
    for (const auto& bundle : bundles) {
        fs::path dir = dataset / bundle.name;
        fs::create_directories(dir);
        emit_subset(bundle, corpus_ids, dir);
        stats.push_back(compute_stats(bundle, passage_cp_len));
    }
    fs::create_directories(dataset / all.name);
    emit_subset(all, corpus_ids, dataset / all.name);
    stats.push_back(compute_stats(all, passage_cp_len));
    write_stats_tsv(stats, dataset / "stats.tsv");
}

void PipelineRunner::run_audit(const fs::path& out) {
    std::vector<ScoredPair> log;
    for (const auto& j : read_jsonl(artifacts_dir() / kAuditLog)) log.push_back(pair_from_json(j));

    std::map<std::string, std::string> text_of;
    for (const char* file : {kQueriesBottomup, kQueriesTopic}) {
        for (const auto& j : read_jsonl(artifacts_dir() / file)) {
            text_of[j.at("query_id").get<std::string>()] = j.at("text").get<std::string>();
        }
    }
    for (const auto& j : read_jsonl(artifacts_dir() / kIntents)) {
        auto subqueries = j.at("subqueries").get<std::vector<std::string>>();
        std::string base = j.at("query_id").get<std::string>();
        for (std::size_t i = 0; i < subqueries.size(); ++i) {
            text_of[base + "#s" + std::to_string(i)] = subqueries[i];
        }
    }

    auto bins = bin_and_sample(log, config_.audit.per_bin, stage_seed("audit"));
    auto backend = make_chat();
    std::vector<JudgeScore> judged;
    for (const auto& bin : bins) {
        for (const auto& pair : bin.samples) {
            auto a = text_of.find(pair.query_a_id);
            auto b = text_of.find(pair.query_b_id);
            judged.push_back(judge_pair(pair, a == text_of.end() ? std::string() : a->second,
                                        b == text_of.end() ? std::string() : b->second, *backend,
                                        config_.llm.retries));
        }
    }
    AuditReport report = estimate_rates(judged, config_.mining.threshold);
    emit_audit(report, bins, judged, out);

    std::vector<json> transcripts;
    for (const auto& j : judged) {
        transcripts.push_back({{"query_a_id", j.pair.query_a_id},
                               {"query_b_id", j.pair.query_b_id},
                               {"score", j.pair.score},
                               {"level", std::string(level_name(j.pair.level))},
                               {"judged", j.judged},
                               {"rating", j.rating},
                               {"rationale", j.rationale}});
    }
    write_jsonl(out / kJudgeTranscripts, transcripts);
}

namespace {

// Plain matrix TSV: header "model<TAB>subset...", one row per model.
struct ResultMatrix {
    std::vector<std::string> models;
    std::vector<std::string> subsets;
    std::vector<std::vector<double>> values;
};

ResultMatrix load_result_matrix(const fs::path& file) {
    ResultMatrix matrix;
    bool first = true;
    for_each_line(file, [&](std::size_t line_no, std::string_view line) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            std::size_t tab = line.find('\t', start);
            cells.emplace_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
            if (tab == std::string_view::npos) break;
            start = tab + 1;
        }
        if (first) {
            first = false;
            if (cells.size() < 2) throw ParseError(line_no, "expected 'model<TAB>subset...' header");
            matrix.subsets.assign(cells.begin() + 1, cells.end());
            return;
        }
        if (cells.size() != matrix.subsets.size() + 1) {
            throw ParseError(line_no, "row width does not match header");
        }
        matrix.models.push_back(cells[0]);
        std::vector<double> row;
        for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(std::stod(cells[i]));
        matrix.values.push_back(std::move(row));
    });
    return matrix;
}

}  // namespace

void PipelineRunner::run_eval(const fs::path& out) {
    fs::path dataset = artifacts_dir() / kDataset;
    std::vector<IdText> corpus;
    for (const auto& j : read_jsonl(dataset / "corpus.jsonl")) {
        corpus.push_back({j.at("_id").get<std::string>(), j.at("text").get<std::string>()});
    }
    auto embedder = make_embedder();

    std::optional<RunResult> fixed_run;
    if (!config_.eval.run_file.empty()) fixed_run = load_trec_run(config_.eval.run_file);

    std::vector<std::string> names = subset_names();
    names.push_back("all");
    std::vector<MetricRow> rows;
    for (const auto& name : names) {
        std::vector<IdText> queries;
        for (const auto& j : read_jsonl(dataset / name / "queries.jsonl")) {
            queries.push_back({j.at("_id").get<std::string>(), j.at("text").get<std::string>()});
        }
        Qrels qrels = load_qrels_tsv(dataset / name / "qrels.tsv");
        RunResult run = fixed_run
                            ? *fixed_run
                            : brute_force_retrieve(queries, corpus, *embedder, config_.eval.k);
        std::string k = std::to_string(config_.eval.k);
        rows.push_back({config_.eval.model_tag, name, "recall@" + k,
                        recall_at_k(run, qrels, config_.eval.k)});
        rows.push_back({config_.eval.model_tag, name, "ndcg@" + k,
                        ndcg_at_k(run, qrels, config_.eval.k)});
    }
    write_metrics_tsv(rows, out / kMetrics);

    if (!config_.eval.results_a.empty() && !config_.eval.results_b.empty()) {
        ResultMatrix a = load_result_matrix(config_.eval.results_a);
        ResultMatrix b = load_result_matrix(config_.eval.results_b);
        std::vector<std::string> shared;
        for (const auto& model : a.models) {
            if (std::find(b.models.begin(), b.models.end(), model) != b.models.end()) {
                shared.push_back(model);
            }
        }
        std::sort(shared.begin(), shared.end());
        auto align = [&](const ResultMatrix& m) {
            std::vector<std::vector<double>> aligned;
            for (const auto& model : shared) {
                auto it = std::find(m.models.begin(), m.models.end(), model);
                aligned.push_back(m.values[static_cast<std::size_t>(it - m.models.begin())]);
            }
            return aligned;
        };
        auto matrix = pearson_matrix(align(a), align(b));
        write_matrix_tsv(a.subsets, b.subsets, matrix, out / "correlation.tsv");
    }
}

void PipelineRunner::run_estimate_cost(const fs::path& out) {
    if (config_.cost.n <= 0.0 || config_.cost.t <= 0.0) {
        throw ConfigError({"/cost/n and /cost/t must be positive for estimate-cost"});
    }
    auto est = estimate_cost(config_.cost.n, config_.cost.t,
                             config_.cost.m > 0.0 ? std::optional<double>(config_.cost.m)
                                                  : std::nullopt,
                             std::optional<double>(config_.cost.l2));
    std::string table = cost_table(est);
    atomic_write_file(out / kCostEstimate, table);
    std::cout << table;
}

}  // namespace retsyn
