#include "retsyn/top_down.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "retsyn/dates.hpp"
#include "retsyn/utf8.hpp"

namespace retsyn {

using nlohmann::json;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

TemporalEncoding encode_time(std::int64_t day_displacement) {
    const double d = static_cast<double>(day_displacement);
    TemporalEncoding enc;
    const double periods[3] = {7.0, 30.4375, 365.25};
    for (int i = 0; i < 3; ++i) {
        double phase = kTwoPi * d / periods[i];
        enc.values[2 * i] = std::sin(phase);
        enc.values[2 * i + 1] = std::cos(phase);
    }
    return enc;
}

TemporalEncoding encode_time(std::string_view date, std::string_view reference) {
    auto d = day_displacement(date, reference);
    if (!d) throw IoError("encode_time: unparsable date '" + std::string(date) + "' or reference '" +
                          std::string(reference) + "'");
    return encode_time(*d);
}

std::vector<TitleRecord> collect_titles(const std::vector<Document>& docs,
                                        IndustryClassifier& classifier, std::size_t min_cjk) {
    std::vector<TitleRecord> out;
    std::set<std::string> seen;
    for (const auto& doc : docs) {
        if (count_cjk(doc.title) < min_cjk) continue;
        if (!seen.insert(doc.title).second) continue;
        TitleRecord rec;
        rec.doc_id = doc.doc_id;
        rec.title = doc.title;
        rec.publish_date = doc.publish_date;
        auto label = classifier.classify(doc.title);
        rec.industry = label.ok() ? label.value() : "none";
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<double> build_features(const TitleRecord& record, Embedder& embedder,
                                   std::string_view reference_date, double temporal_weight) {
    auto emb = embedder.embed(record.title);
    if (!emb.ok()) {
        throw BackendFailureError("embed backend failed for title of " + record.doc_id + ": " +
                                  emb.error().message);
    }
    auto enc = encode_time(record.publish_date, reference_date);
    std::vector<double> features = emb.value().values;
    features.reserve(features.size() + enc.values.size());
    for (double v : enc.values) features.push_back(temporal_weight * v);
    return features;
}

TopicTree cluster_topics(const std::vector<TitleRecord>& titles,
                         const std::vector<std::vector<double>>& features,
                         int min_cluster_size) {
    TopicTree tree;
    if (titles.empty()) {
        tree.nodes.push_back(TopicNode{});
        tree.degenerate = true;
        return tree;
    }

    HdbscanResult h = hdbscan(features, min_cluster_size);
    tree.degenerate = h.degenerate_single_root;

    // Reported nodes: selected clusters plus their condensed ancestors.
    std::vector<char> keep(h.clusters.size(), 0);
    for (int c : h.selected) {
        for (int cur = c; cur != -1; cur = h.clusters[cur].parent) {
            if (keep[cur]) break;
            keep[cur] = 1;
        }
    }
    std::vector<int> kept_ids;
    for (std::size_t c = 0; c < h.clusters.size(); ++c) {
        if (keep[c]) kept_ids.push_back(static_cast<int>(c));
    }
    // Condensed ids are topologically ordered (parents first), so reuse that
    // order for stable topic ids.
    std::map<int, int> topic_of_cluster;
    for (int c : kept_ids) {
        int tid = static_cast<int>(tree.nodes.size());
        topic_of_cluster[c] = tid;
        TopicNode node;
        node.topic_id = tid;
        node.persistence = h.clusters[c].stability;
        if (h.clusters[c].parent != -1) {
            // Nearest kept ancestor (ancestors of kept nodes are kept).
            int p = h.clusters[c].parent;
            node.parent_id = topic_of_cluster.at(p);
            tree.nodes[node.parent_id].children.push_back(tid);
        }
        tree.nodes.push_back(std::move(node));
    }

    std::vector<char> selected(h.clusters.size(), 0);
    for (int c : h.selected) selected[c] = 1;
    for (std::size_t p = 0; p < titles.size(); ++p) {
        int cluster = h.label[p];
        if (cluster < 0) {
            tree.noise_docs.push_back(titles[p].doc_id);
            continue;
        }
        int leaf = topic_of_cluster.at(cluster);
        tree.leaf_of_doc[titles[p].doc_id] = leaf;
        for (int cur = leaf; cur != -1; cur = tree.nodes[cur].parent_id) {
            tree.nodes[cur].member_doc_ids.push_back(titles[p].doc_id);
        }
    }
    for (auto& node : tree.nodes) {
        std::sort(node.member_doc_ids.begin(), node.member_doc_ids.end());
        std::sort(node.children.begin(), node.children.end());
    }
    std::sort(tree.noise_docs.begin(), tree.noise_docs.end());
    return tree;
}

std::vector<std::string> tokenize(std::string_view text, Tokenizer tokenizer) {
    std::vector<std::string> tokens;
    // Whitespace-delimited runs first.
    std::vector<std::u32string> runs;
    std::u32string cur;
    for (char32_t cp : decode_utf8(text)) {
        if (is_space_cp(cp)) {
            if (!cur.empty()) runs.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(cp);
        }
    }
    if (!cur.empty()) runs.push_back(std::move(cur));

    if (tokenizer == Tokenizer::Whitespace) {
        for (const auto& run : runs) tokens.push_back(encode_utf8(run));
        return tokens;
    }
    for (const auto& run : runs) {
        if (run.size() == 1) {
            tokens.push_back(encode_utf8(run[0]));
            continue;
        }
        for (std::size_t i = 0; i + 1 < run.size(); ++i) {
            tokens.push_back(encode_utf8(run[i]) + encode_utf8(run[i + 1]));
        }
    }
    return tokens;
}

void ctfidf_keywords(TopicTree& tree, const std::vector<TitleRecord>& titles,
                     std::size_t top_k, Tokenizer tokenizer) {
    std::map<std::string, const TitleRecord*> by_doc;
    for (const auto& t : titles) by_doc[t.doc_id] = &t;

    auto count_tokens = [&](const std::vector<std::string>& doc_ids,
                            std::map<std::string, double>& counts) -> double {
        double total = 0.0;
        for (const auto& doc_id : doc_ids) {
            auto it = by_doc.find(doc_id);
            if (it == by_doc.end()) continue;
            for (auto& tok : tokenize(it->second->title, tokenizer)) {
                counts[tok] += 1.0;
                total += 1.0;
            }
        }
        return total;
    };

    // Global statistics over leaf classes (the partition of non-noise titles).
    std::map<std::string, double> global_tf;
    double total_tokens = 0.0;
    std::size_t n_classes = 0;
    for (const auto& node : tree.nodes) {
        if (!node.is_leaf() || node.member_doc_ids.empty()) continue;
        ++n_classes;
        total_tokens += count_tokens(node.member_doc_ids, global_tf);
    }
    if (n_classes == 0) return;
    const double avg_tokens_per_class = total_tokens / static_cast<double>(n_classes);

    for (auto& node : tree.nodes) {
        node.keywords.clear();
        if (node.member_doc_ids.empty()) continue;
        std::map<std::string, double> class_tf;
        count_tokens(node.member_doc_ids, class_tf);
        std::vector<std::pair<double, std::string>> scored;
        scored.reserve(class_tf.size());
        for (const auto& [term, tf_c] : class_tf) {
            if (tf_c <= 0.0) continue;
            double tf_all = global_tf.count(term) ? global_tf.at(term) : tf_c;
            double w = tf_c * std::log(1.0 + avg_tokens_per_class / tf_all);
            scored.emplace_back(w, term);
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (std::size_t i = 0; i < scored.size() && i < top_k; ++i) {
            node.keywords.push_back(scored[i].second);
        }
    }
}

std::vector<std::string> representative_titles(const TopicTree& tree, int topic_id,
                                               const std::vector<TitleRecord>& titles,
                                               const std::vector<std::vector<double>>& features,
                                               std::size_t k) {
    std::map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < titles.size(); ++i) index_of[titles[i].doc_id] = i;

    const auto& node = tree.nodes.at(static_cast<std::size_t>(topic_id));
    std::vector<std::size_t> members;
    for (const auto& doc_id : node.member_doc_ids) {
        auto it = index_of.find(doc_id);
        if (it != index_of.end()) members.push_back(it->second);
    }
    if (members.empty()) return {};

    std::size_t dim = features[members[0]].size();
    std::vector<double> centroid(dim, 0.0);
    for (std::size_t m : members) {
        for (std::size_t d = 0; d < dim; ++d) centroid[d] += features[m][d];
    }
    for (double& v : centroid) v /= static_cast<double>(members.size());

    auto cosine_to_centroid = [&](std::size_t m) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            dot += features[m][d] * centroid[d];
            na += features[m][d] * features[m][d];
            nb += centroid[d] * centroid[d];
        }
        if (na == 0.0 || nb == 0.0) return 0.0;
        return dot / (std::sqrt(na) * std::sqrt(nb));
    };

    std::vector<std::pair<double, std::string>> ranked;  // (-cosine, doc_id)
    ranked.reserve(members.size());
    for (std::size_t m : members) ranked.emplace_back(-cosine_to_centroid(m), titles[m].doc_id);
    std::sort(ranked.begin(), ranked.end());

    std::vector<std::string> out;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
        out.push_back(titles[index_of.at(ranked[i].second)].title);
    }
    return out;
}

ChatRequest build_intent_prompt(const std::vector<std::string>& keywords,
                                const std::vector<std::string>& representative) {
    std::string kw_line;
    for (std::size_t i = 0; i < keywords.size(); ++i) {
        if (i) kw_line += ", ";
        kw_line += keywords[i];
    }
    json docs = json::array();
    for (const auto& t : representative) docs.push_back(t);

    std::string prompt;
    prompt += "I have a topic described by the following keywords: " + kw_line + "\n";
    prompt +=
        "For this topic, the following documents represent a small but representative subset "
        "of all relevant documents: " +
        docs.dump() + "\n";
    prompt +=
        "Please generate a formatted dictionary list representing query intents and sub-query "
        "sets related to this topic.\n"
        "\n"
        "Output Format:\n"
        "[{\n"
        "    \"intent\": \"{brief description of the core purpose for querying this topic}\",\n"
        "    \"subqueries\": [\n"
        "        \"{subquery 1: first question to address the intent}\",\n"
        "        \"{subquery 2: second question to address the intent}\",\n"
        "        ...]\n"
        "}]";

    ChatRequest request;
    request.messages.push_back({"user", std::move(prompt)});
    return request;
}

namespace {

std::string extract_json_array(const std::string& body) {
    std::size_t fence = body.find("```");
    if (fence != std::string::npos) {
        std::size_t start = body.find('\n', fence);
        if (start != std::string::npos) {
            std::size_t end = body.find("```", start);
            if (end != std::string::npos) return body.substr(start + 1, end - start - 1);
        }
    }
    std::size_t open = body.find('[');
    std::size_t close = body.rfind(']');
    if (open == std::string::npos || close == std::string::npos || close < open) return body;
    return body.substr(open, close - open + 1);
}

}  // namespace

Expected<std::vector<IntentRecord>> parse_intent_response(const std::string& body, int topic_id) {
    json j = json::parse(extract_json_array(body), nullptr, false);
    if (j.is_discarded()) {
        return BackendError{BackendErrorKind::MalformedBody, 0,
                            "intent response is not valid JSON", true};
    }
    if (j.is_object()) j = json::array({j});
    if (!j.is_array() || j.empty()) {
        return BackendError{BackendErrorKind::MalformedBody, 0,
                            "intent response must be a non-empty list", true};
    }
    std::vector<IntentRecord> out;
    for (const auto& item : j) {
        if (!item.is_object() || !item.contains("intent") || !item["intent"].is_string()) {
            return BackendError{BackendErrorKind::MalformedBody, 0,
                                "intent entry missing string 'intent'", true};
        }
        if (!item.contains("subqueries") || !item["subqueries"].is_array() ||
            item["subqueries"].empty()) {
            return BackendError{BackendErrorKind::MalformedBody, 0,
                                "intent entry missing non-empty array 'subqueries'", true};
        }
        IntentRecord rec;
        rec.topic_id = topic_id;
        rec.intent = item["intent"].get<std::string>();
        for (const auto& sq : item["subqueries"]) {
            if (!sq.is_string() || sq.get<std::string>().empty()) {
                return BackendError{BackendErrorKind::MalformedBody, 0,
                                    "subqueries must be non-empty strings", true};
            }
            rec.subqueries.push_back(sq.get<std::string>());
        }
        if (rec.intent.empty()) {
            return BackendError{BackendErrorKind::MalformedBody, 0, "intent must be non-empty", true};
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<IntentRecord> generate_intents(int topic_id, const std::vector<std::string>& keywords,
                                           const std::vector<std::string>& representative,
                                           ChatBackend& backend, int retries,
                                           const RetryDelays& delays, double temperature,
                                           bool* failed) {
    if (failed) *failed = false;
    ChatRequest request = build_intent_prompt(keywords, representative);
    request.temperature = temperature;
    request.retries = retries;
    for (int attempt = 0; attempt <= retries; ++attempt) {
        auto response = chat(backend, request, delays);
        if (!response.ok()) {
            throw BackendFailureError("chat backend failed for topic " + std::to_string(topic_id) +
                                      ": " + response.error().message);
        }
        auto parsed = parse_intent_response(response.value().text, topic_id);
        if (parsed.ok()) return parsed.take();
    }
    if (failed) *failed = true;
    return {};
}

std::string dominant_industry(const std::vector<std::string>& member_industries) {
    if (member_industries.empty()) return "none";
    std::map<std::string, std::size_t> counts;
    for (const auto& label : member_industries) {
        if (label != "none") ++counts[label];
    }
    const double total = static_cast<double>(member_industries.size());
    for (const auto& [label, count] : counts) {
        if (static_cast<double>(count) / total > 2.0 / 3.0) return label;
    }
    return "none";
}

void assign_dominant_industries(TopicTree& tree, const std::vector<TitleRecord>& titles) {
    std::map<std::string, const std::string*> industry_of;
    for (const auto& t : titles) industry_of[t.doc_id] = &t.industry;
    for (auto& node : tree.nodes) {
        std::vector<std::string> members;
        members.reserve(node.member_doc_ids.size());
        for (const auto& doc_id : node.member_doc_ids) {
            auto it = industry_of.find(doc_id);
            if (it != industry_of.end()) members.push_back(*it->second);
        }
        node.dominant_industry = dominant_industry(members);
    }
}

int max_same_industry_subtree(const TopicTree& tree, const std::string& doc_id,
                              const std::string& title_industry) {
    auto it = tree.leaf_of_doc.find(doc_id);
    if (it == tree.leaf_of_doc.end()) return -1;
    int leaf = it->second;
    if (title_industry == "none" || tree.nodes[leaf].dominant_industry != title_industry) {
        return leaf;  // smallest topic fallback
    }
    int best = leaf;
    int cur = tree.nodes[leaf].parent_id;
    while (cur != -1 && tree.nodes[cur].dominant_industry == title_industry) {
        best = cur;
        cur = tree.nodes[cur].parent_id;
    }
    return best;
}

}  // namespace retsyn
