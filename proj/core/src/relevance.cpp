#include "retsyn/relevance.hpp"

#include <algorithm>
#include <iostream>
#include <set>

namespace retsyn {

std::string_view relation_name(RelationKind kind) {
    switch (kind) {
        case RelationKind::Subset: return "subset";
        case RelationKind::Equivalent: return "equivalent";
        case RelationKind::Superset: return "superset";
    }
    return "subset";
}

std::vector<RelevanceLabel> direct_map(const std::vector<Query>& queries) {
    std::vector<RelevanceLabel> labels;
    for (const auto& q : queries) {
        if (q.text.empty() || q.passage_id.empty()) continue;
        if (q.level == QueryLevel::Topic) continue;
        RelevanceLabel label;
        label.query_id = q.query_id;
        label.passage_id = q.passage_id;
        label.kind = q.level == QueryLevel::Sentence ? RelationKind::Subset
                                                     : RelationKind::Equivalent;
        label.provenance = Provenance::Direct;
        label.score = 1.0;
        labels.push_back(std::move(label));
    }
    std::sort(labels.begin(), labels.end(), [](const RelevanceLabel& a, const RelevanceLabel& b) {
        if (a.query_id != b.query_id) return a.query_id < b.query_id;
        return a.passage_id < b.passage_id;
    });
    return labels;
}

namespace {

void sort_queries(std::vector<Query>& queries) {
    std::sort(queries.begin(), queries.end(),
              [](const Query& a, const Query& b) { return a.query_id < b.query_id; });
}

void finish(MineOutcome& out) {
    // Deduplicate (query, passage), keeping the highest score.
    std::map<std::pair<std::string, std::string>, RelevanceLabel> best;
    for (auto& label : out.labels) {
        auto key = std::make_pair(label.query_id, label.passage_id);
        auto it = best.find(key);
        if (it == best.end() || label.score > it->second.score) best[key] = label;
    }
    out.labels.clear();
    for (auto& [key, label] : best) out.labels.push_back(label);
    std::sort(out.audit_log.begin(), out.audit_log.end(),
              [](const ScoredPair& a, const ScoredPair& b) {
                  if (a.space_id != b.space_id) return a.space_id < b.space_id;
                  if (a.query_a_id != b.query_a_id) return a.query_a_id < b.query_a_id;
                  return a.query_b_id < b.query_b_id;
              });
}

double score_pair(Reranker& reranker, const std::string& a, const std::string& b) {
    RetryDelays delays;
    delays.initial = std::chrono::milliseconds(100);
    auto result = with_retries(2, delays, [&] { return reranker.rerank(a, b); });
    if (!result.ok()) {
        throw BackendFailureError("reranker failed: " + result.error().message);
    }
    return result.value().score;
}

}  // namespace

std::vector<SentenceSpace> build_sentence_spaces(const std::vector<Query>& queries) {
    std::map<std::string, SentenceSpace> by_doc;
    for (const auto& q : queries) {
        if (q.level != QueryLevel::Sentence || q.text.empty()) continue;
        auto& space = by_doc[q.doc_id];
        space.doc_id = q.doc_id;
        space.queries.push_back(q);
    }
    std::vector<SentenceSpace> out;
    for (auto& [doc_id, space] : by_doc) {
        sort_queries(space.queries);
        out.push_back(std::move(space));
    }
    return out;
}

std::vector<PassageSpace> build_passage_spaces(
    const std::vector<Query>& queries, const std::map<std::string, std::string>& subtree_of_doc,
    std::vector<std::string>* flagged_docs) {
    std::map<std::string, PassageSpace> by_subtree;
    std::set<std::string> flagged;
    for (const auto& q : queries) {
        if (q.level != QueryLevel::Passage || q.text.empty()) continue;
        auto it = subtree_of_doc.find(q.doc_id);
        if (it == subtree_of_doc.end()) {
            flagged.insert(q.doc_id);
            continue;
        }
        auto& space = by_subtree[it->second];
        space.space_id = it->second;
        space.queries.push_back(q);
    }
    if (flagged_docs) flagged_docs->assign(flagged.begin(), flagged.end());
    std::vector<PassageSpace> out;
    for (auto& [space_id, space] : by_subtree) {
        sort_queries(space.queries);
        out.push_back(std::move(space));
    }
    return out;
}

std::vector<TopicSpace> build_topic_spaces(
    const std::vector<Query>& topic_queries,
    const std::map<std::string, std::vector<std::string>>& subqueries_of_topic_query,
    const std::map<std::string, std::vector<std::string>>& member_docs_of_topic,
    const std::vector<Query>& passage_queries) {
    std::map<std::string, std::vector<Query>> passage_by_doc;
    for (const auto& q : passage_queries) {
        if (q.level != QueryLevel::Passage || q.text.empty()) continue;
        passage_by_doc[q.doc_id].push_back(q);
    }

    std::vector<TopicSpace> out;
    for (const auto& tq : topic_queries) {
        if (tq.level != QueryLevel::Topic || !tq.topic_id) continue;
        TopicSpace space;
        space.space_id = tq.query_id;
        space.topic_query = tq;
        auto sq = subqueries_of_topic_query.find(tq.query_id);
        if (sq != subqueries_of_topic_query.end()) {
            for (std::size_t i = 0; i < sq->second.size(); ++i) {
                space.subqueries.emplace_back(tq.query_id + "#s" + std::to_string(i),
                                              sq->second[i]);
            }
        }
        auto members = member_docs_of_topic.find(*tq.topic_id);
        if (members != member_docs_of_topic.end()) {
            for (const auto& doc_id : members->second) {
                auto it = passage_by_doc.find(doc_id);
                if (it == passage_by_doc.end()) continue;
                space.candidates.insert(space.candidates.end(), it->second.begin(),
                                        it->second.end());
            }
        }
        sort_queries(space.candidates);
        out.push_back(std::move(space));
    }
    std::sort(out.begin(), out.end(),
              [](const TopicSpace& a, const TopicSpace& b) { return a.space_id < b.space_id; });
    return out;
}

MineOutcome mine_sentence_level(const std::vector<SentenceSpace>& spaces,
                                const MiningConfig& config, Reranker& reranker) {
    MineOutcome out;
    for (const auto& space : spaces) {
        std::size_t budget = config.max_pairs_per_space;
        bool truncated = false;
        const auto& qs = space.queries;
        for (std::size_t i = 0; i < qs.size() && !truncated; ++i) {
            for (std::size_t j = i + 1; j < qs.size(); ++j) {
                if (qs[i].passage_id == qs[j].passage_id) continue;  // other passages only
                if (budget == 0) {
                    truncated = true;
                    break;
                }
                --budget;
                double score = score_pair(reranker, qs[i].text, qs[j].text);
                ++out.pairs_scored;
                if (score >= config.audit_floor) {
                    out.audit_log.push_back(
                        {qs[i].query_id, qs[j].query_id, score, QueryLevel::Sentence, space.doc_id});
                }
                if (score >= config.threshold) {
                    out.labels.push_back({qs[i].query_id, qs[j].passage_id, RelationKind::Subset,
                                          Provenance::Mined, score});
                    out.labels.push_back({qs[j].query_id, qs[i].passage_id, RelationKind::Subset,
                                          Provenance::Mined, score});
                }
            }
        }
        if (truncated) {
            ++out.truncated_spaces;
            std::cerr << "[mine] WARNING: sentence space " << space.doc_id
                      << " exceeded max_pairs_per_space=" << config.max_pairs_per_space
                      << ", pair list truncated\n";
        }
    }
    finish(out);
    return out;
}

MineOutcome mine_passage_level(const std::vector<PassageSpace>& spaces,
                               const MiningConfig& config, Reranker& reranker) {
    MineOutcome out;
    for (const auto& space : spaces) {
        std::size_t budget = config.max_pairs_per_space;
        bool truncated = false;
        const auto& qs = space.queries;
        for (std::size_t i = 0; i < qs.size() && !truncated; ++i) {
            for (std::size_t j = i + 1; j < qs.size(); ++j) {
                if (budget == 0) {
                    truncated = true;
                    break;
                }
                --budget;
                double score = score_pair(reranker, qs[i].text, qs[j].text);
                ++out.pairs_scored;
                if (score >= config.audit_floor) {
                    out.audit_log.push_back(
                        {qs[i].query_id, qs[j].query_id, score, QueryLevel::Passage, space.space_id});
                }
                if (score >= config.threshold) {
                    out.labels.push_back({qs[i].query_id, qs[j].passage_id,
                                          RelationKind::Equivalent, Provenance::Mined, score});
                    out.labels.push_back({qs[j].query_id, qs[i].passage_id,
                                          RelationKind::Equivalent, Provenance::Mined, score});
                }
            }
        }
        if (truncated) {
            ++out.truncated_spaces;
            std::cerr << "[mine] WARNING: passage space " << space.space_id
                      << " exceeded max_pairs_per_space=" << config.max_pairs_per_space
                      << ", pair list truncated\n";
        }
    }
    finish(out);
    return out;
}

MineOutcome mine_topic_level(const std::vector<TopicSpace>& spaces, const MiningConfig& config,
                             Reranker& reranker) {
    MineOutcome out;
    for (const auto& space : spaces) {
        std::size_t budget = config.max_pairs_per_space;
        bool truncated = false;
        for (std::size_t s = 0; s < space.subqueries.size() && !truncated; ++s) {
            for (const auto& candidate : space.candidates) {
                if (budget == 0) {
                    truncated = true;
                    break;
                }
                --budget;
                // Directed: the subquery probes the passage query.
                double score =
                    score_pair(reranker, space.subqueries[s].second, candidate.text);
                ++out.pairs_scored;
                if (score >= config.audit_floor) {
                    out.audit_log.push_back({space.subqueries[s].first, candidate.query_id, score,
                                             QueryLevel::Topic, space.space_id});
                }
                if (score >= config.threshold) {
                    // The parent intent gains the matched query's passage.
                    out.labels.push_back({space.topic_query.query_id, candidate.passage_id,
                                          RelationKind::Superset, Provenance::Mined, score});
                }
            }
        }
        if (truncated) {
            ++out.truncated_spaces;
            std::cerr << "[mine] WARNING: topic space " << space.space_id
                      << " exceeded max_pairs_per_space=" << config.max_pairs_per_space
                      << ", pair list truncated\n";
        }
    }
    finish(out);
    return out;
}

namespace {

std::vector<RelevanceLabel> dedup_prefer_direct(std::vector<RelevanceLabel> labels) {
    std::map<std::pair<std::string, std::string>, RelevanceLabel> best;
    for (auto& label : labels) {
        auto key = std::make_pair(label.query_id, label.passage_id);
        auto it = best.find(key);
        if (it == best.end()) {
            best[key] = label;
        } else if (it->second.provenance == Provenance::Mined &&
                   label.provenance == Provenance::Direct) {
            best[key] = label;
        }
    }
    std::vector<RelevanceLabel> out;
    out.reserve(best.size());
    for (auto& [key, label] : best) out.push_back(label);
    return out;
}

}  // namespace

std::map<std::string, std::vector<RelevanceLabel>> assemble_qrels(
    const std::vector<RelevanceLabel>& direct, const std::vector<RelevanceLabel>& mined) {
    std::vector<RelevanceLabel> direct_sentence, direct_passage;
    for (const auto& label : direct) {
        (label.kind == RelationKind::Subset ? direct_sentence : direct_passage).push_back(label);
    }
    std::vector<RelevanceLabel> mined_sentence, mined_passage, mined_topic;
    for (const auto& label : mined) {
        switch (label.kind) {
            case RelationKind::Subset: mined_sentence.push_back(label); break;
            case RelationKind::Equivalent: mined_passage.push_back(label); break;
            case RelationKind::Superset: mined_topic.push_back(label); break;
        }
    }

    auto mined_subset = [](const std::vector<RelevanceLabel>& direct_side,
                           const std::vector<RelevanceLabel>& mined_side) {
        std::set<std::string> with_mined;
        for (const auto& label : mined_side) with_mined.insert(label.query_id);
        std::vector<RelevanceLabel> merged;
        for (const auto& label : direct_side) {
            if (with_mined.count(label.query_id)) merged.push_back(label);
        }
        merged.insert(merged.end(), mined_side.begin(), mined_side.end());
        return dedup_prefer_direct(std::move(merged));
    };

    std::map<std::string, std::vector<RelevanceLabel>> subsets;
    subsets["sentence"] = dedup_prefer_direct(direct_sentence);
    subsets["sentence-mined"] = mined_subset(direct_sentence, mined_sentence);
    subsets["passage"] = dedup_prefer_direct(direct_passage);
    subsets["passage-mined"] = mined_subset(direct_passage, mined_passage);
    subsets["topic"] = dedup_prefer_direct(mined_topic);
    return subsets;
}

}  // namespace retsyn
