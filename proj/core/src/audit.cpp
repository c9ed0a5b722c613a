#include "retsyn/audit.hpp"

#include <algorithm>

#include "retsyn/io.hpp"
#include "retsyn/rng.hpp"

namespace retsyn {

std::vector<IntervalBin> audit_bins() {
    // Boundaries come from integer hundredths so literal scores like 0.97
    // compare exactly against the bin edges.
    std::vector<IntervalBin> bins;
    bins.push_back({99 / 100.0, 100 / 100.0, true});
    for (int i = 0; i < 7; ++i) {
        int upper = 99 - 2 * i;
        bins.push_back({(upper - 2) / 100.0, upper / 100.0, false});
    }
    return bins;
}

int bin_index(double score) {
    static const std::vector<IntervalBin> kBins = audit_bins();
    for (std::size_t i = 0; i < kBins.size(); ++i) {
        bool upper_ok = kBins[i].upper_inclusive ? score <= kBins[i].upper : score < kBins[i].upper;
        if (score >= kBins[i].lower && upper_ok) return static_cast<int>(i);
    }
    return -1;
}

std::vector<IntervalBin> bin_and_sample(std::vector<ScoredPair> audit_log, std::size_t per_bin,
                                        std::uint64_t seed) {
    std::sort(audit_log.begin(), audit_log.end(), [](const ScoredPair& a, const ScoredPair& b) {
        if (a.query_a_id != b.query_a_id) return a.query_a_id < b.query_a_id;
        if (a.query_b_id != b.query_b_id) return a.query_b_id < b.query_b_id;
        return a.score < b.score;
    });
    auto bins = audit_bins();
    std::vector<std::vector<ScoredPair>> members(bins.size());
    for (auto& pair : audit_log) {
        int idx = bin_index(pair.score);
        if (idx < 0) continue;
        members[static_cast<std::size_t>(idx)].push_back(std::move(pair));
    }
    for (std::size_t b = 0; b < bins.size(); ++b) {
        bins[b].population = members[b].size();
        SplitMix rng(mix64(seed, 0x42D1Bull + b));
        auto picks = sample_indices(members[b].size(), per_bin, rng);
        std::sort(picks.begin(), picks.end());
        for (std::size_t idx : picks) bins[b].samples.push_back(members[b][idx]);
    }
    return bins;
}

std::optional<int> parse_rating(const std::string& text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c < '1' || c > '5') continue;
        bool prev_digit = i > 0 && text[i - 1] >= '0' && text[i - 1] <= '9';
        bool next_digit = i + 1 < text.size() && text[i + 1] >= '0' && text[i + 1] <= '9';
        if (prev_digit || next_digit) continue;
        return c - '0';
    }
    return std::nullopt;
}

ChatRequest build_judge_prompt(const std::string& sentence1, const std::string& sentence2) {
    std::string prompt;
    prompt +=
        "Please evaluate the synonymy between the following two sentences on a scale from 5 "
        "(completely synonymous) to 1 (not synonymous) and provide the score along with a "
        "brief explanation:\n";
    prompt += sentence1 + " and " + sentence2 + ".\n";
    prompt +=
        "\n"
        "Scoring Criteria as follows:\n"
        "Completely Synonymous (5 points): The core meaning of both sentences is identical, "
        "with only differences in expression.\n"
        "Highly Synonymous (4 points): The core meaning is the same, but there are slight "
        "extensions, omissions, or differences in emphasis.\n"
        "Partially Synonymous (3 points): The core meaning overlaps partially, but there are "
        "significant differences in focus or interpretation.\n"
        "Low Synonymy (2 points): Only some keywords or parts of the content are similar, but "
        "the overall meaning is unrelated.\n"
        "Not Synonymous (1 point): The core meanings of the two sentences are entirely "
        "different, with no semantic connection.";

    ChatRequest request;
    request.messages.push_back({"user", std::move(prompt)});
    return request;
}

JudgeScore judge_pair(const ScoredPair& pair, const std::string& text_a, const std::string& text_b,
                      ChatBackend& backend, int retries, const RetryDelays& delays) {
    JudgeScore out;
    out.pair = pair;
    ChatRequest request = build_judge_prompt(text_a, text_b);
    request.retries = retries;
    for (int attempt = 0; attempt <= retries; ++attempt) {
        auto response = chat(backend, request, delays);
        if (!response.ok()) {
            throw BackendFailureError("judge backend failed for pair (" + pair.query_a_id + ", " +
                                      pair.query_b_id + "): " + response.error().message);
        }
        auto rating = parse_rating(response.value().text);
        if (rating) {
            out.rating = *rating;
            out.rationale = response.value().text;
            out.judged = true;
            return out;
        }
    }
    return out;  // unjudged, excluded from rates
}

namespace {

struct RateCounters {
    std::size_t above = 0, below = 0, fp = 0, fn = 0, neutral = 0;

    void add(double score, int rating, double threshold) {
        if (rating == 3) ++neutral;
        if (score >= threshold) {
            ++above;
            if (rating < 3) ++fp;
        } else {
            ++below;
            if (rating > 3) ++fn;
        }
    }

    RateSet finish() const {
        RateSet out;
        out.above = above;
        out.below = below;
        out.neutral = neutral;
        out.fp_rate = above ? static_cast<double>(fp) / static_cast<double>(above) : 0.0;
        out.fn_rate = below ? static_cast<double>(fn) / static_cast<double>(below) : 0.0;
        return out;
    }
};

}  // namespace

AuditReport estimate_rates(const std::vector<JudgeScore>& judged, double threshold) {
    AuditReport report;
    RateCounters pooled;
    std::map<std::string, RateCounters> per_level;
    for (const auto& j : judged) {
        if (!j.judged) {
            ++report.unjudged;
            continue;
        }
        ++report.judged;
        pooled.add(j.pair.score, j.rating, threshold);
        per_level[std::string(level_name(j.pair.level))].add(j.pair.score, j.rating, threshold);
    }
    report.pooled = pooled.finish();
    for (const auto& [level, counters] : per_level) report.per_level[level] = counters.finish();
    return report;
}

void emit_audit(const AuditReport& report, const std::vector<IntervalBin>& bins,
                const std::vector<JudgeScore>& judged, const std::filesystem::path& dir) {
    // Histogram: mean rating per bin over the judged samples.
    std::vector<double> rating_sum(bins.size(), 0.0);
    std::vector<std::size_t> rating_n(bins.size(), 0);
    for (const auto& j : judged) {
        if (!j.judged) continue;
        int idx = bin_index(j.pair.score);
        if (idx < 0) continue;
        rating_sum[static_cast<std::size_t>(idx)] += j.rating;
        ++rating_n[static_cast<std::size_t>(idx)];
    }
    std::vector<std::vector<std::string>> hist_rows;
    for (std::size_t b = 0; b < bins.size(); ++b) {
        std::string label = (bins[b].upper_inclusive ? "[" : "[") + fmt_fixed(bins[b].lower, 2) +
                            "," + fmt_fixed(bins[b].upper, 2) + (bins[b].upper_inclusive ? "]" : ")");
        double mean = rating_n[b] ? rating_sum[b] / static_cast<double>(rating_n[b]) : 0.0;
        hist_rows.push_back({label, std::to_string(bins[b].population),
                             std::to_string(bins[b].samples.size()), fmt_fixed(mean, 4)});
    }
    write_tsv(dir / "audit_histogram.tsv", {"bin", "population", "sampled", "mean_rating"},
              hist_rows);

    std::vector<std::vector<std::string>> rate_rows;
    auto add_rates = [&](const std::string& level, const RateSet& rates) {
        rate_rows.push_back({level, fmt_fixed(rates.fp_rate, 4), fmt_fixed(rates.fn_rate, 4),
                             std::to_string(rates.above), std::to_string(rates.below),
                             std::to_string(rates.neutral)});
    };
    add_rates("pooled", report.pooled);
    for (const auto& [level, rates] : report.per_level) add_rates(level, rates);
    write_tsv(dir / "audit_report.tsv",
              {"level", "fp_rate", "fn_rate", "judged_above", "judged_below", "neutral"},
              rate_rows);
}

}  // namespace retsyn
