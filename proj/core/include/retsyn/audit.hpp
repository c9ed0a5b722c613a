#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "retsyn/gateway.hpp"
#include "retsyn/relevance.hpp"

namespace retsyn {

// The 8 high-similarity intervals partitioning [0.85, 1.00]: the top bin is
// closed, the rest half-open [lower, upper).
struct IntervalBin {
    double lower = 0.0;
    double upper = 0.0;
    bool upper_inclusive = false;
    std::size_t population = 0;       // pairs falling in the bin
    std::vector<ScoredPair> samples;  // seeded sample, at most per_bin
};

std::vector<IntervalBin> audit_bins();

// Bin index for a score, or -1 outside [0.85, 1.00]. Bin 0 is [0.99, 1.00].
int bin_index(double score);

// Assigns pairs to bins and draws a uniform sample without replacement of
// min(per_bin, |bin|) per bin. Input order does not matter: pairs are sorted
// before sampling.
std::vector<IntervalBin> bin_and_sample(std::vector<ScoredPair> audit_log, std::size_t per_bin,
                                        std::uint64_t seed);

// First standalone digit in 1..5, e.g. "Score: 3. Partially ..." -> 3.
std::optional<int> parse_rating(const std::string& text);

struct JudgeScore {
    ScoredPair pair;
    int rating = 0;  // 1..5, valid when judged
    std::string rationale;
    bool judged = false;
};

ChatRequest build_judge_prompt(const std::string& sentence1, const std::string& sentence2);

// Re-asks up to `retries` times; an unjudgable sample is excluded from rates.
JudgeScore judge_pair(const ScoredPair& pair, const std::string& text_a, const std::string& text_b,
                      ChatBackend& backend, int retries, const RetryDelays& delays = {});

struct RateSet {
    double fp_rate = 0.0;  // score >= threshold but rating < 3
    double fn_rate = 0.0;  // score < threshold but rating > 3
    std::size_t above = 0;   // judged samples at or above the threshold
    std::size_t below = 0;   // judged samples below the threshold
    std::size_t neutral = 0;  // rating exactly 3
};

struct AuditReport {
    RateSet pooled;
    std::map<std::string, RateSet> per_level;  // sentence / passage / topic
    std::size_t judged = 0;
    std::size_t unjudged = 0;
};

// Rating 3 counts toward neither numerator; denominators are the judged
// samples on each side of the threshold.
AuditReport estimate_rates(const std::vector<JudgeScore>& judged, double threshold = 0.99);

// audit_histogram.tsv (bin, population, sampled, mean rating) and
// audit_report.tsv (pooled + per-level rates).
void emit_audit(const AuditReport& report, const std::vector<IntervalBin>& bins,
                const std::vector<JudgeScore>& judged, const std::filesystem::path& dir);

}  // namespace retsyn
