#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "rewritekit/textcore.hpp"

namespace rewritekit {

/// Repetition-loop detector settings: n-gram order -> count threshold,
/// plus the penalty magnitude returned when any threshold fires.
struct NGramPenaltyConfig {
    std::map<int, int> thresholds = {{1, 8}, {2, 5}, {3, 4}, {4, 3}};
    double penalty = 1.0;

    /// Throws invalid-argument unless all orders >= 1, thresholds >= 2
    /// and penalty > 0.
    void validate() const;
};

/// Per-example automatic metric values. The n-gram metrics live in [0,1]
/// here; reports scale them by 100.
struct MetricReport {
    double edit_ratio = 0.0;
    double length_ratio = 0.0;
    double bleu = 0.0;
    double sari = 0.0;
    double update_rouge = 0.0;
};

/// Token-level Levenshtein distance (unit-cost insert/delete/substitute).
int edit_distance(const TokenSeq& source, const TokenSeq& prediction);

/// edit_distance / |source|. Throws degenerate-input on an empty source.
double edit_ratio(const TokenSeq& source, const TokenSeq& prediction);

/// |prediction| / |source|. Throws degenerate-input on an empty source.
double length_ratio(const TokenSeq& source, const TokenSeq& prediction);

/// Scans thresholds in ascending n-gram order; returns -penalty as soon
/// as any n-gram count reaches its threshold, else 0.
double ngram_loop_reward(const std::string& text, const NGramPenaltyConfig& config);

/// Additive BLEU sufficient statistics (orders 1-4). Summing stats over
/// examples and scoring the sum gives corpus BLEU.
struct BleuStats {
    std::array<long, 4> matched{};
    std::array<long, 4> total{};
    long candidate_len = 0;
    long reference_len = 0;

    BleuStats& operator+=(const BleuStats& other);

    /// Geometric mean of clipped n-gram precisions times the brevity
    /// penalty. Orders >= 2 with zero matches get +1/+1 smoothing.
    double score() const;
};

BleuStats bleu_stats(const std::string& prediction, const std::vector<std::string>& references);

double bleu(const std::string& prediction, const std::vector<std::string>& references);

/// Arithmetic mean over n-gram orders 1-4 of (keep F1 + delete precision
/// + add F1)/3, with multi-reference fractional weighting.
double sari(const std::string& source, const std::string& prediction,
            const std::vector<std::string>& references);

/// Longest-common-subsequence F1 between two token sequences.
double rouge_l_f1(const TokenSeq& prediction, const TokenSeq& reference);

/// ROUGE-L F1 over the "updated" sentences (those not present verbatim in
/// the source, after whitespace normalization), maximized over references.
/// Both sides empty -> 1.0; exactly one side empty -> 0.0.
double update_rouge(const std::string& source, const std::string& prediction,
                    const std::vector<std::string>& references);

}  // namespace rewritekit
