#pragma once

#include <array>
#include <string>
#include <string_view>

#include "rewritekit/metrics.hpp"

namespace rewritekit {

enum class RewriteTask { Formalize, Shorten, Elaborate, Paraphrase, Proofread };

inline constexpr std::array<RewriteTask, 5> kAllTasks = {
    RewriteTask::Formalize, RewriteTask::Shorten, RewriteTask::Elaborate,
    RewriteTask::Paraphrase, RewriteTask::Proofread,
};

const char* task_name(RewriteTask task);

/// Parses the lowercase task names used in dataset files. Throws
/// invalid-argument for anything else.
RewriteTask task_from_name(std::string_view name);

/// Per-task weights for the five reward terms, applied in declaration order.
struct RewardWeights {
    double nli = 0.0;
    double reverse_nli = 0.0;
    double length = 0.0;
    double edit = 0.0;
    double ngram = 0.0;
};

RewardWeights default_weights(RewriteTask task);

/// Entailment oracle: how strongly `premise` supports `hypothesis`, in [0,1].
class NliScorer {
public:
    virtual ~NliScorer() = default;
    virtual double score(const std::string& premise, const std::string& hypothesis) = 0;
};

/// Deterministic token-overlap proxy for a trained entailment model: the
/// fraction of the hypothesis' distinct lowercase unigrams that also occur
/// in the premise. An empty hypothesis scores 1.0 (nothing asserted,
/// nothing contradicted).
double stub_nli(const std::string& premise, const std::string& hypothesis);

/// NliScorer wrapper around stub_nli for injection points.
class OverlapNliScorer final : public NliScorer {
public:
    double score(const std::string& premise, const std::string& hypothesis) override;
};

struct RewardTerms {
    double nli = 0.0;
    double reverse_nli = 0.0;
    double length_ratio = 0.0;
    double edit_ratio = 0.0;
    double ngram_reward = 0.0;
};

/// Weighted sum of the five terms, accumulated left to right in the fixed
/// order nli, reverse nli, length, edit, n-gram.
double combined_total(const RewardWeights& weights, const RewardTerms& terms);

struct RewardBreakdown {
    RewardTerms terms;
    RewardWeights weights;
    double total = 0.0;
};

/// Scores `prediction` against `source`: forward/reverse entailment via
/// `scorer`, length and edit ratios on case-preserving tokens, and the
/// repetition penalty on the prediction. Throws degenerate-input when the
/// source has no tokens.
RewardBreakdown heuristic_reward(const RewardWeights& weights, const std::string& source,
                                 const std::string& prediction, NliScorer& scorer,
                                 const NGramPenaltyConfig& penalty = {});

RewardBreakdown heuristic_reward(RewriteTask task, const std::string& source,
                                 const std::string& prediction, NliScorer& scorer,
                                 const NGramPenaltyConfig& penalty = {});

}  // namespace rewritekit
