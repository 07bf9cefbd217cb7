#include "rewritekit/reward.hpp"

#include <set>

#include "rewritekit/errors.hpp"

namespace rewritekit {

const char* task_name(RewriteTask task) {
    switch (task) {
        case RewriteTask::Formalize: return "formalize";
        case RewriteTask::Shorten: return "shorten";
        case RewriteTask::Elaborate: return "elaborate";
        case RewriteTask::Paraphrase: return "paraphrase";
        case RewriteTask::Proofread: return "proofread";
    }
    return "unknown";
}

RewriteTask task_from_name(std::string_view name) {
    for (RewriteTask task : kAllTasks) {
        if (name == task_name(task)) return task;
    }
    throw errors::invalid_argument("unknown rewrite task: " + std::string(name));
}

RewardWeights default_weights(RewriteTask task) {
    switch (task) {
        case RewriteTask::Formalize: return {1.0, 1.0, 0.0, 0.4, 1.0};
        case RewriteTask::Shorten: return {1.0, 0.4, -0.2, 0.4, 1.0};
        case RewriteTask::Elaborate: return {0.4, 1.0, 0.5, 0.4, 1.0};
        case RewriteTask::Paraphrase: return {1.0, 1.0, 0.0, 0.4, 1.0};
        case RewriteTask::Proofread: return {1.0, 1.0, 0.0, 0.0, 1.0};
    }
    throw errors::invalid_argument("unknown rewrite task");
}

double stub_nli(const std::string& premise, const std::string& hypothesis) {
    TokenSeq hyp = tokenize(hypothesis, Casing::Lowercase);
    if (hyp.empty()) return 1.0;
    std::set<std::string> hyp_set(hyp.tokens.begin(), hyp.tokens.end());
    TokenSeq prem = tokenize(premise, Casing::Lowercase);
    std::set<std::string> prem_set(prem.tokens.begin(), prem.tokens.end());
    std::size_t hits = 0;
    for (const auto& tok : hyp_set) hits += prem_set.count(tok);
    return static_cast<double>(hits) / static_cast<double>(hyp_set.size());
}

double OverlapNliScorer::score(const std::string& premise, const std::string& hypothesis) {
    return stub_nli(premise, hypothesis);
}

double combined_total(const RewardWeights& weights, const RewardTerms& terms) {
    double total = weights.nli * terms.nli;
    total += weights.reverse_nli * terms.reverse_nli;
    total += weights.length * terms.length_ratio;
    total += weights.edit * terms.edit_ratio;
    total += weights.ngram * terms.ngram_reward;
    return total;
}

RewardBreakdown heuristic_reward(const RewardWeights& weights, const std::string& source,
                                 const std::string& prediction, NliScorer& scorer,
                                 const NGramPenaltyConfig& penalty) {
    TokenSeq src = tokenize(source, Casing::Preserve);
    TokenSeq pred = tokenize(prediction, Casing::Preserve);

    RewardBreakdown out;
    out.weights = weights;
    out.terms.nli = scorer.score(source, prediction);
    out.terms.reverse_nli = scorer.score(prediction, source);
    out.terms.length_ratio = length_ratio(src, pred);
    out.terms.edit_ratio = edit_ratio(src, pred);
    out.terms.ngram_reward = ngram_loop_reward(prediction, penalty);
    out.total = combined_total(out.weights, out.terms);
    return out;
}

RewardBreakdown heuristic_reward(RewriteTask task, const std::string& source,
                                 const std::string& prediction, NliScorer& scorer,
                                 const NGramPenaltyConfig& penalty) {
    return heuristic_reward(default_weights(task), source, prediction, scorer, penalty);
}

}  // namespace rewritekit
