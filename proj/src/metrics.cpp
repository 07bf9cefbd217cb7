// Automatic rewrite metrics: edit distance/ratios, repetition penalty,
// BLEU, SARI, Update-ROUGE.

#include "rewritekit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>

#include "rewritekit/errors.hpp"

namespace rewritekit {

namespace {

using Counter = std::map<NGram, long>;

Counter counted(const TokenSeq& seq, int n) {
    Counter out;
    if (n < 1 || static_cast<std::size_t>(n) > seq.size()) return out;
    for (std::size_t i = 0; i + n <= seq.size(); ++i) {
        NGram gram(seq.tokens.begin() + i, seq.tokens.begin() + i + n);
        ++out[std::move(gram)];
    }
    return out;
}

// Multiset intersection: common keys, min of counts.
Counter counter_min(const Counter& a, const Counter& b) {
    Counter out;
    for (const auto& [gram, count] : a) {
        auto it = b.find(gram);
        if (it == b.end()) continue;
        long m = std::min(count, it->second);
        if (m > 0) out.emplace(gram, m);
    }
    return out;
}

// Multiset difference: positive part of a - b.
Counter counter_sub(const Counter& a, const Counter& b) {
    Counter out;
    for (const auto& [gram, count] : a) {
        auto it = b.find(gram);
        long rest = count - (it == b.end() ? 0 : it->second);
        if (rest > 0) out.emplace(gram, rest);
    }
    return out;
}

long counter_total(const Counter& c) {
    long sum = 0;
    for (const auto& [gram, count] : c) sum += count;
    return sum;
}

std::set<NGram> key_set(const Counter& c) {
    std::set<NGram> out;
    for (const auto& [gram, count] : c) out.insert(gram);
    return out;
}

double f1(double p, double r) {
    if (p > 0.0 || r > 0.0) return 2.0 * p * r / (p + r);
    return 0.0;
}

}  // namespace

void NGramPenaltyConfig::validate() const {
    if (thresholds.empty()) {
        throw errors::invalid_argument("repetition penalty needs at least one threshold");
    }
    for (const auto& [order, threshold] : thresholds) {
        if (order < 1) {
            throw errors::invalid_argument("repetition threshold order must be >= 1");
        }
        if (threshold < 2) {
            throw errors::invalid_argument("repetition threshold must be >= 2");
        }
    }
    if (!(penalty > 0.0)) {
        throw errors::invalid_argument("repetition penalty must be positive");
    }
}

int edit_distance(const TokenSeq& source, const TokenSeq& prediction) {
    const auto& a = source.tokens;
    const auto& b = prediction.tokens;
    if (a.empty()) return static_cast<int>(b.size());
    if (b.empty()) return static_cast<int>(a.size());

    std::vector<int> prev(b.size() + 1), curr(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        curr[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, sub});
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

double edit_ratio(const TokenSeq& source, const TokenSeq& prediction) {
    if (source.empty()) {
        throw errors::degenerate_input("edit ratio undefined for an empty source");
    }
    return static_cast<double>(edit_distance(source, prediction)) /
           static_cast<double>(source.size());
}

double length_ratio(const TokenSeq& source, const TokenSeq& prediction) {
    if (source.empty()) {
        throw errors::degenerate_input("length ratio undefined for an empty source");
    }
    return static_cast<double>(prediction.size()) / static_cast<double>(source.size());
}

double ngram_loop_reward(const std::string& text, const NGramPenaltyConfig& config) {
    config.validate();
    TokenSeq toks = tokenize(text, Casing::Lowercase);
    for (const auto& [order, threshold] : config.thresholds) {
        NGramHistogram hist = ngrams(toks, order);
        if (hist.max_count() >= threshold) return -config.penalty;
    }
    return 0.0;
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
    for (int n = 0; n < 4; ++n) {
        matched[n] += other.matched[n];
        total[n] += other.total[n];
    }
    candidate_len += other.candidate_len;
    reference_len += other.reference_len;
    return *this;
}

double BleuStats::score() const {
    if (candidate_len == 0) return 0.0;
    double log_sum = 0.0;
    for (int n = 0; n < 4; ++n) {
        long num = matched[n];
        long den = total[n];
        if (n >= 1 && num == 0) {  // add-one smoothing for empty higher orders
            num += 1;
            den += 1;
        }
        if (num == 0 || den == 0) return 0.0;
        log_sum += std::log(static_cast<double>(num) / static_cast<double>(den));
    }
    double brevity = 1.0;
    if (candidate_len <= reference_len) {
        brevity = std::exp(1.0 - static_cast<double>(reference_len) /
                                     static_cast<double>(candidate_len));
    }
    return std::exp(log_sum / 4.0) * brevity;
}

BleuStats bleu_stats(const std::string& prediction, const std::vector<std::string>& references) {
    if (references.empty()) {
        throw errors::invalid_argument("bleu needs at least one reference");
    }
    TokenSeq cand = tokenize(prediction, Casing::Lowercase);
    std::vector<TokenSeq> refs;
    refs.reserve(references.size());
    for (const auto& r : references) refs.push_back(tokenize(r, Casing::Lowercase));

    BleuStats stats;
    stats.candidate_len = static_cast<long>(cand.size());

    // Closest reference length; ties go to the shorter reference.
    long best_len = 0;
    long best_dist = std::numeric_limits<long>::max();
    for (const auto& ref : refs) {
        long len = static_cast<long>(ref.size());
        long dist = std::labs(len - stats.candidate_len);
        if (dist < best_dist || (dist == best_dist && len < best_len)) {
            best_dist = dist;
            best_len = len;
        }
    }
    stats.reference_len = best_len;

    for (int n = 1; n <= 4; ++n) {
        Counter cand_counts = counted(cand, n);
        Counter max_ref;
        for (const auto& ref : refs) {
            for (const auto& [gram, count] : counted(ref, n)) {
                auto [it, inserted] = max_ref.emplace(gram, count);
                if (!inserted) it->second = std::max(it->second, count);
            }
        }
        long matched = 0;
        long total = 0;
        for (const auto& [gram, count] : cand_counts) {
            total += count;
            auto it = max_ref.find(gram);
            if (it != max_ref.end()) matched += std::min(count, it->second);
        }
        stats.matched[n - 1] = matched;
        stats.total[n - 1] = total;
    }
    return stats;
}

double bleu(const std::string& prediction, const std::vector<std::string>& references) {
    return bleu_stats(prediction, references).score();
}

double sari(const std::string& source, const std::string& prediction,
            const std::vector<std::string>& references) {
    if (references.empty()) {
        throw errors::invalid_argument("sari needs at least one reference");
    }
    TokenSeq src = tokenize(source, Casing::Lowercase);
    TokenSeq cand = tokenize(prediction, Casing::Lowercase);
    std::vector<TokenSeq> refs;
    refs.reserve(references.size());
    for (const auto& r : references) refs.push_back(tokenize(r, Casing::Lowercase));
    const long numref = static_cast<long>(refs.size());

    double keep_sum = 0.0;
    double del_sum = 0.0;
    double add_sum = 0.0;

    for (int n = 1; n <= 4; ++n) {
        Counter s_cnt = counted(src, n);
        Counter c_cnt = counted(cand, n);
        Counter r_cnt;
        for (const auto& ref : refs) {
            for (const auto& [gram, count] : counted(ref, n)) r_cnt[gram] += count;
        }

        // Source/candidate counts are replicated once per reference so they
        // live on the same scale as the pooled reference counts.
        Counter s_rep = s_cnt;
        Counter c_rep = c_cnt;
        for (auto& [gram, count] : s_rep) count *= numref;
        for (auto& [gram, count] : c_rep) count *= numref;

        // KEEP: kept n-grams, credited by the fraction the references keep.
        Counter keep_rep = counter_min(s_rep, c_rep);
        Counter keepgood = counter_min(keep_rep, r_cnt);
        Counter keepall = counter_min(s_rep, r_cnt);
        double keep_tmp1 = 0.0;
        double keep_tmp2 = 0.0;
        for (const auto& [gram, count] : keepgood) {
            keep_tmp1 += static_cast<double>(count) /
                         static_cast<double>(keep_rep.at(gram));
            keep_tmp2 += static_cast<double>(count);
        }
        double keep_p = keep_rep.empty()
                            ? 1.0
                            : keep_tmp1 / static_cast<double>(keep_rep.size());
        double keep_r = keepall.empty()
                            ? 1.0
                            : keep_tmp2 / static_cast<double>(counter_total(keepall));
        keep_sum += f1(keep_p, keep_r);

        // DELETE: precision of deletions only.
        Counter del_rep = counter_sub(s_rep, c_rep);
        Counter delgood = counter_sub(del_rep, r_cnt);
        double del_tmp = 0.0;
        for (const auto& [gram, count] : delgood) {
            del_tmp += static_cast<double>(count) / static_cast<double>(del_rep.at(gram));
        }
        del_sum += del_rep.empty() ? 1.0 : del_tmp / static_cast<double>(del_rep.size());

        // ADD: F1 over distinct added n-grams.
        std::set<NGram> s_set = key_set(s_cnt);
        std::set<NGram> c_set = key_set(c_cnt);
        std::set<NGram> r_set = key_set(r_cnt);
        std::set<NGram> addgrams;
        std::set_difference(c_set.begin(), c_set.end(), s_set.begin(), s_set.end(),
                            std::inserter(addgrams, addgrams.end()));
        std::set<NGram> addgood;
        std::set_intersection(addgrams.begin(), addgrams.end(), r_set.begin(), r_set.end(),
                              std::inserter(addgood, addgood.end()));
        std::set<NGram> addall;
        std::set_difference(r_set.begin(), r_set.end(), s_set.begin(), s_set.end(),
                            std::inserter(addall, addall.end()));
        double add_p = addgrams.empty() ? 1.0
                                        : static_cast<double>(addgood.size()) /
                                              static_cast<double>(addgrams.size());
        double add_r = addall.empty() ? 1.0
                                      : static_cast<double>(addgood.size()) /
                                            static_cast<double>(addall.size());
        add_sum += f1(add_p, add_r);
    }

    return (keep_sum / 4.0 + del_sum / 4.0 + add_sum / 4.0) / 3.0;
}

double rouge_l_f1(const TokenSeq& prediction, const TokenSeq& reference) {
    if (prediction.empty() || reference.empty()) return 0.0;
    const auto& a = prediction.tokens;
    const auto& b = reference.tokens;
    std::vector<int> prev(b.size() + 1, 0), curr(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1]) {
                curr[j] = prev[j - 1] + 1;
            } else {
                curr[j] = std::max(prev[j], curr[j - 1]);
            }
        }
        std::swap(prev, curr);
    }
    int lcs = prev[b.size()];
    if (lcs == 0) return 0.0;
    double p = static_cast<double>(lcs) / static_cast<double>(a.size());
    double r = static_cast<double>(lcs) / static_cast<double>(b.size());
    return f1(p, r);
}

namespace {

// Tokens of the sentences in `text` that do not appear (whitespace-
// normalized) among the source sentences.
TokenSeq updated_tokens(const std::string& text, const std::set<std::string>& source_sentences) {
    std::string joined;
    for (const auto& sentence : split_sentences(text)) {
        if (source_sentences.count(normalize_whitespace(sentence)) > 0) continue;
        if (!joined.empty()) joined += ' ';
        joined += sentence;
    }
    return tokenize(joined, Casing::Lowercase);
}

}  // namespace

double update_rouge(const std::string& source, const std::string& prediction,
                    const std::vector<std::string>& references) {
    if (references.empty()) {
        throw errors::invalid_argument("update rouge needs at least one reference");
    }
    std::set<std::string> source_sentences;
    for (const auto& sentence : split_sentences(source)) {
        source_sentences.insert(normalize_whitespace(sentence));
    }
    TokenSeq pred_updated = updated_tokens(prediction, source_sentences);

    double best = 0.0;
    for (const auto& ref : references) {
        TokenSeq ref_updated = updated_tokens(ref, source_sentences);
        double score = 0.0;
        if (pred_updated.empty() && ref_updated.empty()) {
            score = 1.0;
        } else if (pred_updated.empty() || ref_updated.empty()) {
            score = 0.0;
        } else {
            score = rouge_l_f1(pred_updated, ref_updated);
        }
        best = std::max(best, score);
    }
    return best;
}

}  // namespace rewritekit
