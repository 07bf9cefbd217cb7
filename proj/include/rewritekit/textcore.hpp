#pragma once

#include <map>
#include <string>
#include <vector>

namespace rewritekit {

enum class Casing { Preserve, Lowercase };

/// Whitespace-delimited token sequence. Tokens never contain whitespace
/// and are never empty; order matches the input text.
struct TokenSeq {
    std::vector<std::string> tokens;
    Casing casing = Casing::Preserve;

    std::size_t size() const { return tokens.size(); }
    bool empty() const { return tokens.empty(); }

    /// Tokens joined with single spaces.
    std::string join() const;
};

using NGram = std::vector<std::string>;

/// Sliding-window n-gram counts over a token sequence.
struct NGramHistogram {
    int n = 1;
    std::map<NGram, int> counts;

    int total() const;
    int max_count() const;
};

/// Splits on runs of Unicode whitespace; lowercases (ASCII) when asked.
/// Punctuation stays attached to its neighboring characters.
TokenSeq tokenize(const std::string& text, Casing casing = Casing::Preserve);

/// All contiguous n-grams of `seq`. Throws invalid-argument for n < 1.
NGramHistogram ngrams(const TokenSeq& seq, int n);

/// Splits after '.', '!' or '?' followed by whitespace or end of text,
/// trimming surrounding whitespace. Text without terminators is one
/// sentence; whitespace-only text yields no sentences.
std::vector<std::string> split_sentences(const std::string& text);

/// Strips leading/trailing Unicode whitespace; interior text is untouched.
std::string trim(const std::string& text);

/// Collapses whitespace runs to single spaces and trims the ends.
std::string normalize_whitespace(const std::string& text);

}  // namespace rewritekit
