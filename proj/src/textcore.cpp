#include "rewritekit/textcore.hpp"

#include <algorithm>
#include <cstdint>

#include "rewritekit/errors.hpp"

namespace rewritekit {
namespace {

bool is_space_cp(uint32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Decodes one UTF-8 code point at `i`, advancing it. Invalid bytes are
// passed through as single (non-space) code points.
uint32_t next_cp(const std::string& s, std::size_t& i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    uint32_t cp = c;
    if (c >= 0xF0) { len = 4; cp = c & 0x07u; }
    else if (c >= 0xE0) { len = 3; cp = c & 0x0Fu; }
    else if (c >= 0xC0) { len = 2; cp = c & 0x1Fu; }
    if (len > 1) {
        if (i + len > s.size()) { ++i; return c; }
        for (std::size_t k = 1; k < len; ++k) {
            unsigned char cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0u) != 0x80u) { ++i; return c; }
            cp = (cp << 6) | (cc & 0x3Fu);
        }
    }
    i += len;
    return cp;
}

char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t last_nonspace_end = 0;
    std::size_t i = 0;
    bool seen = false;
    while (i < s.size()) {
        std::size_t start = i;
        uint32_t cp = next_cp(s, i);
        if (!is_space_cp(cp)) {
            if (!seen) { begin = start; seen = true; }
            last_nonspace_end = i;
        }
    }
    if (!seen) return {};
    return s.substr(begin, last_nonspace_end - begin);
}

std::string TokenSeq::join() const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

int NGramHistogram::total() const {
    int sum = 0;
    for (const auto& [gram, count] : counts) sum += count;
    return sum;
}

int NGramHistogram::max_count() const {
    int best = 0;
    for (const auto& [gram, count] : counts) best = std::max(best, count);
    return best;
}

TokenSeq tokenize(const std::string& text, Casing casing) {
    TokenSeq seq;
    seq.casing = casing;
    std::string current;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t start = i;
        uint32_t cp = next_cp(text, i);
        if (is_space_cp(cp)) {
            if (!current.empty()) {
                seq.tokens.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.append(text, start, i - start);
        }
    }
    if (!current.empty()) seq.tokens.push_back(std::move(current));
    if (casing == Casing::Lowercase) {
        for (auto& tok : seq.tokens)
            std::transform(tok.begin(), tok.end(), tok.begin(), ascii_lower);
    }
    return seq;
}

NGramHistogram ngrams(const TokenSeq& seq, int n) {
    if (n < 1) throw errors::invalid_argument("ngrams: order must be >= 1, got " + std::to_string(n));
    NGramHistogram hist;
    hist.n = n;
    const auto& toks = seq.tokens;
    if (toks.size() < static_cast<std::size_t>(n)) return hist;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
        NGram gram(toks.begin() + i, toks.begin() + i + n);
        ++hist.counts[gram];
    }
    return hist;
}

std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> sentences;
    std::string current;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        current += c;
        if (c == '.' || c == '!' || c == '?') {
            std::size_t j = i + 1;
            bool boundary = j >= text.size();
            if (!boundary) {
                std::size_t peek = j;
                boundary = is_space_cp(next_cp(text, peek));
            }
            if (boundary) {
                std::string trimmed = trim(current);
                if (!trimmed.empty()) sentences.push_back(std::move(trimmed));
                current.clear();
            }
        }
        ++i;
    }
    std::string trimmed = trim(current);
    if (!trimmed.empty()) sentences.push_back(std::move(trimmed));
    return sentences;
}

std::string normalize_whitespace(const std::string& text) {
    return tokenize(text, Casing::Preserve).join();
}

}  // namespace rewritekit
