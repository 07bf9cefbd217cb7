#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rewritekit/reward.hpp"

namespace rewritekit {

struct GenerationParams {
    double temperature = 0.5;
    int num_samples = 8;
    int max_tokens = 256;
    bool logprobs = true;

    /// Throws invalid-argument unless temperature >= 0, num_samples >= 1,
    /// max_tokens >= 1.
    void validate() const;
};

struct CandidateResponse {
    std::string text;
    std::vector<double> token_logprobs;
    double lm_score = 0.0;          // mean token log-probability
    std::optional<double> suffix_score;  // in [0,1] when present
};

/// Mean token log-probability; 0.0 when no tokens were returned. The mean
/// (not the sum) keeps the score comparable across candidate lengths.
double lm_score_of(const std::vector<double>& token_logprobs);

struct SuffixConfig {
    std::string delimiter = "\n---\n";
    std::string good_label = "quality is good";
    std::string bad_label = "quality is bad";
    /// Normalized mode returns g/(g+b); raw mode returns g alone
    /// (clamped to [0,1]).
    bool normalized = true;

    /// Throws invalid-argument unless labels are non-empty and distinct
    /// and the delimiter is non-empty.
    void validate() const;
};

/// Text generation + forced-decoding scorer. The public methods validate
/// arguments once; implementations only see well-formed calls.
class TextBackend {
public:
    virtual ~TextBackend() = default;

    /// Returns exactly params.num_samples candidates.
    std::vector<CandidateResponse> generate(const std::string& prompt,
                                            const GenerationParams& params);

    /// Total natural-log probability of `continuation` given `prefix`.
    double score_continuation(const std::string& prefix, const std::string& continuation);

protected:
    virtual std::vector<CandidateResponse> generate_impl(const std::string& prompt,
                                                         const GenerationParams& params) = 0;
    virtual double score_impl(const std::string& prefix, const std::string& continuation) = 0;
};

struct SuffixScore {
    double value = 0.5;
    /// Set when both label probabilities underflowed to zero; the value is
    /// then the uninformative 0.5.
    bool degenerate = false;
};

/// Confidence that `response` answers `prompt` well: the two label
/// continuations are force-decoded after prompt + "\n" + response +
/// delimiter, and the good-label probability is normalized against the pair.
SuffixScore suffix_score(TextBackend& backend, const std::string& prompt,
                         const std::string& response, const SuffixConfig& config = {});

/// Deterministic offline backend. Behaviour is scripted from JSON; prompts
/// without a script entry get synthesized candidates seeded by the prompt
/// text itself, so identical inputs give identical outputs across processes.
///
/// Script shape:
///   {"generate": [{"prompt_contains": "...",
///                  "candidates": ["text", {"text": "...", "token_logprobs": [...]}]}],
///    "score":    [{"prefix_contains": "...", "continuation": "...",
///                  "logprob": -0.5}]}
/// score entries may give "token_logprobs" instead of "logprob"; they sum.
class MockBackend final : public TextBackend {
public:
    MockBackend() = default;

    static MockBackend from_script_text(const std::string& json_text);
    static MockBackend from_file(const std::string& path);

    /// True when a scripted generate entry matches this prompt.
    bool has_script_for(const std::string& prompt) const;

protected:
    std::vector<CandidateResponse> generate_impl(const std::string& prompt,
                                                 const GenerationParams& params) override;
    double score_impl(const std::string& prefix, const std::string& continuation) override;

private:
    struct ScriptCandidate {
        std::string text;
        std::vector<double> token_logprobs;
        bool has_logprobs = false;
    };
    struct GenerateEntry {
        std::string prompt_contains;
        std::vector<ScriptCandidate> candidates;
    };
    struct ScoreEntry {
        std::string prefix_contains;  // empty matches every prefix
        std::string continuation;
        double logprob = 0.0;
    };

    std::vector<GenerateEntry> generate_entries_;
    std::vector<ScoreEntry> score_entries_;
};

struct HttpBackendConfig {
    std::string endpoint;     // scheme://host:port
    std::string auth_token;   // sent as a Bearer token when non-empty
    int max_in_flight = 4;
    int max_attempts = 3;     // transport-level retries
    int backoff_ms = 250;     // doubles per retry
    int timeout_sec = 30;
};

/// JSON-over-HTTP client: POST /generate and POST /score. Transport
/// failures are retried with exponential backoff and end in a
/// backend-unavailable error; well-formed refusals (non-2xx) are not
/// retried; malformed replies raise protocol errors.
class HttpBackend final : public TextBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    ~HttpBackend() override;

    HttpBackend(HttpBackend&&) noexcept;
    HttpBackend& operator=(HttpBackend&&) noexcept;

protected:
    std::vector<CandidateResponse> generate_impl(const std::string& prompt,
                                                 const GenerationParams& params) override;
    double score_impl(const std::string& prefix, const std::string& continuation) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Entailment scores from a remote service: POST /nli, body
/// {"premise", "hypothesis"} -> {"score"}. Any failure surfaces as a
/// scorer-unavailable error; scores are never silently defaulted.
class RemoteNliScorer final : public NliScorer {
public:
    explicit RemoteNliScorer(HttpBackendConfig config);
    ~RemoteNliScorer() override;

    RemoteNliScorer(RemoteNliScorer&&) noexcept;
    RemoteNliScorer& operator=(RemoteNliScorer&&) noexcept;

    double score(const std::string& premise, const std::string& hypothesis) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Per-prompt generation over a batch; output order matches input order
/// regardless of internal completion order.
std::vector<std::vector<CandidateResponse>> generate_batch(
    TextBackend& backend, const std::vector<std::string>& prompts,
    const GenerationParams& params, int max_workers = 4);

}  // namespace rewritekit
