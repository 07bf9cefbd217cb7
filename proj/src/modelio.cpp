// Generation/scoring backends: deterministic mock, HTTP client, suffix
// confidence score.

#include "rewritekit/modelio.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <semaphore>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "rewritekit/errors.hpp"

namespace rewritekit {

namespace {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Uniform double in [0,1) from the engine's raw output; std::uniform_real_
// distribution is not pinned across standard libraries, this is.
double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

constexpr const char* kMockWords[] = {
    "the",  "a",     "to",    "and",   "of",  "in",   "for",  "on",
    "we",   "you",   "this",  "that",  "it",  "is",   "was",  "be",
    "note", "plan",  "draft", "text",  "call", "time", "team", "day",
    "send", "meet",  "share", "check", "move", "work", "new",  "good",
};

std::vector<double> synth_logprobs(std::mt19937_64& rng, int count) {
    std::vector<double> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(-(0.1 + 1.9 * u01(rng)));
    return out;
}

int whitespace_token_count(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    int n = 0;
    while (in >> tok) ++n;
    return n;
}

}  // namespace

void GenerationParams::validate() const {
    if (!(temperature >= 0.0)) {
        throw errors::invalid_argument("temperature must be >= 0");
    }
    if (num_samples < 1) {
        throw errors::invalid_argument("num_samples must be >= 1");
    }
    if (max_tokens < 1) {
        throw errors::invalid_argument("max_tokens must be >= 1");
    }
}

void SuffixConfig::validate() const {
    if (delimiter.empty()) {
        throw errors::invalid_argument("suffix delimiter must be non-empty");
    }
    if (good_label.empty() || bad_label.empty()) {
        throw errors::invalid_argument("suffix labels must be non-empty");
    }
    if (good_label == bad_label) {
        throw errors::invalid_argument("suffix labels must be distinct");
    }
}

double lm_score_of(const std::vector<double>& token_logprobs) {
    if (token_logprobs.empty()) return 0.0;
    double sum = 0.0;
    for (double lp : token_logprobs) sum += lp;
    return sum / static_cast<double>(token_logprobs.size());
}

std::vector<CandidateResponse> TextBackend::generate(const std::string& prompt,
                                                     const GenerationParams& params) {
    if (prompt.empty()) {
        throw errors::invalid_argument("generate needs a non-empty prompt");
    }
    params.validate();
    std::vector<CandidateResponse> out = generate_impl(prompt, params);
    if (out.size() != static_cast<std::size_t>(params.num_samples)) {
        throw errors::protocol("backend returned " + std::to_string(out.size()) +
                               " candidates, expected " + std::to_string(params.num_samples));
    }
    for (auto& cand : out) cand.lm_score = lm_score_of(cand.token_logprobs);
    return out;
}

double TextBackend::score_continuation(const std::string& prefix,
                                       const std::string& continuation) {
    if (continuation.empty()) {
        throw errors::invalid_argument("score_continuation needs a non-empty continuation");
    }
    return score_impl(prefix, continuation);
}

SuffixScore suffix_score(TextBackend& backend, const std::string& prompt,
                         const std::string& response, const SuffixConfig& config) {
    config.validate();
    if (response.empty()) {
        throw errors::invalid_argument("suffix_score needs a non-empty response");
    }
    const std::string prefix = prompt + "\n" + response + config.delimiter;
    const double log_good = backend.score_continuation(prefix, config.good_label);
    const double log_bad = backend.score_continuation(prefix, config.bad_label);
    const double g = std::exp(log_good);
    const double b = std::exp(log_bad);

    SuffixScore out;
    if (g == 0.0 && b == 0.0) {
        out.value = 0.5;
        out.degenerate = true;
        return out;
    }
    if (config.normalized) {
        // g/(g+b), computed in log space so a huge gap cannot overflow.
        out.value = 1.0 / (1.0 + std::exp(log_bad - log_good));
    } else {
        out.value = std::min(1.0, g);
    }
    return out;
}

// ---------------------------------------------------------------------------
// MockBackend

MockBackend MockBackend::from_script_text(const std::string& json_text) {
    json script;
    try {
        script = json::parse(json_text);
    } catch (const json::exception& e) {
        throw errors::config(std::string("mock script is not valid JSON: ") + e.what());
    }
    if (!script.is_object()) {
        throw errors::config("mock script must be a JSON object");
    }

    MockBackend mock;
    try {
        for (const auto& entry : script.value("generate", json::array())) {
            GenerateEntry ge;
            ge.prompt_contains = entry.value("prompt_contains", std::string());
            for (const auto& cand : entry.at("candidates")) {
                ScriptCandidate sc;
                if (cand.is_string()) {
                    sc.text = cand.get<std::string>();
                } else {
                    sc.text = cand.at("text").get<std::string>();
                    if (cand.contains("token_logprobs")) {
                        sc.token_logprobs =
                            cand.at("token_logprobs").get<std::vector<double>>();
                        sc.has_logprobs = true;
                    }
                }
                ge.candidates.push_back(std::move(sc));
            }
            if (ge.candidates.empty()) {
                throw errors::config("mock generate entry has no candidates");
            }
            mock.generate_entries_.push_back(std::move(ge));
        }
        for (const auto& entry : script.value("score", json::array())) {
            ScoreEntry se;
            se.prefix_contains = entry.value("prefix_contains", std::string());
            se.continuation = entry.at("continuation").get<std::string>();
            if (entry.contains("token_logprobs")) {
                double sum = 0.0;
                for (double lp : entry.at("token_logprobs").get<std::vector<double>>()) {
                    sum += lp;
                }
                se.logprob = sum;
            } else {
                se.logprob = entry.at("logprob").get<double>();
            }
            mock.score_entries_.push_back(std::move(se));
        }
    } catch (const json::exception& e) {
        throw errors::config(std::string("mock script malformed: ") + e.what());
    }
    return mock;
}

MockBackend MockBackend::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw errors::io("cannot read mock script: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_script_text(buf.str());
}

bool MockBackend::has_script_for(const std::string& prompt) const {
    for (const auto& entry : generate_entries_) {
        if (entry.prompt_contains.empty() ||
            prompt.find(entry.prompt_contains) != std::string::npos) {
            return true;
        }
    }
    return false;
}

std::vector<CandidateResponse> MockBackend::generate_impl(const std::string& prompt,
                                                          const GenerationParams& params) {
    std::vector<CandidateResponse> out;
    out.reserve(params.num_samples);

    for (const auto& entry : generate_entries_) {
        if (!entry.prompt_contains.empty() &&
            prompt.find(entry.prompt_contains) == std::string::npos) {
            continue;
        }
        for (int i = 0; i < params.num_samples; ++i) {
            // Shorter scripts wrap around so the candidate count always
            // matches the request.
            const ScriptCandidate& sc = entry.candidates[i % entry.candidates.size()];
            CandidateResponse cand;
            cand.text = sc.text;
            if (params.logprobs) {
                if (sc.has_logprobs) {
                    cand.token_logprobs = sc.token_logprobs;
                } else {
                    std::mt19937_64 rng(fnv1a64(sc.text) ^ 0x9E3779B97F4A7C15ull);
                    int count = std::max(1, whitespace_token_count(sc.text));
                    cand.token_logprobs = synth_logprobs(rng, count);
                }
            }
            out.push_back(std::move(cand));
        }
        return out;
    }

    // No script entry: synthesize candidates seeded by the prompt content.
    for (int i = 0; i < params.num_samples; ++i) {
        std::mt19937_64 rng(fnv1a64(prompt) + 0x9E3779B97F4A7C15ull *
                                                   static_cast<std::uint64_t>(i + 1));
        int n_words = 3 + static_cast<int>(u01(rng) * 6.0);
        std::string text;
        for (int w = 0; w < n_words; ++w) {
            if (!text.empty()) text += ' ';
            text += kMockWords[rng() % 32];
        }
        CandidateResponse cand;
        cand.text = std::move(text);
        if (params.logprobs) cand.token_logprobs = synth_logprobs(rng, n_words);
        out.push_back(std::move(cand));
    }
    return out;
}

double MockBackend::score_impl(const std::string& prefix, const std::string& continuation) {
    for (const auto& entry : score_entries_) {
        if (entry.continuation != continuation) continue;
        if (!entry.prefix_contains.empty() &&
            prefix.find(entry.prefix_contains) == std::string::npos) {
            continue;
        }
        return entry.logprob;
    }
    std::mt19937_64 rng(fnv1a64(prefix + '\x1f' + continuation));
    return -(0.2 + 3.0 * u01(rng));
}

// ---------------------------------------------------------------------------
// HTTP plumbing shared by the generation backend and the NLI client.

namespace {

// Bounds in-flight requests and centralizes the retry policy.
struct HttpCore {
    HttpBackendConfig config;
    std::counting_semaphore<1024> in_flight;

    explicit HttpCore(HttpBackendConfig cfg)
        : config(std::move(cfg)),
          in_flight(std::clamp(config.max_in_flight, 1, 1024)) {
        if (config.endpoint.empty()) {
            throw errors::config("backend endpoint is not configured");
        }
        if (config.max_attempts < 1) {
            throw errors::config("backend max_attempts must be >= 1");
        }
    }

    // POST `body` to `path`; retries transport failures only.
    json post(const std::string& path, const json& body) {
        in_flight.acquire();
        struct Release {
            std::counting_semaphore<1024>& sem;
            ~Release() { sem.release(); }
        } release{in_flight};

        std::string last_error;
        for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(
                    config.backoff_ms * (1 << (attempt - 1))));
            }
            httplib::Client client(config.endpoint);
            client.set_connection_timeout(config.timeout_sec);
            client.set_read_timeout(config.timeout_sec);
            httplib::Headers headers;
            if (!config.auth_token.empty()) {
                headers.emplace("Authorization", "Bearer " + config.auth_token);
            }
            auto res = client.Post(path, headers, body.dump(), "application/json");
            if (!res) {
                last_error = httplib::to_string(res.error());
                continue;  // transport failure: retry
            }
            if (res->status != 200) {
                // A well-formed refusal; retrying would not help.
                throw errors::backend_unavailable("endpoint " + config.endpoint + path +
                                                  " replied HTTP " +
                                                  std::to_string(res->status));
            }
            try {
                return json::parse(res->body);
            } catch (const json::exception& e) {
                throw errors::protocol(std::string("backend reply is not valid JSON: ") +
                                       e.what());
            }
        }
        throw errors::backend_unavailable("endpoint " + config.endpoint + path +
                                          " unreachable after " +
                                          std::to_string(config.max_attempts) +
                                          " attempts: " + last_error);
    }
};

}  // namespace

struct HttpBackend::Impl {
    HttpCore core;
    explicit Impl(HttpBackendConfig cfg) : core(std::move(cfg)) {}
};

HttpBackend::HttpBackend(HttpBackendConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}
HttpBackend::~HttpBackend() = default;
HttpBackend::HttpBackend(HttpBackend&&) noexcept = default;
HttpBackend& HttpBackend::operator=(HttpBackend&&) noexcept = default;

std::vector<CandidateResponse> HttpBackend::generate_impl(const std::string& prompt,
                                                          const GenerationParams& params) {
    json body = {
        {"prompt", prompt},
        {"num_samples", params.num_samples},
        {"temperature", params.temperature},
        {"max_tokens", params.max_tokens},
        {"logprobs", params.logprobs},
    };
    json reply = impl_->core.post("/generate", body);
    std::vector<CandidateResponse> out;
    try {
        for (const auto& cand : reply.at("candidates")) {
            CandidateResponse cr;
            cr.text = cand.at("text").get<std::string>();
            if (cand.contains("token_logprobs")) {
                cr.token_logprobs = cand.at("token_logprobs").get<std::vector<double>>();
            }
            out.push_back(std::move(cr));
        }
    } catch (const json::exception& e) {
        throw errors::protocol(std::string("generate reply malformed: ") + e.what());
    }
    return out;
}

double HttpBackend::score_impl(const std::string& prefix, const std::string& continuation) {
    json body = {{"prefix", prefix}, {"continuation", continuation}};
    json reply = impl_->core.post("/score", body);
    if (!reply.contains("logprob") || !reply["logprob"].is_number()) {
        throw errors::protocol("score reply missing numeric logprob");
    }
    return reply["logprob"].get<double>();
}

struct RemoteNliScorer::Impl {
    HttpCore core;
    explicit Impl(HttpBackendConfig cfg) : core(std::move(cfg)) {}
};

RemoteNliScorer::RemoteNliScorer(HttpBackendConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}
RemoteNliScorer::~RemoteNliScorer() = default;
RemoteNliScorer::RemoteNliScorer(RemoteNliScorer&&) noexcept = default;
RemoteNliScorer& RemoteNliScorer::operator=(RemoteNliScorer&&) noexcept = default;

double RemoteNliScorer::score(const std::string& premise, const std::string& hypothesis) {
    json body = {{"premise", premise}, {"hypothesis", hypothesis}};
    json reply;
    try {
        reply = impl_->core.post("/nli", body);
    } catch (const Error& e) {
        // Reward consumers must see scorer failures, never a defaulted 0.
        throw errors::scorer_unavailable(e.what());
    }
    if (!reply.contains("score") || !reply["score"].is_number()) {
        throw errors::scorer_unavailable("nli reply missing numeric score");
    }
    double value = reply["score"].get<double>();
    if (value < 0.0 || value > 1.0) {
        throw errors::scorer_unavailable("nli score out of [0,1]: " + std::to_string(value));
    }
    return value;
}

std::vector<std::vector<CandidateResponse>> generate_batch(
    TextBackend& backend, const std::vector<std::string>& prompts,
    const GenerationParams& params, int max_workers) {
    std::vector<std::vector<CandidateResponse>> out(prompts.size());
    if (prompts.empty()) return out;
    if (max_workers < 1) max_workers = 1;

    std::vector<std::exception_ptr> failures(prompts.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= prompts.size()) return;
            try {
                out[i] = backend.generate(prompts[i], params);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };

    std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(max_workers), prompts.size());
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    for (const auto& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }
    return out;
}

}  // namespace rewritekit
