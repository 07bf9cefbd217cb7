#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <cmath>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "rewritekit/errors.hpp"
#include "rewritekit/modelio.hpp"
#include "test_support.hpp"

using namespace rewritekit;
using nlohmann::json;
using testsupport::near;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected a rewritekit error");
    return ErrorKind::Io;
}

// Backend that fails on demand; used for propagation tests.
class FlakyBackend final : public TextBackend {
protected:
    std::vector<CandidateResponse> generate_impl(const std::string& prompt,
                                                 const GenerationParams& params) override {
        if (prompt.find("boom") != std::string::npos) {
            throw errors::backend_unavailable("scripted outage");
        }
        std::vector<CandidateResponse> out(params.num_samples);
        for (auto& cand : out) cand.text = "echo: " + prompt;
        return out;
    }
    double score_impl(const std::string&, const std::string&) override { return -1.0; }
};

// Backend that ignores num_samples; the base class must flag it.
class MiscountingBackend final : public TextBackend {
protected:
    std::vector<CandidateResponse> generate_impl(const std::string&,
                                                 const GenerationParams&) override {
        return {CandidateResponse{"only one", {}, 0.0, {}}};
    }
    double score_impl(const std::string&, const std::string&) override { return -1.0; }
};

// Serves scripted JSON routes on an ephemeral port for client tests.
struct LocalServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port); }

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~LocalServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }
};

HttpBackendConfig quick_config(const std::string& endpoint) {
    HttpBackendConfig config;
    config.endpoint = endpoint;
    config.max_attempts = 2;
    config.backoff_ms = 1;
    config.timeout_sec = 5;
    return config;
}

}  // namespace

TEST_CASE("generation params validation") {
    GenerationParams params;
    CHECK_NOTHROW(params.validate());
    params.temperature = -0.1;
    CHECK(kind_of([&] { params.validate(); }) == ErrorKind::InvalidArgument);
    params = GenerationParams{};
    params.num_samples = 0;
    CHECK_THROWS_AS(params.validate(), Error);
    params = GenerationParams{};
    params.max_tokens = 0;
    CHECK_THROWS_AS(params.validate(), Error);
    params = GenerationParams{};
    params.temperature = 0.0;  // greedy decoding is legal
    CHECK_NOTHROW(params.validate());
}

TEST_CASE("lm_score_of is the mean token log-probability") {
    CHECK(lm_score_of({}) == 0.0);
    CHECK(lm_score_of({-1.0, -2.0}) == -1.5);
    CHECK(lm_score_of({-0.5}) == -0.5);
    // Repeating the same distribution leaves the mean unchanged.
    CHECK(lm_score_of({-1.0, -2.0, -1.0, -2.0}) == lm_score_of({-1.0, -2.0}));
}

TEST_CASE("suffix config validation") {
    SuffixConfig config;
    CHECK_NOTHROW(config.validate());
    config.delimiter = "";
    CHECK_THROWS_AS(config.validate(), Error);
    config = SuffixConfig{};
    config.good_label = "";
    CHECK_THROWS_AS(config.validate(), Error);
    config = SuffixConfig{};
    config.bad_label = config.good_label;
    CHECK_THROWS_AS(config.validate(), Error);
}

TEST_CASE("backend wrapper validates calls") {
    MockBackend mock;
    GenerationParams params;
    CHECK(kind_of([&] { mock.generate("", params); }) == ErrorKind::InvalidArgument);
    params.num_samples = 0;
    CHECK(kind_of([&] { mock.generate("hi", params); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([&] { mock.score_continuation("prefix", ""); }) ==
          ErrorKind::InvalidArgument);

    MiscountingBackend bad;
    CHECK(kind_of([&] { bad.generate("hi", GenerationParams{}); }) == ErrorKind::Protocol);
}

TEST_CASE("mock generation is deterministic across instances") {
    MockBackend first;
    MockBackend second;
    GenerationParams params;
    params.num_samples = 4;

    auto a = first.generate("draft a note about the offsite", params);
    auto b = second.generate("draft a note about the offsite", params);
    REQUIRE(a.size() == 4);
    REQUIRE(b.size() == 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].text == b[i].text);
        CHECK(a[i].token_logprobs == b[i].token_logprobs);
        CHECK(a[i].lm_score == b[i].lm_score);
        CHECK_FALSE(a[i].text.empty());
        CHECK(a[i].lm_score == lm_score_of(a[i].token_logprobs));
        CHECK(a[i].lm_score < 0.0);
    }
    // Samples within one call differ from each other.
    CHECK(a[0].text != a[1].text);
    // A different prompt produces different text.
    auto c = first.generate("another prompt entirely", params);
    CHECK(c[0].text != a[0].text);
}

TEST_CASE("mock scoring is deterministic and scriptable") {
    MockBackend plain;
    double first = plain.score_continuation("some prefix", "quality is good");
    CHECK(first == plain.score_continuation("some prefix", "quality is good"));
    CHECK(first < 0.0);
    CHECK(first != plain.score_continuation("some prefix", "quality is bad"));

    MockBackend scripted = MockBackend::from_script_text(R"({
        "score": [
            {"prefix_contains": "alpha", "continuation": "quality is good", "logprob": -0.25},
            {"continuation": "quality is bad", "token_logprobs": [-0.2, -0.3]}
        ]
    })");
    CHECK(scripted.score_continuation("prefix alpha tail", "quality is good") == -0.25);
    // token_logprobs entries sum.
    CHECK(near(scripted.score_continuation("anything", "quality is bad"), -0.5, 1e-15));
    // No matching entry: deterministic fallback.
    double fallback = scripted.score_continuation("other", "quality is good");
    CHECK(fallback == scripted.score_continuation("other", "quality is good"));
}

TEST_CASE("scripted candidates cycle to honor num_samples") {
    MockBackend mock = MockBackend::from_script_text(R"({
        "generate": [{
            "prompt_contains": "pick",
            "candidates": ["first reply", {"text": "second reply", "token_logprobs": [-1.0, -3.0]}]
        }]
    })");
    GenerationParams params;
    params.num_samples = 5;
    auto out = mock.generate("please pick one", params);
    REQUIRE(out.size() == 5);
    CHECK(out[0].text == "first reply");
    CHECK(out[1].text == "second reply");
    CHECK(out[2].text == "first reply");
    CHECK(out[4].text == "first reply");
    CHECK(out[1].lm_score == -2.0);
    // Scripted text without explicit logprobs still gets deterministic ones.
    CHECK(out[0].token_logprobs.size() == 2);
    CHECK(out[0].token_logprobs == out[2].token_logprobs);

    CHECK(mock.has_script_for("please pick one"));
    CHECK_FALSE(mock.has_script_for("unrelated"));

    // logprobs=false suppresses token scores entirely.
    params.logprobs = false;
    auto bare = mock.generate("please pick one", params);
    CHECK(bare[0].token_logprobs.empty());
    CHECK(bare[0].lm_score == 0.0);
}

TEST_CASE("mock script errors are config errors") {
    CHECK(kind_of([] { MockBackend::from_script_text("not json"); }) == ErrorKind::Config);
    CHECK(kind_of([] { MockBackend::from_script_text("[1,2]"); }) == ErrorKind::Config);
    CHECK(kind_of([] {
              MockBackend::from_script_text(R"({"generate": [{"prompt_contains": "x", "candidates": []}]})");
          }) == ErrorKind::Config);
    CHECK(kind_of([] { MockBackend::from_file("/nonexistent/script.json"); }) ==
          ErrorKind::Io);
}

TEST_CASE("suffix_score normalizes the two label probabilities") {
    MockBackend mock = MockBackend::from_script_text(R"({
        "score": [
            {"prefix_contains": "sure thing", "continuation": "quality is good", "logprob": -0.10536051565782628},
            {"prefix_contains": "sure thing", "continuation": "quality is bad", "logprob": -2.3025850929940455},
            {"prefix_contains": "coin flip", "continuation": "quality is good", "logprob": -1.0},
            {"prefix_contains": "coin flip", "continuation": "quality is bad", "logprob": -1.0},
            {"prefix_contains": "two nats", "continuation": "quality is good", "logprob": -1.0},
            {"prefix_contains": "two nats", "continuation": "quality is bad", "logprob": -3.0}
        ]
    })");

    // P(good) = 0.9, P(bad) = 0.1 -> 0.9 exactly (up to fp).
    SuffixScore s = suffix_score(mock, "prompt", "sure thing");
    CHECK(near(s.value, 0.9, 1e-12));
    CHECK_FALSE(s.degenerate);

    // Equal log-probabilities are a coin flip.
    CHECK(suffix_score(mock, "prompt", "coin flip").value == 0.5);

    // A two-nat gap is the logistic value at 2.
    CHECK(near(suffix_score(mock, "prompt", "two nats").value, 0.8807970779778823, 1e-12));
}

TEST_CASE("suffix_score label swap mirrors the value") {
    MockBackend mock = MockBackend::from_script_text(R"({
        "score": [
            {"continuation": "quality is good", "logprob": -0.4},
            {"continuation": "quality is bad", "logprob": -1.7}
        ]
    })");
    double v = suffix_score(mock, "p", "r").value;

    SuffixConfig swapped;
    swapped.good_label = "quality is bad";
    swapped.bad_label = "quality is good";
    double w = suffix_score(mock, "p", "r", swapped).value;
    CHECK(near(v + w, 1.0, 1e-12));
}

TEST_CASE("suffix_score flags fully underflowed labels") {
    MockBackend mock = MockBackend::from_script_text(R"({
        "score": [
            {"continuation": "quality is good", "logprob": -800.0},
            {"continuation": "quality is bad", "logprob": -800.0}
        ]
    })");
    SuffixScore s = suffix_score(mock, "p", "r");
    CHECK(s.degenerate);
    CHECK(s.value == 0.5);
}

TEST_CASE("suffix_score stays finite under huge log gaps") {
    MockBackend mock = MockBackend::from_script_text(R"({
        "score": [
            {"prefix_contains": "sure", "continuation": "quality is good", "logprob": -2.0},
            {"prefix_contains": "sure", "continuation": "quality is bad", "logprob": -1000.0},
            {"prefix_contains": "never", "continuation": "quality is good", "logprob": -1000.0},
            {"prefix_contains": "never", "continuation": "quality is bad", "logprob": -2.0}
        ]
    })");
    double hi = suffix_score(mock, "p", "sure").value;
    double lo = suffix_score(mock, "p", "never").value;
    CHECK(std::isfinite(hi));
    CHECK(std::isfinite(lo));
    CHECK(hi > 1.0 - 1e-12);
    CHECK(lo < 1e-12);
}

TEST_CASE("suffix_score raw mode returns the clamped good probability") {
    MockBackend mock = MockBackend::from_script_text(R"({
        "score": [
            {"prefix_contains": "third", "continuation": "quality is good", "logprob": -1.2039728043259361},
            {"prefix_contains": "third", "continuation": "quality is bad", "logprob": -0.1},
            {"prefix_contains": "loud", "continuation": "quality is good", "logprob": 0.5},
            {"prefix_contains": "loud", "continuation": "quality is bad", "logprob": -0.1}
        ]
    })");
    SuffixConfig raw;
    raw.normalized = false;
    CHECK(near(suffix_score(mock, "p", "third", raw).value, 0.3, 1e-12));
    CHECK(suffix_score(mock, "p", "loud", raw).value == 1.0);
}

TEST_CASE("suffix_score rejects an empty response") {
    MockBackend mock;
    CHECK(kind_of([&] { suffix_score(mock, "p", ""); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("generate_batch preserves prompt order") {
    MockBackend mock;
    GenerationParams params;
    params.num_samples = 2;
    std::vector<std::string> prompts;
    for (int i = 0; i < 9; ++i) prompts.push_back("prompt number " + std::to_string(i));

    auto parallel = generate_batch(mock, prompts, params, 4);
    REQUIRE(parallel.size() == prompts.size());
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        auto direct = mock.generate(prompts[i], params);
        REQUIRE(parallel[i].size() == direct.size());
        for (std::size_t j = 0; j < direct.size(); ++j) {
            CHECK(parallel[i][j].text == direct[j].text);
        }
    }
}

TEST_CASE("generate_batch propagates worker failures") {
    FlakyBackend flaky;
    GenerationParams params;
    params.num_samples = 1;
    std::vector<std::string> prompts = {"fine", "boom now", "also fine"};
    CHECK(kind_of([&] { generate_batch(flaky, prompts, params, 3); }) ==
          ErrorKind::BackendUnavailable);
}

TEST_CASE("http backend round-trips generate and score") {
    LocalServer local;
    std::atomic<int> generate_hits{0};
    std::string seen_auth;
    json seen_body;

    local.server.Post("/generate", [&](const httplib::Request& req, httplib::Response& res) {
        ++generate_hits;
        seen_auth = req.get_header_value("Authorization");
        seen_body = json::parse(req.body);
        int n = seen_body["num_samples"].get<int>();
        json candidates = json::array();
        for (int i = 0; i < n; ++i) {
            candidates.push_back({{"text", "candidate " + std::to_string(i)},
                                  {"token_logprobs", {-0.5, -1.5}}});
        }
        res.set_content(json{{"candidates", candidates}}.dump(), "application/json");
    });
    local.server.Post("/score", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(json{{"logprob", -1.25}}.dump(), "application/json");
    });
    local.start();

    HttpBackendConfig config = quick_config(local.endpoint());
    config.auth_token = "sekrit";
    HttpBackend backend(config);

    GenerationParams params;
    params.num_samples = 3;
    params.temperature = 0.25;
    auto out = backend.generate("hello server", params);
    REQUIRE(out.size() == 3);
    CHECK(out[0].text == "candidate 0");
    CHECK(out[2].text == "candidate 2");
    CHECK(out[1].lm_score == -1.0);
    CHECK(generate_hits == 1);
    CHECK(seen_auth == "Bearer sekrit");
    CHECK(seen_body["prompt"] == "hello server");
    CHECK(seen_body["temperature"] == 0.25);
    CHECK(seen_body["max_tokens"] == 256);

    CHECK(backend.score_continuation("prefix", "quality is good") == -1.25);
}

TEST_CASE("http backend flags a wrong candidate count as a protocol error") {
    LocalServer local;
    local.server.Post("/generate", [&](const httplib::Request&, httplib::Response& res) {
        json reply = {{"candidates", json::array({json{{"text", "only one"}}})}};
        res.set_content(reply.dump(), "application/json");
    });
    local.start();

    HttpBackend backend(quick_config(local.endpoint()));
    GenerationParams params;
    params.num_samples = 2;
    CHECK(kind_of([&] { backend.generate("hi", params); }) == ErrorKind::Protocol);
}

TEST_CASE("http backend treats malformed replies as protocol errors") {
    LocalServer local;
    local.server.Post("/generate", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content("this is not json", "text/plain");
    });
    local.server.Post("/score", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(json{{"wrong_field", 1}}.dump(), "application/json");
    });
    local.start();

    HttpBackend backend(quick_config(local.endpoint()));
    CHECK(kind_of([&] { backend.generate("hi", GenerationParams{}); }) ==
          ErrorKind::Protocol);
    CHECK(kind_of([&] { backend.score_continuation("p", "c"); }) == ErrorKind::Protocol);
}

TEST_CASE("http backend does not retry well-formed refusals") {
    LocalServer local;
    std::atomic<int> hits{0};
    local.server.Post("/generate", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 503;
        res.set_content("overloaded", "text/plain");
    });
    local.start();

    HttpBackendConfig config = quick_config(local.endpoint());
    config.max_attempts = 3;
    HttpBackend backend(config);
    CHECK(kind_of([&] { backend.generate("hi", GenerationParams{}); }) ==
          ErrorKind::BackendUnavailable);
    CHECK(hits == 1);
}

TEST_CASE("http backend retries transport failures then reports unavailable") {
    // Port 1 on loopback is never listening; connections are refused.
    HttpBackendConfig config = quick_config("http://127.0.0.1:1");
    HttpBackend backend(config);
    try {
        backend.generate("hi", GenerationParams{});
        FAIL("expected backend-unavailable");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BackendUnavailable);
        CHECK(std::string(e.what()).find("2 attempts") != std::string::npos);
    }
}

TEST_CASE("http backend requires an endpoint") {
    CHECK(kind_of([] { HttpBackend backend{HttpBackendConfig{}}; }) == ErrorKind::Config);
}

TEST_CASE("remote nli scorer validates replies") {
    LocalServer local;
    std::atomic<int> mode{0};
    local.server.Post("/nli", [&](const httplib::Request& req, httplib::Response& res) {
        json body = json::parse(req.body);
        CHECK(body.contains("premise"));
        CHECK(body.contains("hypothesis"));
        switch (mode.load()) {
            case 0: res.set_content(json{{"score", 0.73}}.dump(), "application/json"); break;
            case 1: res.set_content(json{{"score", 1.5}}.dump(), "application/json"); break;
            default: res.set_content(json{{"other", 1}}.dump(), "application/json"); break;
        }
    });
    local.start();

    RemoteNliScorer scorer(quick_config(local.endpoint()));
    CHECK(scorer.score("premise", "hypothesis") == 0.73);

    mode = 1;
    CHECK(kind_of([&] { scorer.score("p", "h"); }) == ErrorKind::ScorerUnavailable);
    mode = 2;
    CHECK(kind_of([&] { scorer.score("p", "h"); }) == ErrorKind::ScorerUnavailable);
}

TEST_CASE("remote nli scorer surfaces transport failures as scorer errors") {
    RemoteNliScorer scorer(quick_config("http://127.0.0.1:1"));
    CHECK(kind_of([&] { scorer.score("p", "h"); }) == ErrorKind::ScorerUnavailable);
}
