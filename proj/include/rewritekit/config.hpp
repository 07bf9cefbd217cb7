#pragma once

#include <map>
#include <string>

#include "rewritekit/cascade.hpp"
#include "rewritekit/metrics.hpp"
#include "rewritekit/modelio.hpp"
#include "rewritekit/reward.hpp"

namespace rewritekit {

/// Process-wide configuration. Built-in defaults encode the published
/// hyperparameters (temperature 0.5, 8 samples, the per-task weight table);
/// a key=value file, REWRITE_* environment variables, and command-line
/// flags override them in that order.
struct AppConfig {
    std::string endpoint;      // primary / on-device backend
    std::string auth_token;
    std::string server_endpoint;  // cascade fallback arm
    std::string server_auth_token;
    std::string nli_endpoint;  // remote entailment scorer
    int max_in_flight = 4;
    int judges = 3;  // self-consistency votes

    GenerationParams gen;
    NGramPenaltyConfig penalty;
    SuffixConfig suffix;
    CascadeConfig cascade;
    std::map<RewriteTask, RewardWeights> weights;  // defaults: the task table
};

AppConfig default_config();

/// Recognized config keys, shared by the file parser and flag overrides:
///   endpoint, auth_token, server_endpoint, server_auth_token, nli_endpoint,
///   max_in_flight, judges, temperature, num_samples, max_tokens, gamma,
///   suffix.delimiter, suffix.good_label, suffix.bad_label, suffix.raw,
///   penalty.c, penalty.thresholds (e.g. "1:8,2:5,3:4,4:3"),
///   weights.<task>.<nli|rnli|length|edit|ngram>.
/// String values accept \n, \t and \\ escapes. Unknown keys and
/// out-of-bounds values raise config errors naming the key.
void apply_config_value(AppConfig& config, const std::string& key,
                        const std::string& value);

/// Precedence: `flags` > `env` > file at `path` (empty path = no file) >
/// defaults. `env` is keyed by variable name (REWRITE_ENDPOINT,
/// REWRITE_AUTH_TOKEN, REWRITE_SERVER_ENDPOINT, REWRITE_SERVER_AUTH_TOKEN,
/// REWRITE_NLI_ENDPOINT); `flags` by config key.
AppConfig load_config(const std::string& path,
                      const std::map<std::string, std::string>& env,
                      const std::map<std::string, std::string>& flags);

/// load_config with the live process environment.
AppConfig load_config_from_process_env(const std::string& path,
                                       const std::map<std::string, std::string>& flags);

}  // namespace rewritekit
