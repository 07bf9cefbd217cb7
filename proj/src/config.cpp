#include "rewritekit/config.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>

#include "rewritekit/errors.hpp"
#include "rewritekit/textcore.hpp"

namespace rewritekit {

namespace {

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
    throw errors::config("key \"" + key + "\": " + why);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double parsed = std::stod(value, &used);
        if (used != value.size()) bad_key(key, "not a number: " + value);
        return parsed;
    } catch (const std::logic_error&) {
        bad_key(key, "not a number: " + value);
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        int parsed = std::stoi(value, &used);
        if (used != value.size()) bad_key(key, "not an integer: " + value);
        return parsed;
    } catch (const std::logic_error&) {
        bad_key(key, "not an integer: " + value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    bad_key(key, "not a boolean: " + value);
}

std::string unescape(const std::string& value) {
    std::string out;
    out.reserve(value.size());
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (value[i] == '\\' && i + 1 < value.size()) {
            char next = value[++i];
            switch (next) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '\\': out += '\\'; break;
                default:
                    out += '\\';
                    out += next;
            }
        } else {
            out += value[i];
        }
    }
    return out;
}

std::map<int, int> parse_thresholds(const std::string& key, const std::string& value) {
    std::map<int, int> out;
    std::size_t start = 0;
    while (start < value.size()) {
        std::size_t end = value.find(',', start);
        if (end == std::string::npos) end = value.size();
        std::string pair = trim(value.substr(start, end - start));
        std::size_t colon = pair.find(':');
        if (colon == std::string::npos) bad_key(key, "expected n:count pairs");
        int order = parse_int(key, trim(pair.substr(0, colon)));
        int threshold = parse_int(key, trim(pair.substr(colon + 1)));
        if (order < 1) bad_key(key, "n-gram order must be >= 1");
        if (threshold < 2) bad_key(key, "threshold must be >= 2");
        out[order] = threshold;
        start = end + 1;
    }
    if (out.empty()) bad_key(key, "no thresholds given");
    return out;
}

std::optional<std::pair<RewriteTask, int>> parse_weight_key(const std::string& key) {
    // weights.<task>.<term>
    if (key.rfind("weights.", 0) != 0) return std::nullopt;
    std::string rest = key.substr(8);
    std::size_t dot = rest.find('.');
    if (dot == std::string::npos) return std::nullopt;
    RewriteTask task = task_from_name(rest.substr(0, dot));
    std::string term = rest.substr(dot + 1);
    static const std::map<std::string, int> kTerms = {
        {"nli", 0}, {"rnli", 1}, {"length", 2}, {"edit", 3}, {"ngram", 4},
    };
    auto it = kTerms.find(term);
    if (it == kTerms.end()) bad_key(key, "unknown weight term: " + term);
    return std::make_pair(task, it->second);
}

}  // namespace

AppConfig default_config() {
    AppConfig config;
    for (RewriteTask task : kAllTasks) config.weights[task] = default_weights(task);
    return config;
}

void apply_config_value(AppConfig& config, const std::string& key,
                        const std::string& value) {
    if (key == "endpoint") {
        config.endpoint = value;
    } else if (key == "auth_token") {
        config.auth_token = value;
    } else if (key == "server_endpoint") {
        config.server_endpoint = value;
    } else if (key == "server_auth_token") {
        config.server_auth_token = value;
    } else if (key == "nli_endpoint") {
        config.nli_endpoint = value;
    } else if (key == "max_in_flight") {
        int parsed = parse_int(key, value);
        if (parsed < 1) bad_key(key, "must be >= 1");
        config.max_in_flight = parsed;
    } else if (key == "judges") {
        int parsed = parse_int(key, value);
        if (parsed < 1) bad_key(key, "must be >= 1");
        config.judges = parsed;
    } else if (key == "temperature") {
        double parsed = parse_double(key, value);
        if (!(parsed >= 0.0)) bad_key(key, "must be >= 0");
        config.gen.temperature = parsed;
    } else if (key == "num_samples") {
        int parsed = parse_int(key, value);
        if (parsed < 1) bad_key(key, "must be >= 1");
        config.gen.num_samples = parsed;
        config.cascade.num_samples = parsed;
    } else if (key == "max_tokens") {
        int parsed = parse_int(key, value);
        if (parsed < 1) bad_key(key, "must be >= 1");
        config.gen.max_tokens = parsed;
    } else if (key == "gamma") {
        double parsed = parse_double(key, value);
        if (!(parsed >= 0.0 && parsed <= 1.0)) bad_key(key, "must be within [0,1]");
        config.cascade.gamma = parsed;
    } else if (key == "suffix.delimiter") {
        std::string parsed = unescape(value);
        if (parsed.empty()) bad_key(key, "must be non-empty");
        config.suffix.delimiter = parsed;
    } else if (key == "suffix.good_label") {
        std::string parsed = unescape(value);
        if (parsed.empty()) bad_key(key, "must be non-empty");
        config.suffix.good_label = parsed;
    } else if (key == "suffix.bad_label") {
        std::string parsed = unescape(value);
        if (parsed.empty()) bad_key(key, "must be non-empty");
        config.suffix.bad_label = parsed;
    } else if (key == "suffix.raw") {
        config.suffix.normalized = !parse_bool(key, value);
    } else if (key == "penalty.c") {
        double parsed = parse_double(key, value);
        if (!(parsed > 0.0)) bad_key(key, "must be > 0");
        config.penalty.penalty = parsed;
    } else if (key == "penalty.thresholds") {
        config.penalty.thresholds = parse_thresholds(key, value);
    } else if (auto weight = parse_weight_key(key)) {
        double parsed = parse_double(key, value);
        RewardWeights& weights = config.weights[weight->first];
        switch (weight->second) {
            case 0: weights.nli = parsed; break;
            case 1: weights.reverse_nli = parsed; break;
            case 2: weights.length = parsed; break;
            case 3: weights.edit = parsed; break;
            case 4: weights.ngram = parsed; break;
        }
    } else {
        throw errors::config("unknown config key: " + key);
    }
}

AppConfig load_config(const std::string& path,
                      const std::map<std::string, std::string>& env,
                      const std::map<std::string, std::string>& flags) {
    AppConfig config = default_config();

    if (!path.empty()) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw errors::config("cannot read config file: " + path);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::string stripped = trim(line);
            if (stripped.empty() || stripped.front() == '#') continue;
            std::size_t eq = stripped.find('=');
            if (eq == std::string::npos) {
                throw errors::config(path + ":" + std::to_string(line_no) +
                                     ": expected key = value");
            }
            std::string key = trim(stripped.substr(0, eq));
            std::string value = trim(stripped.substr(eq + 1));
            if (key.empty()) {
                throw errors::config(path + ":" + std::to_string(line_no) + ": empty key");
            }
            apply_config_value(config, key, value);
        }
    }

    static const std::map<std::string, std::string> kEnvKeys = {
        {"REWRITE_ENDPOINT", "endpoint"},
        {"REWRITE_AUTH_TOKEN", "auth_token"},
        {"REWRITE_SERVER_ENDPOINT", "server_endpoint"},
        {"REWRITE_SERVER_AUTH_TOKEN", "server_auth_token"},
        {"REWRITE_NLI_ENDPOINT", "nli_endpoint"},
    };
    for (const auto& [var, key] : kEnvKeys) {
        auto it = env.find(var);
        if (it != env.end() && !it->second.empty()) {
            apply_config_value(config, key, it->second);
        }
    }

    for (const auto& [key, value] : flags) apply_config_value(config, key, value);
    return config;
}

AppConfig load_config_from_process_env(const std::string& path,
                                       const std::map<std::string, std::string>& flags) {
    std::map<std::string, std::string> env;
    for (const char* var : {"REWRITE_ENDPOINT", "REWRITE_AUTH_TOKEN",
                            "REWRITE_SERVER_ENDPOINT", "REWRITE_SERVER_AUTH_TOKEN",
                            "REWRITE_NLI_ENDPOINT"}) {
        if (const char* value = std::getenv(var)) env[var] = value;
    }
    return load_config(path, env, flags);
}

}  // namespace rewritekit
