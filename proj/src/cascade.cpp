// Cascade policy: best-of-N selection, gamma routing, offline sweeps.

#include "rewritekit/cascade.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "rewritekit/errors.hpp"
#include "rewritekit/textcore.hpp"

namespace rewritekit {

namespace {

using nlohmann::json;

double key_score(const LoggedCandidate& candidate, SelectionKey key) {
    return key == SelectionKey::SuffixScore ? candidate.suffix_score : candidate.lm_score;
}

// Best-candidate index, confidence, and label per record, fixed for a key.
struct ReplayRow {
    double confidence = 0.0;
    bool on_device_good = false;
    bool server_good = false;
};

std::vector<ReplayRow> prepare_replay(const std::vector<CascadeLogRecord>& log,
                                      SelectionKey key) {
    if (log.empty()) {
        throw errors::invalid_argument("cascade replay needs a non-empty log");
    }
    std::vector<ReplayRow> rows;
    rows.reserve(log.size());
    std::string missing;
    for (const auto& record : log) {
        if (record.candidates.empty()) {
            throw errors::validation("log record " + record.prompt_id + " has no candidates");
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < record.candidates.size(); ++i) {
            if (key_score(record.candidates[i], key) >
                key_score(record.candidates[best], key)) {
                best = i;
            }
        }
        const LoggedCandidate& chosen = record.candidates[best];
        if (!chosen.good.has_value() || !record.server_good.has_value()) {
            missing += missing.empty() ? record.prompt_id : ", " + record.prompt_id;
            continue;
        }
        ReplayRow row;
        row.confidence = key_score(chosen, key);
        row.on_device_good = *chosen.good;
        row.server_good = *record.server_good;
        rows.push_back(row);
    }
    if (!missing.empty()) {
        throw errors::validation("log records missing judge labels: " + missing);
    }
    return rows;
}

}  // namespace

const char* origin_name(Origin origin) {
    return origin == Origin::OnDevice ? "on_device" : "server";
}

void CascadeConfig::validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw errors::invalid_argument("gamma must be within [0,1]");
    }
    if (num_samples < 1) {
        throw errors::invalid_argument("cascade num_samples must be >= 1");
    }
}

std::pair<std::size_t, CandidateResponse> select_best(
    const std::vector<CandidateResponse>& candidates, SelectionKey key) {
    if (candidates.empty()) {
        throw errors::invalid_argument("select_best needs at least one candidate");
    }
    auto value_of = [&](const CandidateResponse& cand) {
        if (key == SelectionKey::LmScore) return cand.lm_score;
        if (!cand.suffix_score.has_value()) {
            throw errors::invalid_argument("candidate lacks a suffix score");
        }
        return *cand.suffix_score;
    };
    std::size_t best = 0;
    double best_value = value_of(candidates[0]);
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        double value = value_of(candidates[i]);
        if (value > best_value) {  // strict: ties keep the earliest index
            best = i;
            best_value = value;
        }
    }
    return {best, candidates[best]};
}

CascadeDecision route(const std::string& prompt, TextBackend& on_device,
                      TextBackend& server, const CascadeConfig& config,
                      const SuffixConfig& suffix, CascadeLogRecord* record_out) {
    config.validate();
    suffix.validate();

    GenerationParams params;
    params.num_samples = config.num_samples;
    std::vector<CandidateResponse> candidates = on_device.generate(prompt, params);
    for (auto& cand : candidates) {
        // An empty candidate can never be confidently kept; score it 0.
        cand.suffix_score =
            cand.text.empty() ? 0.0 : suffix_score(on_device, prompt, cand.text, suffix).value;
    }
    auto [best_index, best] = select_best(candidates, SelectionKey::SuffixScore);

    if (record_out != nullptr) {
        record_out->candidates.clear();
        record_out->server_text.clear();
        record_out->server_good.reset();
        for (const auto& cand : candidates) {
            LoggedCandidate logged;
            logged.text = cand.text;
            logged.suffix_score = *cand.suffix_score;
            logged.lm_score = cand.lm_score;
            record_out->candidates.push_back(std::move(logged));
        }
    }

    CascadeDecision decision;
    decision.suffix_score = *best.suffix_score;
    decision.candidates_considered = static_cast<int>(candidates.size());
    if (decision.suffix_score > config.gamma) {
        decision.origin = Origin::OnDevice;
        decision.chosen_text = best.text;
        return decision;
    }

    GenerationParams server_params;
    server_params.num_samples = 1;
    std::vector<CandidateResponse> server_reply;
    try {
        server_reply = server.generate(prompt, server_params);
    } catch (const Error& e) {
        // The decision must not silently downgrade to the unconfident
        // on-device candidate.
        throw errors::server_unavailable(e.what());
    }
    decision.origin = Origin::Server;
    decision.chosen_text = server_reply.front().text;
    if (record_out != nullptr) record_out->server_text = decision.chosen_text;
    return decision;
}

std::vector<TradeoffPoint> sweep_thresholds(const std::vector<CascadeLogRecord>& log,
                                            const std::vector<double>& gammas,
                                            SelectionKey key) {
    std::vector<ReplayRow> rows = prepare_replay(log, key);
    std::vector<TradeoffPoint> points;
    points.reserve(gammas.size());
    for (double gamma : gammas) {
        std::size_t on_device = 0;
        std::size_t successes = 0;
        for (const ReplayRow& row : rows) {
            bool local = row.confidence > gamma;
            if (local) ++on_device;
            if (local ? row.on_device_good : row.server_good) ++successes;
        }
        TradeoffPoint point;
        point.gamma = gamma;
        point.on_device_ratio =
            static_cast<double>(on_device) / static_cast<double>(rows.size());
        point.success_rate =
            static_cast<double>(successes) / static_cast<double>(rows.size());
        points.push_back(point);
    }
    return points;
}

double pick_gamma_for_budget(const std::vector<CascadeLogRecord>& log,
                             double target_on_device_ratio, SelectionKey key) {
    if (!(target_on_device_ratio >= 0.0 && target_on_device_ratio <= 1.0)) {
        throw errors::invalid_argument("target on-device ratio must be within [0,1]");
    }
    std::vector<ReplayRow> rows = prepare_replay(log, key);

    std::set<double> grid{0.0, 1.0};
    for (const ReplayRow& row : rows) grid.insert(row.confidence);

    // on_device_ratio(gamma) is non-increasing, so scanning the grid from
    // the top finds the largest still-feasible threshold first.
    for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
        std::size_t on_device = 0;
        for (const ReplayRow& row : rows) {
            if (row.confidence > *it) ++on_device;
        }
        double ratio = static_cast<double>(on_device) / static_cast<double>(rows.size());
        if (ratio >= target_on_device_ratio) return *it;
    }
    throw errors::infeasible_budget(
        "no threshold reaches on-device ratio " + std::to_string(target_on_device_ratio));
}

std::string cascade_record_to_json(const CascadeLogRecord& record) {
    json candidates = json::array();
    for (const auto& cand : record.candidates) {
        json jc = {
            {"text", cand.text},
            {"suffix_score", cand.suffix_score},
            {"lm_score", cand.lm_score},
        };
        if (cand.good.has_value()) jc["label"] = *cand.good ? "good" : "bad";
        candidates.push_back(std::move(jc));
    }
    json out = {
        {"prompt_id", record.prompt_id},
        {"candidates", std::move(candidates)},
        {"server_text", record.server_text},
    };
    if (record.server_good.has_value()) {
        out["server_label"] = *record.server_good ? "good" : "bad";
    }
    return out.dump();
}

namespace {

std::optional<bool> parse_label(const json& value, const std::string& context) {
    std::string text = value.get<std::string>();
    if (text == "good") return true;
    if (text == "bad") return false;
    throw errors::validation(context + ": label must be \"good\" or \"bad\", got \"" +
                             text + "\"");
}

}  // namespace

CascadeLogRecord cascade_record_from_json(const std::string& line) {
    json parsed;
    try {
        parsed = json::parse(line);
    } catch (const json::exception& e) {
        throw errors::validation(std::string("cascade log line is not valid JSON: ") +
                                 e.what());
    }
    CascadeLogRecord record;
    try {
        record.prompt_id = parsed.at("prompt_id").get<std::string>();
        for (const auto& jc : parsed.at("candidates")) {
            LoggedCandidate cand;
            cand.text = jc.at("text").get<std::string>();
            cand.suffix_score = jc.at("suffix_score").get<double>();
            cand.lm_score = jc.at("lm_score").get<double>();
            if (jc.contains("label")) {
                cand.good = parse_label(jc["label"], "record " + record.prompt_id);
            }
            record.candidates.push_back(std::move(cand));
        }
        record.server_text = parsed.value("server_text", std::string());
        if (parsed.contains("server_label")) {
            record.server_good =
                parse_label(parsed["server_label"], "record " + record.prompt_id);
        }
    } catch (const json::exception& e) {
        throw errors::validation(std::string("cascade log record malformed: ") + e.what());
    }
    if (record.candidates.empty()) {
        throw errors::validation("record " + record.prompt_id + " has no candidates");
    }
    return record;
}

std::vector<CascadeLogRecord> load_cascade_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw errors::io("cannot read cascade log: " + path);
    std::vector<CascadeLogRecord> log;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            log.push_back(cascade_record_from_json(line));
        } catch (const Error& e) {
            throw errors::validation(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return log;
}

void save_cascade_log(const std::vector<CascadeLogRecord>& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw errors::io("cannot write cascade log: " + path);
    for (const auto& record : log) out << cascade_record_to_json(record) << '\n';
    if (!out) throw errors::io("failed writing cascade log: " + path);
}

std::string tradeoff_csv(const std::vector<TradeoffPoint>& points) {
    std::string out = "gamma,on_device_ratio,success_rate\n";
    char buffer[96];
    for (const auto& point : points) {
        std::snprintf(buffer, sizeof(buffer), "%.6g,%.6g,%.6g\n", point.gamma,
                      point.on_device_ratio, point.success_rate);
        out += buffer;
    }
    return out;
}

}  // namespace rewritekit
