#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rewritekit/modelio.hpp"

namespace rewritekit {

enum class Origin { OnDevice, Server };

const char* origin_name(Origin origin);

struct CascadeConfig {
    double gamma = 0.5;   // routing threshold, compared strictly
    int num_samples = 8;  // on-device candidates per request

    /// Throws invalid-argument unless gamma is in [0,1] and
    /// num_samples >= 1.
    void validate() const;
};

struct CascadeDecision {
    std::string chosen_text;
    Origin origin = Origin::Server;
    double suffix_score = 0.0;  // best on-device confidence s
    int candidates_considered = 0;
};

enum class SelectionKey { SuffixScore, LmScore };

struct LoggedCandidate {
    std::string text;
    double suffix_score = 0.0;
    double lm_score = 0.0;
    std::optional<bool> good;  // judge label, required for sweeps
};

/// Replay substrate for offline threshold sweeps: everything route() knew
/// about one prompt, plus judge labels for both arms.
struct CascadeLogRecord {
    std::string prompt_id;
    std::vector<LoggedCandidate> candidates;
    std::string server_text;
    std::optional<bool> server_good;
};

struct TradeoffPoint {
    double gamma = 0.0;
    double on_device_ratio = 0.0;
    double success_rate = 0.0;
};

/// Argmax of `key` over the candidates; ties break to the lowest index.
/// Missing suffix scores (when keyed on them) raise invalid-argument.
std::pair<std::size_t, CandidateResponse> select_best(
    const std::vector<CandidateResponse>& candidates, SelectionKey key);

/// Two-tier routing: sample num_samples on-device candidates, score each
/// with the suffix confidence, and keep the best iff its score exceeds
/// gamma; otherwise ask the server once. The decision's suffix_score is the
/// on-device confidence either way. When `record_out` is non-null it
/// receives the scored candidates and (if called) the server text; judge
/// labels are left unset.
CascadeDecision route(const std::string& prompt, TextBackend& on_device,
                      TextBackend& server, const CascadeConfig& config = {},
                      const SuffixConfig& suffix = {},
                      CascadeLogRecord* record_out = nullptr);

/// Replays the routing rule over stored scores for every gamma: a record
/// goes on-device iff its best key score > gamma, and counts as a success
/// iff the chosen arm's label is good. No backend calls are made.
std::vector<TradeoffPoint> sweep_thresholds(const std::vector<CascadeLogRecord>& log,
                                            const std::vector<double>& gammas,
                                            SelectionKey key = SelectionKey::SuffixScore);

/// Largest gamma from {0} + distinct best scores + {1} whose replayed
/// on-device ratio still meets the target, i.e. the most server traffic the
/// budget allows. Unreachable targets raise infeasible-budget.
double pick_gamma_for_budget(const std::vector<CascadeLogRecord>& log,
                             double target_on_device_ratio,
                             SelectionKey key = SelectionKey::SuffixScore);

/// JSONL (one record per line) and CSV codecs for the external interfaces.
std::string cascade_record_to_json(const CascadeLogRecord& record);
CascadeLogRecord cascade_record_from_json(const std::string& line);
std::vector<CascadeLogRecord> load_cascade_log(const std::string& path);
void save_cascade_log(const std::vector<CascadeLogRecord>& log, const std::string& path);

/// Header "gamma,on_device_ratio,success_rate" plus one row per point.
std::string tradeoff_csv(const std::vector<TradeoffPoint>& points);

}  // namespace rewritekit
