// rewritekit: single CLI over the rewriting pipelines. Subcommands:
// eval, stats, datagen, filter, suffix-data, reward-server, cascade,
// sweep, pick-gamma.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rewritekit/bench.hpp"
#include "rewritekit/cascade.hpp"
#include "rewritekit/config.hpp"
#include "rewritekit/datagen.hpp"
#include "rewritekit/errors.hpp"
#include "rewritekit/modelio.hpp"
#include "rewritekit/reward.hpp"
#include "rewritekit/textcore.hpp"

namespace {

using nlohmann::json;
using namespace rewritekit;

// Options shared by every subcommand: config file + direct key overrides.
struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value, highest precedence

    AppConfig resolve() const {
        std::map<std::string, std::string> flags;
        for (const std::string& entry : overrides) {
            std::size_t eq = entry.find('=');
            if (eq == std::string::npos) {
                throw errors::config("--set expects key=value, got: " + entry);
            }
            flags[trim(entry.substr(0, eq))] = trim(entry.substr(eq + 1));
        }
        return load_config_from_process_env(config_path, flags);
    }
};

void add_common(CLI::App* cmd, CommonOptions& common) {
    cmd->add_option("--config", common.config_path, "key=value config file");
    cmd->add_option("--set", common.overrides,
                    "config override key=value (repeatable, beats file and env)");
}

std::unique_ptr<TextBackend> make_backend(const std::string& mock_script,
                                          const std::string& endpoint,
                                          const std::string& auth_token,
                                          const AppConfig& config, const char* role) {
    if (!mock_script.empty()) {
        return std::make_unique<MockBackend>(MockBackend::from_file(mock_script));
    }
    if (!endpoint.empty()) {
        HttpBackendConfig hc;
        hc.endpoint = endpoint;
        hc.auth_token = auth_token;
        hc.max_in_flight = config.max_in_flight;
        return std::make_unique<HttpBackend>(std::move(hc));
    }
    throw errors::config(std::string(role) +
                         " backend not configured: give a mock script or an endpoint");
}

std::unique_ptr<NliScorer> make_scorer(const AppConfig& config) {
    if (!config.nli_endpoint.empty()) {
        HttpBackendConfig hc;
        hc.endpoint = config.nli_endpoint;
        hc.max_in_flight = config.max_in_flight;
        return std::make_unique<RemoteNliScorer>(std::move(hc));
    }
    return std::make_unique<OverlapNliScorer>();
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw errors::io("cannot read: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        std::string stripped = trim(line);
        if (!stripped.empty()) lines.push_back(std::move(stripped));
    }
    return lines;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw errors::io("cannot write: " + path);
    out << text;
    if (!out) throw errors::io("failed writing: " + path);
}

// "a:b:step" inclusive grid or a comma-separated list.
std::vector<double> parse_gammas(const std::string& spec) {
    auto parse_one = [&](const std::string& text) {
        try {
            std::size_t used = 0;
            double parsed = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return parsed;
        } catch (const std::logic_error&) {
            throw errors::invalid_argument("bad gamma value: " + text);
        }
    };
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        std::istringstream in(spec);
        std::string lo_s, hi_s, step_s;
        if (!std::getline(in, lo_s, ':') || !std::getline(in, hi_s, ':') ||
            !std::getline(in, step_s)) {
            throw errors::invalid_argument("gamma range must be lo:hi:step, got: " + spec);
        }
        double lo = parse_one(trim(lo_s));
        double hi = parse_one(trim(hi_s));
        double step = parse_one(trim(step_s));
        if (!(step > 0.0) || hi < lo) {
            throw errors::invalid_argument("gamma range must have hi >= lo and step > 0");
        }
        // Integer stepping avoids drift; the endpoint is always included.
        long n = static_cast<long>((hi - lo) / step + 0.5);
        for (long i = 0; i <= n; ++i) out.push_back(lo + step * static_cast<double>(i));
        if (out.empty() || out.back() < hi - step * 1e-9) out.push_back(hi);
    } else {
        std::size_t start = 0;
        while (start <= spec.size()) {
            std::size_t end = spec.find(',', start);
            if (end == std::string::npos) end = spec.size();
            std::string piece = trim(spec.substr(start, end - start));
            if (!piece.empty()) out.push_back(parse_one(piece));
            start = end + 1;
            if (end == spec.size()) break;
        }
    }
    if (out.empty()) throw errors::invalid_argument("no gamma values in: " + spec);
    return out;
}

SelectionKey parse_key(const std::string& name) {
    if (name == "suffix") return SelectionKey::SuffixScore;
    if (name == "lm") return SelectionKey::LmScore;
    throw errors::invalid_argument("selection key must be suffix or lm, got: " + name);
}

// --- subcommand bodies ------------------------------------------------------

int cmd_eval(const CommonOptions& common, const std::string& dataset_path,
             const std::string& predictions_path, const std::string& out_path,
             const std::string& format_name, const std::string& system_name,
             const std::string& judge_mock, bool judge_remote) {
    AppConfig config = common.resolve();
    std::vector<RewriteExample> examples = load_dataset(dataset_path);
    std::map<std::string, std::string> predictions = load_predictions(predictions_path);
    std::unique_ptr<NliScorer> scorer = make_scorer(config);

    std::unique_ptr<TextBackend> judge;
    if (!judge_mock.empty()) {
        judge = std::make_unique<MockBackend>(MockBackend::from_file(judge_mock));
    } else if (judge_remote) {
        judge = make_backend("", config.endpoint, config.auth_token, config, "judge");
    }

    EvalResult result = evaluate(examples, predictions, *scorer, system_name, judge.get());
    ReportFormat format = report_format_from_name(format_name);
    std::string rendered = render_report({result.row}, result.details, format);
    if (out_path.empty()) {
        std::cout << rendered;
    } else {
        write_text(out_path, rendered);
    }
    return 0;
}

int cmd_stats(const CommonOptions& common, const std::string& dataset_path,
              const std::string& out_path, const std::string& format_name, bool with_nli) {
    AppConfig config = common.resolve();
    std::vector<RewriteExample> examples = load_dataset(dataset_path);
    std::unique_ptr<NliScorer> scorer;
    if (with_nli) scorer = make_scorer(config);
    DatasetStats stats = dataset_stats(examples, scorer.get());
    std::string rendered = render_stats(stats, report_format_from_name(format_name));
    if (out_path.empty()) {
        std::cout << rendered;
    } else {
        write_text(out_path, rendered);
    }
    return 0;
}

json paired_record_json(const PairedRecord& record) {
    return json{{"task", record.task},
                {"instruction", record.instruction},
                {"source", record.source},
                {"target", record.target},
                {"provenance", json{{"seed", record.seed}, {"votes", record.votes}}}};
}

int cmd_datagen(const CommonOptions& common, const std::string& seeds_path,
                const std::string& out_path, const std::string& mock_script,
                const std::string& judge_mock) {
    AppConfig config = common.resolve();
    std::vector<std::string> seeds = read_lines(seeds_path);
    auto generator = make_backend(mock_script, config.endpoint, config.auth_token, config,
                                  "generator");
    auto judge = judge_mock.empty() && !mock_script.empty()
                     ? make_backend(mock_script, "", "", config, "judge")
                     : make_backend(judge_mock, config.server_endpoint.empty()
                                                    ? config.endpoint
                                                    : config.server_endpoint,
                                    config.auth_token, config, "judge");

    DatagenOptions options;
    options.gen_params = config.gen;
    options.judge_params.temperature = config.gen.temperature;
    options.judges = config.judges;
    DatagenResult result = run_datagen_pipeline(*generator, *judge, seeds, options);

    std::string out;
    for (const auto& record : result.kept) out += paired_record_json(record).dump() + "\n";
    write_text(out_path, out);
    std::fprintf(stderr, "datagen: %d generated, %d kept, %d rejected, %d dropped blocks\n",
                 result.generated, static_cast<int>(result.kept.size()), result.rejected,
                 result.dropped_blocks);
    return 0;
}

int cmd_filter(const CommonOptions& common, const std::string& in_path,
               const std::string& out_path, const std::string& judge_mock) {
    AppConfig config = common.resolve();
    auto judge = make_backend(judge_mock, config.endpoint, config.auth_token, config,
                              "judge");

    GenerationParams judge_params;
    judge_params.temperature = config.gen.temperature;
    judge_params.num_samples = 1;
    judge_params.logprobs = false;

    std::ifstream in(in_path, std::ios::binary);
    if (!in) throw errors::io("cannot read: " + in_path);
    std::string out;
    std::string line;
    int line_no = 0;
    int kept = 0, seen = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json object;
        try {
            object = json::parse(line);
            GeneratedTriple triple;
            triple.instruction = object.at("instruction").get<std::string>();
            triple.source = object.at("source").get<std::string>();
            triple.rewrite = object.at("target").get<std::string>();
            ++seen;
            FilterOutcome outcome =
                self_consistency_filter(triple, *judge, config.judges, judge_params);
            if (!outcome.keep) continue;
            ++kept;
            json record = {{"instruction", triple.instruction},
                           {"source", triple.source},
                           {"target", triple.rewrite}};
            record["votes"] = json::array();
            for (Verdict vote : outcome.verdict.votes) {
                record["votes"].push_back(verdict_name(vote));
            }
            out += record.dump() + "\n";
        } catch (const json::exception& e) {
            throw errors::validation(in_path + ":" + std::to_string(line_no) + ": " +
                                     e.what());
        }
    }
    write_text(out_path, out);
    std::fprintf(stderr, "filter: %d of %d kept\n", kept, seen);
    return 0;
}

int cmd_suffix_data(const CommonOptions& common, const std::string& seeds_path,
                    const std::string& out_path, const std::string& mock_script,
                    const std::string& judge_mock) {
    AppConfig config = common.resolve();
    std::vector<std::string> seeds = read_lines(seeds_path);
    auto generator = make_backend(mock_script, config.endpoint, config.auth_token, config,
                                  "generator");
    auto judge = judge_mock.empty() && !mock_script.empty()
                     ? make_backend(mock_script, "", "", config, "judge")
                     : make_backend(judge_mock, config.endpoint, config.auth_token, config,
                                    "judge");

    DatagenOptions options;
    options.gen_params = config.gen;
    options.judges = config.judges;
    auto records = run_suffix_data_pipeline(*generator, *judge, seeds, options,
                                            config.suffix);
    std::string out;
    for (const auto& example : records) {
        out += json{{"text", example.record.labeled_text},
                    {"label", example.label == Verdict::Good ? "good" : "bad"}}
                   .dump() +
               "\n";
    }
    write_text(out_path, out);
    std::fprintf(stderr, "suffix-data: %d records\n", static_cast<int>(records.size()));
    return 0;
}

int cmd_reward_server(const CommonOptions& common) {
    AppConfig config = common.resolve();
    std::unique_ptr<NliScorer> scorer = make_scorer(config);

    std::string line;
    while (std::getline(std::cin, line)) {
        if (trim(line).empty()) continue;
        json reply;
        try {
            json request = json::parse(line);
            RewriteTask task = task_from_name(request.at("task").get<std::string>());
            std::string source = request.at("source").get<std::string>();
            std::string prediction = request.at("prediction").get<std::string>();
            RewardBreakdown breakdown = heuristic_reward(
                config.weights.at(task), source, prediction, *scorer, config.penalty);
            reply = {{"nli", breakdown.terms.nli},
                     {"rnli", breakdown.terms.reverse_nli},
                     {"length_ratio", breakdown.terms.length_ratio},
                     {"edit_ratio", breakdown.terms.edit_ratio},
                     {"ngram_reward", breakdown.terms.ngram_reward},
                     {"total", breakdown.total}};
        } catch (const json::exception& e) {
            reply = {{"error", std::string("bad request: ") + e.what()}};
        } catch (const Error& e) {
            reply = {{"error", e.what()}};
        }
        std::cout << reply.dump() << "\n" << std::flush;
    }
    return 0;
}

int cmd_cascade(const CommonOptions& common, const std::string& prompts_path,
                const std::string& log_path, const std::string& mock_script,
                const std::string& server_mock) {
    AppConfig config = common.resolve();
    std::vector<std::string> prompts = read_lines(prompts_path);
    auto on_device = make_backend(mock_script, config.endpoint, config.auth_token, config,
                                  "on-device");
    auto server = make_backend(server_mock, config.server_endpoint,
                               config.server_auth_token, config, "server");

    std::vector<CascadeLogRecord> log;
    int on_device_count = 0;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        CascadeLogRecord record;
        CascadeDecision decision = route(prompts[i], *on_device, *server, config.cascade,
                                         config.suffix, &record);
        char id[32];
        std::snprintf(id, sizeof(id), "p%05zu", i + 1);
        record.prompt_id = id;
        log.push_back(std::move(record));
        if (decision.origin == Origin::OnDevice) ++on_device_count;

        std::cout << json{{"prompt_id", id},
                          {"origin", origin_name(decision.origin)},
                          {"text", decision.chosen_text},
                          {"suffix_score", decision.suffix_score}}
                         .dump()
                  << "\n";
    }
    if (!log_path.empty()) save_cascade_log(log, log_path);
    std::fprintf(stderr, "cascade: %d/%d on-device (gamma=%g)\n", on_device_count,
                 static_cast<int>(prompts.size()), config.cascade.gamma);
    return 0;
}

int cmd_sweep(const std::string& log_path, const std::string& gamma_spec,
              const std::string& out_path, const std::string& key_name) {
    std::vector<CascadeLogRecord> log = load_cascade_log(log_path);
    std::vector<TradeoffPoint> points =
        sweep_thresholds(log, parse_gammas(gamma_spec), parse_key(key_name));
    std::string csv = tradeoff_csv(points);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_text(out_path, csv);
    }
    return 0;
}

int cmd_pick_gamma(const std::string& log_path, double target, const std::string& key_name) {
    std::vector<CascadeLogRecord> log = load_cascade_log(log_path);
    double gamma = pick_gamma_for_budget(log, target, parse_key(key_name));
    std::printf("%.17g\n", gamma);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"message rewriting toolkit: metrics, rewards, cascade, synthetic data"};
    app.require_subcommand(1);

    CommonOptions common;

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "score predictions against a dataset");
    std::string dataset_path, predictions_path, out_path, format_name = "json";
    std::string system_name = "system", judge_mock;
    bool judge_remote = false;
    eval_cmd->add_option("--dataset", dataset_path, "dataset JSONL")->required();
    eval_cmd->add_option("--predictions", predictions_path, "predictions JSONL")->required();
    eval_cmd->add_option("--out", out_path, "report file (default: stdout)");
    eval_cmd->add_option("--format", format_name, "json|csv|markdown");
    eval_cmd->add_option("--system", system_name, "system name for the report row");
    eval_cmd->add_option("--judge-mock-script", judge_mock,
                         "mock script for success-rate judging");
    eval_cmd->add_flag("--judge", judge_remote,
                       "judge success rate with the configured endpoint");
    add_common(eval_cmd, common);
    eval_cmd->callback([&] {
        cmd_eval(common, dataset_path, predictions_path, out_path, format_name,
                 system_name, judge_mock, judge_remote);
    });

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "dataset statistics table");
    std::string stats_dataset, stats_out, stats_format = "json";
    bool with_nli = true;
    stats_cmd->add_option("--dataset", stats_dataset, "dataset JSONL")->required();
    stats_cmd->add_option("--out", stats_out, "output file (default: stdout)");
    stats_cmd->add_option("--format", stats_format, "json|csv|markdown");
    stats_cmd->add_flag("--no-nli", [&with_nli](std::int64_t) { with_nli = false; },
                        "skip the entailment columns");
    add_common(stats_cmd, common);
    stats_cmd->callback([&] {
        cmd_stats(common, stats_dataset, stats_out, stats_format, with_nli);
    });

    // datagen
    auto* datagen_cmd = app.add_subcommand("datagen",
                                           "hallucinate + judge paired rewrite data");
    std::string seeds_path, datagen_out, gen_mock, judge_mock_script;
    datagen_cmd->add_option("--seeds", seeds_path, "seed queries, one per line")
        ->required();
    datagen_cmd->add_option("--out", datagen_out, "output JSONL")->required();
    datagen_cmd->add_option("--mock-script", gen_mock, "mock script for the generator");
    datagen_cmd->add_option("--judge-mock-script", judge_mock_script,
                            "mock script for the judge (defaults to --mock-script)");
    add_common(datagen_cmd, common);
    datagen_cmd->callback([&] {
        cmd_datagen(common, seeds_path, datagen_out, gen_mock, judge_mock_script);
    });

    // filter
    auto* filter_cmd = app.add_subcommand("filter",
                                          "self-consistency filter over stored triples");
    std::string filter_in, filter_out, filter_judge_mock;
    filter_cmd->add_option("--in", filter_in, "triples JSONL (instruction/source/target)")
        ->required();
    filter_cmd->add_option("--out", filter_out, "kept triples JSONL")->required();
    filter_cmd->add_option("--judge-mock-script", filter_judge_mock,
                           "mock script for the judge");
    add_common(filter_cmd, common);
    filter_cmd->callback([&] {
        cmd_filter(common, filter_in, filter_out, filter_judge_mock);
    });

    // suffix-data
    auto* suffix_cmd = app.add_subcommand("suffix-data",
                                          "emit labeled suffix fine-tuning records");
    std::string suffix_seeds, suffix_out, suffix_mock, suffix_judge_mock;
    suffix_cmd->add_option("--seeds", suffix_seeds, "seed queries, one per line")
        ->required();
    suffix_cmd->add_option("--out", suffix_out, "output JSONL")->required();
    suffix_cmd->add_option("--mock-script", suffix_mock, "mock script for the generator");
    suffix_cmd->add_option("--judge-mock-script", suffix_judge_mock,
                           "mock script for the judge (defaults to --mock-script)");
    add_common(suffix_cmd, common);
    suffix_cmd->callback([&] {
        cmd_suffix_data(common, suffix_seeds, suffix_out, suffix_mock, suffix_judge_mock);
    });

    // reward-server
    auto* reward_cmd = app.add_subcommand(
        "reward-server", "stdin/stdout JSONL loop: {task, source, prediction} -> reward");
    add_common(reward_cmd, common);
    reward_cmd->callback([&] { cmd_reward_server(common); });

    // cascade
    auto* cascade_cmd = app.add_subcommand("cascade", "route prompts through the cascade");
    std::string cascade_prompts, cascade_log, cascade_mock, cascade_server_mock;
    cascade_cmd->add_option("--prompts", cascade_prompts, "prompts, one per line")
        ->required();
    cascade_cmd->add_option("--log", cascade_log, "write replayable log JSONL here");
    cascade_cmd->add_option("--mock-script", cascade_mock,
                            "mock script for the on-device model");
    cascade_cmd->add_option("--server-mock-script", cascade_server_mock,
                            "mock script for the server model");
    add_common(cascade_cmd, common);
    cascade_cmd->callback([&] {
        cmd_cascade(common, cascade_prompts, cascade_log, cascade_mock,
                    cascade_server_mock);
    });

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "offline gamma sweep over a cascade log");
    std::string sweep_log, sweep_gammas = "0:1:0.05", sweep_out, sweep_key = "suffix";
    sweep_cmd->add_option("--log", sweep_log, "cascade log JSONL")->required();
    sweep_cmd->add_option("--gammas", sweep_gammas, "lo:hi:step or comma list");
    sweep_cmd->add_option("--out", sweep_out, "CSV output (default: stdout)");
    sweep_cmd->add_option("--key", sweep_key, "suffix|lm");
    sweep_cmd->callback([&] { cmd_sweep(sweep_log, sweep_gammas, sweep_out, sweep_key); });

    // pick-gamma
    auto* pick_cmd = app.add_subcommand("pick-gamma",
                                        "largest gamma meeting an on-device budget");
    std::string pick_log, pick_key = "suffix";
    double pick_target = 0.0;
    pick_cmd->add_option("--log", pick_log, "cascade log JSONL")->required();
    pick_cmd->add_option("--target", pick_target, "required on-device ratio in [0,1]")
        ->required();
    pick_cmd->add_option("--key", pick_key, "suffix|lm");
    pick_cmd->callback([&] { cmd_pick_gamma(pick_log, pick_target, pick_key); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the usage message
        return 2;
    } catch (const rewritekit::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
