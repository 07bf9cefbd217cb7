// Benchmark harness: dataset loading, corpus statistics, evaluation,
// report rendering.

#include "rewritekit/bench.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "rewritekit/datagen.hpp"
#include "rewritekit/errors.hpp"
#include "rewritekit/textcore.hpp"

namespace rewritekit {

namespace {

using nlohmann::json;

std::string where(const std::string& path, int line_no) {
    return path + ":" + std::to_string(line_no);
}

json parse_line(const std::string& path, int line_no, const std::string& line) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw errors::validation(where(path, line_no) + ": invalid JSON: " + e.what());
    }
}

std::string required_string(const json& object, const char* field, const std::string& at) {
    if (!object.contains(field) || !object[field].is_string()) {
        throw errors::validation(at + ": missing string field \"" + field + "\"");
    }
    std::string value = object[field].get<std::string>();
    if (value.empty()) {
        throw errors::validation(at + ": field \"" + field + "\" is empty");
    }
    return value;
}

// Accumulates one mean per column; push order is the dataset order.
struct StatsAccumulator {
    int count = 0;
    double ins = 0, sou = 0, tar = 0, len_ra = 0, edit_ra = 0, nli_st = 0, nli_ts = 0;

    void add(double ins_v, double sou_v, double tar_v, double len_v, double edit_v,
             double st_v, double ts_v) {
        ++count;
        ins += ins_v;
        sou += sou_v;
        tar += tar_v;
        len_ra += len_v;
        edit_ra += edit_v;
        nli_st += st_v;
        nli_ts += ts_v;
    }

    TaskStats finish(bool with_nli) const {
        TaskStats out;
        out.count = count;
        if (count == 0) return out;
        double n = static_cast<double>(count);
        out.mean_instruction_words = ins / n;
        out.mean_source_words = sou / n;
        out.mean_target_words = tar / n;
        out.mean_length_ratio = len_ra / n;
        out.mean_edit_ratio = edit_ra / n;
        if (with_nli) {
            out.mean_nli_source_to_target = nli_st / n;
            out.mean_nli_target_to_source = nli_ts / n;
        }
        return out;
    }
};

// 47.14-style fixed-point cell; scaled by 100 for the n-gram metrics.
std::string cell(double value, bool scaled = false) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.2f", scaled ? value * 100.0 : value);
    return buffer;
}

json row_to_json(const EvalRow& row) {
    json out = {
        {"system", row.system},
        {"count", row.count},
        {"edit_ratio", row.edit_ratio},
        {"length_ratio", row.length_ratio},
        {"nli", row.nli},
        {"reversed_nli", row.reverse_nli},
        {"sari", row.sari},
        {"bleu", row.bleu},
        {"mean_sentence_bleu", row.mean_sentence_bleu},
        {"update_rouge", row.update_rouge},
        {"flagged_count", row.flagged_count},
    };
    if (row.success_rate.has_value()) out["success_rate"] = *row.success_rate;
    return out;
}

json detail_to_json(const ExampleEval& detail) {
    json out = {
        {"id", detail.id},
        {"task", task_name(detail.task)},
        {"edit_ratio", detail.metrics.edit_ratio},
        {"length_ratio", detail.metrics.length_ratio},
        {"bleu", detail.metrics.bleu},
        {"sari", detail.metrics.sari},
        {"update_rouge", detail.metrics.update_rouge},
        {"nli", detail.nli},
        {"reversed_nli", detail.reverse_nli},
        {"flagged", detail.flagged},
    };
    if (detail.judged_good.has_value()) out["judged_good"] = *detail.judged_good;
    return out;
}

}  // namespace

std::vector<RewriteExample> load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw errors::io("cannot read dataset: " + path);

    std::vector<RewriteExample> examples;
    std::set<std::string> ids;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string at = where(path, line_no);
        json object = parse_line(path, line_no, line);

        RewriteExample example;
        example.id = required_string(object, "id", at);
        example.task = task_from_name(required_string(object, "task", at));
        example.instruction = required_string(object, "instruction", at);
        example.source = required_string(object, "source", at);
        if (!object.contains("targets") || !object["targets"].is_array() ||
            object["targets"].empty()) {
            throw errors::validation(at + ": \"targets\" must be a non-empty array");
        }
        for (const auto& target : object["targets"]) {
            if (!target.is_string() || target.get<std::string>().empty()) {
                throw errors::validation(at + ": every target must be a non-empty string");
            }
            example.targets.push_back(target.get<std::string>());
        }
        if (!ids.insert(example.id).second) {
            throw errors::validation(at + ": duplicate id \"" + example.id + "\"");
        }
        examples.push_back(std::move(example));
    }
    return examples;
}

std::map<std::string, std::string> load_predictions(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw errors::io("cannot read predictions: " + path);
    std::map<std::string, std::string> predictions;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string at = where(path, line_no);
        json object = parse_line(path, line_no, line);
        std::string id = required_string(object, "id", at);
        if (!object.contains("prediction") || !object["prediction"].is_string()) {
            throw errors::validation(at + ": missing string field \"prediction\"");
        }
        if (!predictions.emplace(id, object["prediction"].get<std::string>()).second) {
            throw errors::validation(at + ": duplicate prediction for id \"" + id + "\"");
        }
    }
    return predictions;
}

DatasetStats dataset_stats(const std::vector<RewriteExample>& examples, NliScorer* scorer) {
    if (examples.empty()) {
        throw errors::invalid_argument("dataset_stats needs at least one example");
    }
    std::map<RewriteTask, StatsAccumulator> per_task;
    StatsAccumulator overall;

    for (const auto& example : examples) {
        const std::string& target = example.targets.front();
        TokenSeq ins = tokenize(example.instruction);
        TokenSeq sou = tokenize(example.source);
        TokenSeq tar = tokenize(target);
        double len_v = length_ratio(sou, tar);
        double edit_v = edit_ratio(sou, tar);
        double st_v = scorer != nullptr ? scorer->score(example.source, target) : 0.0;
        double ts_v = scorer != nullptr ? scorer->score(target, example.source) : 0.0;

        per_task[example.task].add(static_cast<double>(ins.size()),
                                   static_cast<double>(sou.size()),
                                   static_cast<double>(tar.size()), len_v, edit_v, st_v,
                                   ts_v);
        overall.add(static_cast<double>(ins.size()), static_cast<double>(sou.size()),
                    static_cast<double>(tar.size()), len_v, edit_v, st_v, ts_v);
    }

    DatasetStats stats;
    for (const auto& [task, acc] : per_task) {
        stats.per_task.emplace(task, acc.finish(scorer != nullptr));
    }
    stats.overall = overall.finish(scorer != nullptr);
    return stats;
}

EvalResult evaluate(const std::vector<RewriteExample>& examples,
                    const std::map<std::string, std::string>& predictions,
                    NliScorer& scorer, const std::string& system_name, TextBackend* judge) {
    std::string missing;
    for (const auto& example : examples) {
        if (predictions.find(example.id) == predictions.end()) {
            missing += missing.empty() ? example.id : ", " + example.id;
        }
    }
    if (!missing.empty()) {
        throw errors::validation("missing predictions for: " + missing);
    }
    if (examples.empty()) {
        throw errors::invalid_argument("evaluate needs at least one example");
    }

    EvalResult result;
    result.row.system = system_name;
    result.row.count = static_cast<int>(examples.size());

    BleuStats corpus;
    double edit_sum = 0, length_sum = 0, nli_sum = 0, rnli_sum = 0;
    double sari_sum = 0, sbleu_sum = 0, rouge_sum = 0;
    int judged_good = 0;

    for (const auto& example : examples) {
        const std::string& prediction = predictions.at(example.id);
        TokenSeq src = tokenize(example.source);
        TokenSeq pred = tokenize(prediction);

        ExampleEval detail;
        detail.id = example.id;
        detail.task = example.task;
        detail.metrics.edit_ratio = edit_ratio(src, pred);
        detail.metrics.length_ratio = length_ratio(src, pred);
        BleuStats stats = bleu_stats(prediction, example.targets);
        corpus += stats;
        detail.metrics.bleu = stats.score();
        detail.metrics.sari = sari(example.source, prediction, example.targets);
        detail.metrics.update_rouge = update_rouge(example.source, prediction,
                                                   example.targets);
        detail.nli = scorer.score(example.source, prediction);
        detail.reverse_nli = scorer.score(prediction, example.source);
        detail.flagged = detail.metrics.edit_ratio > 0.2;

        if (judge != nullptr) {
            if (prediction.empty()) {
                // Nothing to judge; an empty rewrite cannot follow the
                // instruction.
                detail.judged_good = false;
            } else {
                std::string prompt = build_critique_prompt(example.instruction,
                                                           example.source, prediction);
                GenerationParams params;
                params.temperature = 0.0;
                params.num_samples = 1;
                params.logprobs = false;
                auto replies = judge->generate(prompt, params);
                detail.judged_good = parse_verdict(replies.front().text) == Verdict::Good;
            }
            if (*detail.judged_good) ++judged_good;
        }

        edit_sum += detail.metrics.edit_ratio;
        length_sum += detail.metrics.length_ratio;
        nli_sum += detail.nli;
        rnli_sum += detail.reverse_nli;
        sari_sum += detail.metrics.sari;
        sbleu_sum += detail.metrics.bleu;
        rouge_sum += detail.metrics.update_rouge;
        if (detail.flagged) ++result.row.flagged_count;
        result.details.push_back(std::move(detail));
    }

    double n = static_cast<double>(examples.size());
    result.row.edit_ratio = edit_sum / n;
    result.row.length_ratio = length_sum / n;
    result.row.nli = nli_sum / n;
    result.row.reverse_nli = rnli_sum / n;
    result.row.sari = sari_sum / n;
    result.row.bleu = corpus.score();
    result.row.mean_sentence_bleu = sbleu_sum / n;
    result.row.update_rouge = rouge_sum / n;
    if (judge != nullptr) {
        result.row.success_rate = static_cast<double>(judged_good) / n;
    }
    return result;
}

ReportFormat report_format_from_name(const std::string& name) {
    if (name == "json") return ReportFormat::Json;
    if (name == "csv") return ReportFormat::Csv;
    if (name == "markdown") return ReportFormat::Markdown;
    throw errors::invalid_argument("unknown report format: " + name);
}

std::string render_report(const std::vector<EvalRow>& rows,
                          const std::vector<ExampleEval>& details, ReportFormat format) {
    if (rows.empty()) {
        throw errors::invalid_argument("report needs at least one row");
    }
    switch (format) {
        case ReportFormat::Json: {
            json out;
            out["rows"] = json::array();
            for (const auto& row : rows) out["rows"].push_back(row_to_json(row));
            out["details"] = json::array();
            for (const auto& detail : details) {
                out["details"].push_back(detail_to_json(detail));
            }
            return out.dump(2) + "\n";
        }
        case ReportFormat::Csv: {
            std::string out =
                "system,count,edit_ratio,length_ratio,nli,reversed_nli,sari,bleu,"
                "update_rouge,flagged_count,success_rate\n";
            for (const auto& row : rows) {
                out += row.system + ',' + std::to_string(row.count) + ',' +
                       cell(row.edit_ratio) + ',' + cell(row.length_ratio) + ',' +
                       cell(row.nli) + ',' + cell(row.reverse_nli) + ',' +
                       cell(row.sari, true) + ',' + cell(row.bleu, true) + ',' +
                       cell(row.update_rouge, true) + ',' +
                       std::to_string(row.flagged_count) + ',';
                if (row.success_rate.has_value()) out += cell(*row.success_rate);
                out += '\n';
            }
            return out;
        }
        case ReportFormat::Markdown: {
            std::string out =
                "| System | Edit Ratio | NLI | Reversed NLI | SARI | BLEU | Update-R |"
                " Success Rate |\n"
                "|---|---|---|---|---|---|---|---|\n";
            for (const auto& row : rows) {
                out += "| " + row.system + " | " + cell(row.edit_ratio) + " | " +
                       cell(row.nli) + " | " + cell(row.reverse_nli) + " | " +
                       cell(row.sari, true) + " | " + cell(row.bleu, true) + " | " +
                       cell(row.update_rouge, true) + " | " +
                       (row.success_rate.has_value() ? cell(*row.success_rate) : "-") +
                       " |\n";
            }
            return out;
        }
    }
    throw errors::invalid_argument("unknown report format");
}

void emit_report(const std::vector<EvalRow>& rows, const std::vector<ExampleEval>& details,
                 ReportFormat format, const std::string& path) {
    std::string rendered = render_report(rows, details, format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw errors::io("cannot write report: " + path);
    out << rendered;
    if (!out) throw errors::io("failed writing report: " + path);
}

std::string render_stats(const DatasetStats& stats, ReportFormat format) {
    auto slice_rows = [&] {
        std::vector<std::pair<std::string, const TaskStats*>> rows;
        for (RewriteTask task : kAllTasks) {
            auto it = stats.per_task.find(task);
            if (it != stats.per_task.end()) rows.emplace_back(task_name(task), &it->second);
        }
        rows.emplace_back("all", &stats.overall);
        return rows;
    }();

    switch (format) {
        case ReportFormat::Json: {
            json out;
            for (const auto& [name, slice] : slice_rows) {
                json js = {
                    {"count", slice->count},
                    {"mean_instruction_words", slice->mean_instruction_words},
                    {"mean_source_words", slice->mean_source_words},
                    {"mean_target_words", slice->mean_target_words},
                    {"mean_length_ratio", slice->mean_length_ratio},
                    {"mean_edit_ratio", slice->mean_edit_ratio},
                };
                if (slice->mean_nli_source_to_target.has_value()) {
                    js["mean_nli_source_to_target"] = *slice->mean_nli_source_to_target;
                    js["mean_nli_target_to_source"] = *slice->mean_nli_target_to_source;
                }
                out[name] = std::move(js);
            }
            return out.dump(2) + "\n";
        }
        case ReportFormat::Csv: {
            std::string out = "task,count,ins,sou,tar,len_ra,edit_ra,nli_st,nli_ts\n";
            for (const auto& [name, slice] : slice_rows) {
                out += name + ',' + std::to_string(slice->count) + ',' +
                       cell(slice->mean_instruction_words) + ',' +
                       cell(slice->mean_source_words) + ',' +
                       cell(slice->mean_target_words) + ',' +
                       cell(slice->mean_length_ratio) + ',' +
                       cell(slice->mean_edit_ratio) + ',';
                if (slice->mean_nli_source_to_target.has_value()) {
                    out += cell(*slice->mean_nli_source_to_target) + ',' +
                           cell(*slice->mean_nli_target_to_source);
                } else {
                    out += ',';
                }
                out += '\n';
            }
            return out;
        }
        case ReportFormat::Markdown: {
            std::string out =
                "| Task | Size | Ins | Sou | Tar | Len Ra | Edit Ra | NLI s->t |"
                " NLI t->s |\n"
                "|---|---|---|---|---|---|---|---|---|\n";
            for (const auto& [name, slice] : slice_rows) {
                out += "| " + name + " | " + std::to_string(slice->count) + " | " +
                       cell(slice->mean_instruction_words) + " | " +
                       cell(slice->mean_source_words) + " | " +
                       cell(slice->mean_target_words) + " | " +
                       cell(slice->mean_length_ratio) + " | " +
                       cell(slice->mean_edit_ratio) + " | " +
                       (slice->mean_nli_source_to_target.has_value()
                            ? cell(*slice->mean_nli_source_to_target)
                            : "-") +
                       " | " +
                       (slice->mean_nli_target_to_source.has_value()
                            ? cell(*slice->mean_nli_target_to_source)
                            : "-") +
                       " |\n";
            }
            return out;
        }
    }
    throw errors::invalid_argument("unknown report format");
}

}  // namespace rewritekit
