#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rewritekit/metrics.hpp"
#include "rewritekit/modelio.hpp"
#include "rewritekit/reward.hpp"

namespace rewritekit {

struct RewriteExample {
    std::string id;
    RewriteTask task = RewriteTask::Paraphrase;
    std::string instruction;
    std::string source;
    std::vector<std::string> targets;  // at least one, all non-empty
};

/// JSONL loader; schema errors name the offending line, duplicate ids are
/// rejected, input order is preserved.
std::vector<RewriteExample> load_dataset(const std::string& path);

/// Predictions JSONL: {"id": ..., "prediction": ...} per line.
std::map<std::string, std::string> load_predictions(const std::string& path);

/// Mean word-count and similarity columns for one slice of the dataset.
/// Multi-target examples contribute their first target. NLI columns are
/// only present when a scorer was supplied.
struct TaskStats {
    int count = 0;
    double mean_instruction_words = 0.0;
    double mean_source_words = 0.0;
    double mean_target_words = 0.0;
    double mean_length_ratio = 0.0;
    double mean_edit_ratio = 0.0;
    std::optional<double> mean_nli_source_to_target;
    std::optional<double> mean_nli_target_to_source;
};

struct DatasetStats {
    std::map<RewriteTask, TaskStats> per_task;  // only tasks present
    TaskStats overall;
};

DatasetStats dataset_stats(const std::vector<RewriteExample>& examples,
                           NliScorer* scorer = nullptr);

struct ExampleEval {
    std::string id;
    RewriteTask task = RewriteTask::Paraphrase;
    MetricReport metrics;  // edit/length vs source; BLEU/SARI/U-R vs targets
    double nli = 0.0;          // source -> prediction
    double reverse_nli = 0.0;  // prediction -> source
    bool flagged = false;      // edit_ratio > 0.2, the hallucination tripwire
    std::optional<bool> judged_good;
};

struct EvalRow {
    std::string system;
    int count = 0;
    double edit_ratio = 0.0;   // mean, vs source
    double length_ratio = 0.0; // mean, vs source
    double nli = 0.0;
    double reverse_nli = 0.0;
    double sari = 0.0;          // mean
    double bleu = 0.0;          // corpus-level
    double mean_sentence_bleu = 0.0;
    double update_rouge = 0.0;  // mean
    int flagged_count = 0;
    std::optional<double> success_rate;  // only with a judge backend
};

struct EvalResult {
    EvalRow row;
    std::vector<ExampleEval> details;  // dataset order
};

/// Scores predictions against the dataset. Every example needs a
/// prediction; missing ids raise a validation error listing them. A judge
/// backend enables the success-rate column via the critique prompt.
EvalResult evaluate(const std::vector<RewriteExample>& examples,
                    const std::map<std::string, std::string>& predictions,
                    NliScorer& scorer, const std::string& system_name = "system",
                    TextBackend* judge = nullptr);

enum class ReportFormat { Json, Csv, Markdown };

ReportFormat report_format_from_name(const std::string& name);

/// Deterministic serialization of summary rows (+ per-example details in
/// JSON). Markdown mirrors the benchmark table column order: Edit Ratio,
/// NLI, Reversed NLI, SARI, BLEU, Update-R (n-gram metrics scaled x100).
std::string render_report(const std::vector<EvalRow>& rows,
                          const std::vector<ExampleEval>& details, ReportFormat format);

void emit_report(const std::vector<EvalRow>& rows, const std::vector<ExampleEval>& details,
                 ReportFormat format, const std::string& path);

/// Dataset stats serialization (json, csv, or markdown).
std::string render_stats(const DatasetStats& stats, ReportFormat format);

}  // namespace rewritekit
