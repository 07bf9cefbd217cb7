#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rewritekit/modelio.hpp"
#include "rewritekit/reward.hpp"

namespace rewritekit {

enum class Verdict { Good, Bad, Unparseable };

const char* verdict_name(Verdict verdict);

/// One hallucinated (source, rewrite, instruction) example recovered from a
/// model continuation. All three text fields are non-empty and source !=
/// rewrite; anything else is dropped during parsing.
struct GeneratedTriple {
    std::string source;
    std::string rewrite;
    std::string instruction;
    std::string seed_query;
    std::string raw_block;
};

struct TripleParse {
    std::vector<GeneratedTriple> triples;
    int dropped = 0;  // blocks discarded for missing/empty/equal fields
};

struct CritiqueVerdict {
    Verdict label = Verdict::Unparseable;  // Good iff every vote is Good
    std::vector<Verdict> votes;
    std::optional<std::string> explanation;
};

/// A discriminative fine-tuning example: the rewriting context, the response
/// under judgment, and the label-terminated training string.
struct SuffixRecord {
    std::string input_text;  // instruction + "\n" + source
    std::string response;
    std::string labeled_text;
};

/// Substitutes {name} placeholders. Any placeholder in the template without
/// a value raises a template error; substituted values are inserted as-is.
std::string fill_template(const std::string& tpl,
                          const std::map<std::string, std::string>& values);

std::vector<std::string> hallucination_template_ids();

/// Few-shot prompt whose continuation hallucinates Source/Rewrite/Prompt
/// blocks for the seed query. Ends with "Query: <seed>\nSource:" so the
/// model completes the first source directly.
std::string build_hallucination_prompt(const std::string& seed_query,
                                       const std::string& template_id = "default");

/// Scans labeled "Source:" / "Rewrite:" / "Prompt:" blocks (case-insensitive,
/// order tolerant within a block). Incomplete blocks are dropped and counted;
/// exact (source, instruction) duplicates are removed.
TripleParse parse_hallucinated_triples(const std::string& continuation);

/// Canonical block serialization; parse_hallucinated_triples recovers the
/// triple's text fields from it exactly.
std::string format_triple_block(const GeneratedTriple& triple);

/// Few-shot chain-of-thought judge prompt for one (instruction, source,
/// response). Always ends with "#Choose (GOOD) or (BAD):".
std::string build_critique_prompt(const std::string& instruction, const std::string& source,
                                  const std::string& response);

/// First standalone GOOD or BAD (case-sensitive) before any "#Explanation"
/// marker decides; neither present -> Unparseable.
Verdict parse_verdict(const std::string& judge_output);

struct FilterOutcome {
    bool keep = false;
    CritiqueVerdict verdict;
};

/// Samples k judge votes for the triple; keeps it only on unanimous GOOD.
/// Unparseable votes count as disapproval.
FilterOutcome self_consistency_filter(const GeneratedTriple& triple, TextBackend& judge,
                                      int k, const GenerationParams& params);

/// Maps a rewrite instruction to one of the five tasks via a few-shot
/// prompt. With a scriptless mock backend a deterministic keyword rule
/// applies instead. Unparseable model output after one retry ->
/// classification error.
RewriteTask classify_task(const std::string& instruction, TextBackend& backend);

/// labeled_text = instruction + "\n" + source + "\n" + response + delimiter
/// + label. Verdict must be Good or Bad.
SuffixRecord build_suffix_record(const std::string& instruction, const std::string& source,
                                 const std::string& response, Verdict verdict,
                                 const SuffixConfig& config = {});

struct SuffixParts {
    std::string body;        // everything before the last delimiter
    std::string label_text;  // the label after it
};

/// Splits at the last delimiter occurrence; the tail must be one of the two
/// configured labels, otherwise a validation error is raised.
SuffixParts split_labeled_text(const std::string& labeled_text,
                               const SuffixConfig& config = {});

/// One kept example of the synthetic paired dataset.
struct PairedRecord {
    std::string task;
    std::string instruction;
    std::string source;
    std::string target;
    std::string seed;
    std::vector<std::string> votes;
};

struct DatagenOptions {
    GenerationParams gen_params;                      // hallucination sampling
    GenerationParams judge_params{0.7, 1, 256, false};  // per-vote sampling
    int judges = 3;
    std::string template_id = "default";
};

struct DatagenResult {
    std::vector<PairedRecord> kept;
    int generated = 0;  // triples parsed before judging
    int dropped_blocks = 0;
    int rejected = 0;  // judged but not unanimous
};

/// Full synthesis pipeline: hallucinate triples for every seed, judge each
/// with unanimous self-consistency, classify kept instructions. Output order
/// follows seed order, then candidate order; duplicates (source,
/// instruction) across the whole run are dropped.
DatagenResult run_datagen_pipeline(TextBackend& generator, TextBackend& judge,
                                   const std::vector<std::string>& seeds,
                                   const DatagenOptions& options = {});

/// Labeled suffix example per judged triple: good iff kept unanimously.
struct JudgedSuffixExample {
    SuffixRecord record;
    Verdict label = Verdict::Bad;
};

std::vector<JudgedSuffixExample> run_suffix_data_pipeline(
    TextBackend& generator, TextBackend& judge, const std::vector<std::string>& seeds,
    const DatagenOptions& options = {}, const SuffixConfig& suffix = {});

}  // namespace rewritekit
