// Synthetic-data pipeline: hallucinated paired data, chain-of-thought
// critique filtering, task classification, suffix-record emission.

#include "rewritekit/datagen.hpp"

#include <optional>
#include <set>
#include <utility>

#include "rewritekit/errors.hpp"
#include "rewritekit/textcore.hpp"

namespace rewritekit {

namespace {

// Few-shot prompt whose continuation invents Source/Rewrite/Prompt blocks
// for a fresh query. Exemplars cover distinct rewrite styles so sampled
// continuations vary in task.
const char* kHallucinationTemplate =
    "Below are examples of message rewriting data. Each example starts from a short\n"
    "query and invents a plausible Source message, a Rewrite of it, and the Prompt\n"
    "that asks for that rewrite.\n"
    "\n"
    "Query: apology for missing standup\n"
    "Source: hey sorry i missed standup this morning, my alarm didnt go off\n"
    "Rewrite: I apologize for missing this morning's standup; my alarm did not go off.\n"
    "Prompt: Make this message more formal.\n"
    "\n"
    "Query: weekend plans with friends\n"
    "Source: we are thinking about maybe going to the lake this weekend if the weather holds up and everyone is free to come along\n"
    "Rewrite: Lake trip this weekend if the weather holds - who's in?\n"
    "Prompt: Make the text shorter.\n"
    "\n"
    "Query: thanks for the birthday gift\n"
    "Source: thanks for the gift\n"
    "Rewrite: Thank you so much for the thoughtful birthday gift; it truly made my day.\n"
    "Prompt: Make the text more elaborated.\n"
    "\n"
    "Query: {query}\n"
    "Source:";

// Verbatim few-shot chain-of-thought judge prompt; {comment}, {input} and
// {output_best} are filled per call.
const char* kCritiqueTemplate =
    "Judge whether the #Response rephrases #Context and complete the rewriting task in #Comment. Choose among two choices: GOOD, BAD.\n"
    "\n"
    "#Comment: Make the text more formal.\n"
    "#Context: Do we want to go to movie now? This one should be pretty good.\n"
    "#Response: Want to go to movie? It should be a great one.\n"
    "#Choose (GOOD) or (BAD): BAD\n"
    "#Explanation: Response is not more formal than Context.\n"
    "\n"
    "#Comment: Simplify the text.\n"
    "#Context: Ric Flair had a match against Mitch of the Spirit Squad. All five members of the Spirit Squad were present, so Flair brought out Rowdy Roddy Piper, Money Inc., and Arn Anderson as his backup. Flair's allies kept the Squad in check, enabling Flair to win the match.\n"
    "#Response: Ric Flair defeated Mitch of the Spirit Squad with help from Rowdy Roddy Piper, Money Inc., and Arn Anderson.\n"
    "#Choose (GOOD) or (BAD): GOOD\n"
    "#Explanation: Response is shorter than Context Response preserves overall meaning.\n"
    "\n"
    "#Comment: Elaborate the following text.\n"
    "#Context: Iuter X Vanguard collaboration T-shirt by Giorgio Di Salvo. Octopus print. All Iuter apparel is Made in Italy.\n"
    "#Response: This T-shirt is part of the collaboration between Iuter and Vanguard. It is designed by Giorgio Di Salvo and features an octopus print. All Iuter apparel is Made in Italy.\n"
    "#Choose (GOOD) or (BAD): GOOD\n"
    "#Explanation: Response rephrases and elaborates the context with preserved meaning.\n"
    "\n"
    "#Comment: Paraphrase the source text.\n"
    "#Context: He likes the dogs a lot, according to his parents.\n"
    "#Response: He is fond of the dogs.\n"
    "#Choose (GOOD) or (BAD): BAD\n"
    "#Explanation: Response did not preserve all the meaning of Context. The fact \"according to his parents\" is missing in Response.\n"
    "\n"
    "#Comment: Fix the grammar and spelling error if there is any.\n"
    "#Context: Native is very fortunate.\n"
    "#Response: Native people are very fortunate.\n"
    "#Choose (GOOD) or (BAD): GOOD\n"
    "#Explanation: Response fix the grammar errors in the Context.\n"
    "\n"
    "#Comment: {comment}\n"
    "#Context: {input}\n"
    "#Response: {output_best}\n"
    "#Choose (GOOD) or (BAD):";

// Few-shot instruction-to-task prompt built from the benchmark's published
// instruction examples.
const char* kClassifyTemplate =
    "Classify each rewrite instruction into exactly one task: formalize, shorten,\n"
    "elaborate, paraphrase, proofread.\n"
    "\n"
    "Instruction: Make the text formal.\n"
    "Task: formalize\n"
    "Instruction: Rewrite this sentence in a more formal way.\n"
    "Task: formalize\n"
    "Instruction: Make the text more concise.\n"
    "Task: shorten\n"
    "Instruction: Make the text shorter.\n"
    "Task: shorten\n"
    "Instruction: Make this more verbose.\n"
    "Task: elaborate\n"
    "Instruction: Make the text more elaborated.\n"
    "Task: elaborate\n"
    "Instruction: Rewrite this sentence.\n"
    "Task: paraphrase\n"
    "Instruction: Paraphrase the following text.\n"
    "Task: paraphrase\n"
    "Instruction: Fix the grammar error or spelling error of the following text.\n"
    "Task: proofread\n"
    "Instruction: Please proofread this sentence.\n"
    "Task: proofread\n"
    "\n"
    "Instruction: {instruction}\n"
    "Task:";

bool is_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_';
}

std::size_t find_standalone(const std::string& text, const std::string& word,
                            std::size_t limit) {
    std::size_t pos = 0;
    while (pos < limit && (pos = text.find(word, pos)) != std::string::npos &&
           pos < limit) {
        bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
        std::size_t end = pos + word.size();
        bool right_ok = end >= text.size() || !is_word_char(text[end]);
        if (left_ok && right_ok) return pos;
        ++pos;
    }
    return std::string::npos;
}

std::string ascii_lower_copy(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

enum class LineLabel { None, Source, Rewrite, Prompt, Query };

// Detects a leading "source:"/"rewrite:"/"prompt:"/"query:" label
// (case-insensitive, after optional indentation) and returns the remainder.
LineLabel match_label(const std::string& line, std::string* value) {
    std::size_t at = line.find_first_not_of(" \t");
    if (at == std::string::npos) return LineLabel::None;
    static constexpr std::pair<const char*, LineLabel> kLabels[] = {
        {"source:", LineLabel::Source},
        {"rewrite:", LineLabel::Rewrite},
        {"prompt:", LineLabel::Prompt},
        {"query:", LineLabel::Query},
    };
    for (const auto& [name, label] : kLabels) {
        std::size_t len = std::string(name).size();
        if (line.size() - at < len) continue;
        bool match = true;
        for (std::size_t i = 0; i < len; ++i) {
            char c = line[at + i];
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            if (c != name[i]) {
                match = false;
                break;
            }
        }
        if (match) {
            *value = line.substr(at + len);
            return label;
        }
    }
    return LineLabel::None;
}

struct BlockAccumulator {
    std::optional<std::string> source;
    std::optional<std::string> rewrite;
    std::optional<std::string> prompt;
    std::string query;
    std::string raw;
    std::optional<std::string>* last_field = nullptr;

    bool any() const { return source || rewrite || prompt; }
    bool has(LineLabel label) const {
        switch (label) {
            case LineLabel::Source: return source.has_value();
            case LineLabel::Rewrite: return rewrite.has_value();
            case LineLabel::Prompt: return prompt.has_value();
            default: return false;
        }
    }
};

bool starts_with_label(const std::string& text) {
    std::size_t line_end = text.find('\n');
    std::string first = text.substr(0, line_end);
    std::string unused;
    return match_label(first, &unused) != LineLabel::None;
}

std::optional<RewriteTask> parse_task_label(const std::string& reply) {
    std::string low = ascii_lower_copy(reply);
    std::optional<RewriteTask> best;
    std::size_t best_pos = std::string::npos;
    for (RewriteTask task : kAllTasks) {
        std::size_t pos = find_standalone(low, task_name(task), low.size());
        if (pos != std::string::npos && pos < best_pos) {
            best_pos = pos;
            best = task;
        }
    }
    return best;
}

// Deterministic keyword rule for the scriptless mock; checked in an order
// where the more specific cue wins (e.g. "rewrite ... formal" is formalize).
RewriteTask classify_by_keywords(const std::string& instruction) {
    std::string low = ascii_lower_copy(instruction);
    auto has = [&](const char* word) { return low.find(word) != std::string::npos; };
    if (has("formal")) return RewriteTask::Formalize;
    if (has("concise") || has("shorter") || has("shorten") || has("condense")) {
        return RewriteTask::Shorten;
    }
    if (has("verbose") || has("expand") || has("elaborat") || has("longer")) {
        return RewriteTask::Elaborate;
    }
    if (has("proofread") || has("grammar") || has("spelling") || has("correct")) {
        return RewriteTask::Proofread;
    }
    // Generic rewording bucket, matching the benchmark's own catch-all.
    return RewriteTask::Paraphrase;
}

}  // namespace

const char* verdict_name(Verdict verdict) {
    switch (verdict) {
        case Verdict::Good: return "GOOD";
        case Verdict::Bad: return "BAD";
        case Verdict::Unparseable: return "UNPARSEABLE";
    }
    return "UNPARSEABLE";
}

std::string fill_template(const std::string& tpl,
                          const std::map<std::string, std::string>& values) {
    // Placeholders are validated against the raw template first, so braces
    // inside substituted user text can never trigger a false error.
    for (std::size_t at = tpl.find('{'); at != std::string::npos;
         at = tpl.find('{', at + 1)) {
        std::size_t close = tpl.find('}', at + 1);
        if (close == std::string::npos) break;
        std::string name = tpl.substr(at + 1, close - at - 1);
        bool plausible = !name.empty();
        for (char c : name) {
            if (!((c >= 'a' && c <= 'z') || c == '_')) plausible = false;
        }
        if (plausible && values.find(name) == values.end()) {
            throw errors::template_error("unfilled placeholder {" + name + "}");
        }
    }

    std::string out = tpl;
    for (const auto& [name, value] : values) {
        std::string needle = "{" + name + "}";
        std::size_t pos = 0;
        while ((pos = out.find(needle, pos)) != std::string::npos) {
            out.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    return out;
}

std::vector<std::string> hallucination_template_ids() { return {"default"}; }

std::string build_hallucination_prompt(const std::string& seed_query,
                                       const std::string& template_id) {
    if (seed_query.empty()) {
        throw errors::invalid_argument("seed query must be non-empty");
    }
    if (template_id != "default") {
        throw errors::invalid_argument("unknown hallucination template: " + template_id);
    }
    return fill_template(kHallucinationTemplate, {{"query", seed_query}});
}

TripleParse parse_hallucinated_triples(const std::string& continuation) {
    TripleParse result;
    std::set<std::pair<std::string, std::string>> seen;
    BlockAccumulator block;
    std::string pending_query;

    auto close_block = [&] {
        if (block.any()) {
            GeneratedTriple triple;
            triple.seed_query = block.query;
            triple.raw_block = block.raw;
            bool complete = block.source && block.rewrite && block.prompt;
            if (complete) {
                triple.source = trim(*block.source);
                triple.rewrite = trim(*block.rewrite);
                triple.instruction = trim(*block.prompt);
            }
            if (complete && !triple.source.empty() && !triple.rewrite.empty() &&
                !triple.instruction.empty() && triple.source != triple.rewrite) {
                if (seen.emplace(triple.source, triple.instruction).second) {
                    result.triples.push_back(std::move(triple));
                }
            } else {
                ++result.dropped;
            }
        }
        block = BlockAccumulator{};
        block.query = pending_query;
    };

    std::size_t start = 0;
    while (start <= continuation.size()) {
        std::size_t end = continuation.find('\n', start);
        if (end == std::string::npos) end = continuation.size();
        std::string line = continuation.substr(start, end - start);
        start = end + 1;

        std::string value;
        LineLabel label = match_label(line, &value);
        if (label == LineLabel::Query) {
            pending_query = trim(value);
            close_block();
        } else if (label != LineLabel::None) {
            if (block.has(label)) close_block();
            std::optional<std::string>* field = nullptr;
            switch (label) {
                case LineLabel::Source: field = &block.source; break;
                case LineLabel::Rewrite: field = &block.rewrite; break;
                case LineLabel::Prompt: field = &block.prompt; break;
                default: break;
            }
            *field = value;
            block.last_field = field;
            if (!block.raw.empty()) block.raw += '\n';
            block.raw += line;
        } else if (block.last_field != nullptr && block.any()) {
            // Continuation line of the current field.
            **block.last_field += '\n';
            **block.last_field += line;
            block.raw += '\n';
            block.raw += line;
        }
        if (end == continuation.size()) break;
    }
    close_block();
    return result;
}

std::string format_triple_block(const GeneratedTriple& triple) {
    return "Source: " + triple.source + "\nRewrite: " + triple.rewrite + "\nPrompt: " +
           triple.instruction + "\n";
}

std::string build_critique_prompt(const std::string& instruction, const std::string& source,
                                  const std::string& response) {
    if (instruction.empty() || source.empty() || response.empty()) {
        throw errors::invalid_argument("critique prompt needs instruction, source, response");
    }
    return fill_template(kCritiqueTemplate, {{"comment", instruction},
                                             {"input", source},
                                             {"output_best", response}});
}

Verdict parse_verdict(const std::string& judge_output) {
    std::size_t limit = judge_output.find("#Explanation");
    if (limit == std::string::npos) limit = judge_output.size();
    std::size_t good_at = find_standalone(judge_output, "GOOD", limit);
    std::size_t bad_at = find_standalone(judge_output, "BAD", limit);
    if (good_at == std::string::npos && bad_at == std::string::npos) {
        return Verdict::Unparseable;
    }
    if (good_at == std::string::npos) return Verdict::Bad;
    if (bad_at == std::string::npos) return Verdict::Good;
    return good_at < bad_at ? Verdict::Good : Verdict::Bad;
}

FilterOutcome self_consistency_filter(const GeneratedTriple& triple, TextBackend& judge,
                                      int k, const GenerationParams& params) {
    if (k < 1) throw errors::invalid_argument("self-consistency needs k >= 1 judges");
    std::string prompt = build_critique_prompt(triple.instruction, triple.source,
                                               triple.rewrite);
    GenerationParams vote_params = params;
    vote_params.num_samples = k;
    std::vector<CandidateResponse> outputs = judge.generate(prompt, vote_params);

    FilterOutcome outcome;
    bool all_good = true;
    bool all_unparseable = true;
    for (const auto& output : outputs) {
        Verdict vote = parse_verdict(output.text);
        outcome.verdict.votes.push_back(vote);
        if (vote != Verdict::Good) all_good = false;
        if (vote != Verdict::Unparseable) all_unparseable = false;
        if (!outcome.verdict.explanation) {
            std::size_t at = output.text.find("#Explanation");
            if (at != std::string::npos) {
                std::string text = output.text.substr(at + std::string("#Explanation").size());
                if (!text.empty() && text.front() == ':') text.erase(text.begin());
                outcome.verdict.explanation = trim(text);
            }
        }
    }
    outcome.keep = all_good && !outcome.verdict.votes.empty();
    if (outcome.keep) {
        outcome.verdict.label = Verdict::Good;
    } else {
        outcome.verdict.label = all_unparseable ? Verdict::Unparseable : Verdict::Bad;
    }
    return outcome;
}

RewriteTask classify_task(const std::string& instruction, TextBackend& backend) {
    if (instruction.empty()) {
        throw errors::invalid_argument("classify_task needs a non-empty instruction");
    }
    std::string prompt = fill_template(kClassifyTemplate, {{"instruction", instruction}});

    // Offline mock without a scripted reply: fall back to the keyword rule
    // so the pipeline stays runnable without any model.
    if (auto* mock = dynamic_cast<MockBackend*>(&backend);
        mock != nullptr && !mock->has_script_for(prompt)) {
        return classify_by_keywords(instruction);
    }

    GenerationParams params;
    params.temperature = 0.0;
    params.num_samples = 1;
    params.max_tokens = 8;
    params.logprobs = false;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::vector<CandidateResponse> replies = backend.generate(prompt, params);
        if (auto task = parse_task_label(replies.front().text)) return *task;
    }
    throw errors::classification("no task label parsed for instruction: " + instruction);
}

SuffixRecord build_suffix_record(const std::string& instruction, const std::string& source,
                                 const std::string& response, Verdict verdict,
                                 const SuffixConfig& config) {
    if (verdict == Verdict::Unparseable) {
        throw errors::invalid_argument("suffix record needs a GOOD or BAD verdict");
    }
    config.validate();
    SuffixRecord record;
    record.input_text = instruction + "\n" + source;
    record.response = response;
    record.labeled_text = record.input_text + "\n" + response + config.delimiter +
                          (verdict == Verdict::Good ? config.good_label : config.bad_label);
    return record;
}

SuffixParts split_labeled_text(const std::string& labeled_text, const SuffixConfig& config) {
    config.validate();
    std::size_t at = labeled_text.rfind(config.delimiter);
    if (at == std::string::npos) {
        throw errors::validation("labeled text does not contain the suffix delimiter");
    }
    SuffixParts parts;
    parts.body = labeled_text.substr(0, at);
    parts.label_text = labeled_text.substr(at + config.delimiter.size());
    if (parts.label_text != config.good_label && parts.label_text != config.bad_label) {
        throw errors::validation("labeled text does not end in a known label");
    }
    return parts;
}

namespace {

struct JudgedTriple {
    GeneratedTriple triple;
    FilterOutcome outcome;
};

// Shared front half of both pipelines: hallucinate, parse, dedup, judge.
std::vector<JudgedTriple> generate_and_judge(TextBackend& generator, TextBackend& judge,
                                             const std::vector<std::string>& seeds,
                                             const DatagenOptions& options,
                                             DatagenResult* counts) {
    if (options.judges < 1) {
        throw errors::invalid_argument("datagen needs at least one judge vote");
    }
    std::vector<JudgedTriple> judged;
    std::set<std::pair<std::string, std::string>> seen;
    for (const std::string& seed : seeds) {
        std::string prompt = build_hallucination_prompt(seed, options.template_id);
        std::vector<CandidateResponse> continuations =
            generator.generate(prompt, options.gen_params);
        for (const auto& continuation : continuations) {
            // The prompt ends with "Source:", so a continuation normally
            // starts mid-block; restore the label unless one is present.
            std::string parse_input = starts_with_label(continuation.text)
                                          ? continuation.text
                                          : "Source:" + continuation.text;
            TripleParse parsed = parse_hallucinated_triples(parse_input);
            counts->dropped_blocks += parsed.dropped;
            for (GeneratedTriple& triple : parsed.triples) {
                if (triple.seed_query.empty()) triple.seed_query = seed;
                if (!seen.emplace(triple.source, triple.instruction).second) continue;
                ++counts->generated;
                JudgedTriple jt;
                jt.outcome = self_consistency_filter(triple, judge, options.judges,
                                                     options.judge_params);
                jt.triple = std::move(triple);
                judged.push_back(std::move(jt));
            }
        }
    }
    return judged;
}

}  // namespace

DatagenResult run_datagen_pipeline(TextBackend& generator, TextBackend& judge,
                                   const std::vector<std::string>& seeds,
                                   const DatagenOptions& options) {
    DatagenResult result;
    for (auto& jt : generate_and_judge(generator, judge, seeds, options, &result)) {
        if (!jt.outcome.keep) {
            ++result.rejected;
            continue;
        }
        PairedRecord record;
        record.task = task_name(classify_task(jt.triple.instruction, generator));
        record.instruction = jt.triple.instruction;
        record.source = jt.triple.source;
        record.target = jt.triple.rewrite;
        record.seed = jt.triple.seed_query;
        for (Verdict vote : jt.outcome.verdict.votes) {
            record.votes.push_back(verdict_name(vote));
        }
        result.kept.push_back(std::move(record));
    }
    return result;
}

std::vector<JudgedSuffixExample> run_suffix_data_pipeline(
    TextBackend& generator, TextBackend& judge, const std::vector<std::string>& seeds,
    const DatagenOptions& options, const SuffixConfig& suffix) {
    DatagenResult counts;
    std::vector<JudgedSuffixExample> out;
    for (const auto& jt : generate_and_judge(generator, judge, seeds, options, &counts)) {
        JudgedSuffixExample example;
        example.label = jt.outcome.keep ? Verdict::Good : Verdict::Bad;
        example.record = build_suffix_record(jt.triple.instruction, jt.triple.source,
                                             jt.triple.rewrite, example.label, suffix);
        out.push_back(std::move(example));
    }
    return out;
}

}  // namespace rewritekit
