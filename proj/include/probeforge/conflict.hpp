#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "probeforge/model.hpp"

namespace probeforge {

struct FactRecord {
    std::string subject;
    std::string relation;
    std::string true_value;      // parametric answer
    std::string conflict_value;  // injected contextual answer
    std::string domain = "custom";  // geography | tech | celebrity | sport | custom

    // Enforces true_value != conflict_value and a known domain.
    void validate() const;
};

// Named-placeholder templates; {statement} and {question} compose the
// injected prompt, which must end with the base question.
struct TemplateSet {
    std::string question;
    std::string conflict_statement;
    std::string injection;
};

// The geography defaults render the documented example prompt exactly.
TemplateSet default_templates();

struct ConflictProbe {
    std::string id;
    std::string base_question;
    std::string injected_prompt;
    std::string expected_parametric_text;
    std::string expected_contextual_text;
    std::vector<tok::TokenId> expected_parametric;
    std::vector<tok::TokenId> expected_contextual;
};

// Renders placeholders by name ({subject}, {true_value}, {conflict_value},
// {domain}; plus {statement}/{question} in the injection template). Unknown
// placeholders raise TemplateError, as does an injection template whose
// rendering does not end with the base question.
ConflictProbe build_probe(const FactRecord& fact, const TemplateSet& templates);

enum class Verdict { Parametric, Contextual, Other };
std::string verdict_name(Verdict v);

struct ProbeOutcome {
    std::string id;
    Verdict verdict = Verdict::Other;
    std::string output;
    bool overflow = false;
};

struct ProbeResult {
    std::vector<ProbeOutcome> per_probe;
    std::int64_t n_parametric = 0;
    std::int64_t n_contextual = 0;
    std::int64_t n_other = 0;

    std::int64_t total() const { return n_parametric + n_contextual + n_other; }
    double parametric_rate() const;
    double contextual_rate() const;
    double other_rate() const;
};

enum class PromptMode {
    Injected,  // run the conflict prompt (the default probe)
    Base,      // run the bare question, for controllability checks
};

// Greedy generation per probe; verdict by longest-prefix match of the
// whitespace-normalized output against the two expected answers. A probe
// that overflows the context window is counted as `other` with the
// overflow flag set instead of aborting the suite.
ProbeResult run_probe_suite(const Checkpoint& ckpt, std::span<const ConflictProbe> probes,
                            std::int64_t max_new, PromptMode mode = PromptMode::Injected);

// Verdict rule factored out for tests: longest matching prefix wins.
Verdict judge_output(const std::string& output, const std::string& expected_parametric,
                     const std::string& expected_contextual);

struct SweepRow {
    std::string label;
    std::optional<ProbeResult> result;
    std::string error;  // nonempty when this checkpoint failed
};

// One ProbeResult per labelled checkpoint; per-checkpoint failures are
// captured in the row instead of aborting the sweep.
std::vector<SweepRow> sweep_checkpoints(
    std::span<const std::pair<std::string, const Checkpoint*>> checkpoints,
    std::span<const ConflictProbe> probes, std::int64_t max_new,
    PromptMode mode = PromptMode::Injected);

// facts.jsonl parsing: one JSON object per line with subject, relation,
// true_value, conflict_value and optional domain fields.
std::vector<FactRecord> parse_fact_records(const std::string& jsonl_text);
TemplateSet parse_templates(const std::string& json_text);

}  // namespace probeforge
