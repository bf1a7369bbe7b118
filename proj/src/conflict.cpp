#include "probeforge/conflict.hpp"

#include <map>

#include <nlohmann/json.hpp>

#include "probeforge/errors.hpp"
#include "probeforge/tokenizer.hpp"
#include "probeforge/util.hpp"

namespace probeforge {

using nlohmann::json;

namespace {

const char* kDomains[] = {"geography", "tech", "celebrity", "sport", "custom"};

std::string render(const std::string& tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const std::size_t close = tmpl.find('}', i);
            if (close == std::string::npos)
                throw TemplateError("unterminated placeholder in template: ..." + tmpl.substr(i));
            const std::string name = tmpl.substr(i + 1, close - i - 1);
            auto it = values.find(name);
            if (it == values.end())
                throw TemplateError("template references unknown placeholder {" + name + "}");
            out += it->second;
            i = close + 1;
        } else {
            out.push_back(tmpl[i]);
            ++i;
        }
    }
    return out;
}

}  // namespace

void FactRecord::validate() const {
    if (subject.empty()) throw InputError("fact record has an empty subject");
    if (true_value.empty() || conflict_value.empty())
        throw InputError("fact record has an empty value");
    if (true_value == conflict_value)
        throw InputError("fact record for '" + subject +
                         "' has identical true and conflict values");
    for (const char* d : kDomains)
        if (domain == d) return;
    throw InputError("fact record for '" + subject + "' has unknown domain '" + domain + "'");
}

TemplateSet default_templates() {
    TemplateSet t;
    t.question = "Is the city of {subject} in {true_value}?";
    t.conflict_statement = "{subject} is a new city in the {conflict_value}.";
    t.injection = "You should know the new {domain} knowledge: {statement} {question}";
    return t;
}

ConflictProbe build_probe(const FactRecord& fact, const TemplateSet& templates) {
    fact.validate();

    const std::map<std::string, std::string> fields = {
        {"subject", fact.subject},
        {"relation", fact.relation},
        {"true_value", fact.true_value},
        {"conflict_value", fact.conflict_value},
        {"domain", fact.domain},
    };

    ConflictProbe probe;
    probe.id = fact.domain + "/" + fact.subject;
    probe.base_question = render(templates.question, fields);

    auto with_composites = fields;
    with_composites["statement"] = render(templates.conflict_statement, fields);
    with_composites["question"] = probe.base_question;
    probe.injected_prompt = render(templates.injection, with_composites);

    if (probe.injected_prompt.size() < probe.base_question.size() ||
        probe.injected_prompt.compare(probe.injected_prompt.size() - probe.base_question.size(),
                                      probe.base_question.size(), probe.base_question) != 0)
        throw TemplateError("injection template must end with {question} so the base question "
                            "is a suffix of the injected prompt");

    probe.expected_parametric_text = fact.true_value;
    probe.expected_contextual_text = fact.conflict_value;
    probe.expected_parametric = tok::encode(fact.true_value);
    probe.expected_contextual = tok::encode(fact.conflict_value);
    return probe;
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Parametric: return "parametric";
        case Verdict::Contextual: return "contextual";
        case Verdict::Other: return "other";
    }
    throw ConfigError("invalid verdict value");
}

Verdict judge_output(const std::string& output, const std::string& expected_parametric,
                     const std::string& expected_contextual) {
    const std::string out = util::normalize_whitespace(output);
    const std::string par = util::normalize_whitespace(expected_parametric);
    const std::string ctx = util::normalize_whitespace(expected_contextual);
    const bool par_match = !par.empty() && out.starts_with(par);
    const bool ctx_match = !ctx.empty() && out.starts_with(ctx);
    if (par_match && ctx_match)
        return par.size() >= ctx.size() ? Verdict::Parametric : Verdict::Contextual;
    if (par_match) return Verdict::Parametric;
    if (ctx_match) return Verdict::Contextual;
    return Verdict::Other;
}

double ProbeResult::parametric_rate() const {
    return total() == 0 ? 0.0 : static_cast<double>(n_parametric) / static_cast<double>(total());
}
double ProbeResult::contextual_rate() const {
    return total() == 0 ? 0.0 : static_cast<double>(n_contextual) / static_cast<double>(total());
}
double ProbeResult::other_rate() const {
    return total() == 0 ? 0.0 : static_cast<double>(n_other) / static_cast<double>(total());
}

ProbeResult run_probe_suite(const Checkpoint& ckpt, std::span<const ConflictProbe> probes,
                            std::int64_t max_new, PromptMode mode) {
    if (probes.empty()) throw InputError("run_probe_suite: no probes");

    ProbeResult result;
    for (const ConflictProbe& probe : probes) {
        const std::string& text =
            mode == PromptMode::Injected ? probe.injected_prompt : probe.base_question;
        const std::vector<tok::TokenId> prompt = tok::encode(text);

        ProbeOutcome outcome;
        outcome.id = probe.id;
        try {
            GenerateOptions opts;
            opts.trace = false;
            const GenerationOutput gen = generate_greedy(ckpt, prompt, max_new, opts);
            outcome.output = tok::decode(gen.generated_tokens);
            outcome.verdict = judge_output(outcome.output, probe.expected_parametric_text,
                                           probe.expected_contextual_text);
        } catch (const CapacityError&) {
            outcome.verdict = Verdict::Other;
            outcome.overflow = true;
        }
        switch (outcome.verdict) {
            case Verdict::Parametric: ++result.n_parametric; break;
            case Verdict::Contextual: ++result.n_contextual; break;
            case Verdict::Other: ++result.n_other; break;
        }
        result.per_probe.push_back(std::move(outcome));
    }
    return result;
}

std::vector<SweepRow> sweep_checkpoints(
    std::span<const std::pair<std::string, const Checkpoint*>> checkpoints,
    std::span<const ConflictProbe> probes, std::int64_t max_new, PromptMode mode) {
    std::vector<SweepRow> rows;
    for (const auto& [label, ckpt] : checkpoints) {
        SweepRow row;
        row.label = label;
        try {
            row.result = run_probe_suite(*ckpt, probes, max_new, mode);
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<FactRecord> parse_fact_records(const std::string& jsonl_text) {
    std::vector<FactRecord> facts;
    std::int64_t line_no = 0;
    for (const std::string& line : util::split(jsonl_text, '\n')) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
            FactRecord fact;
            fact.subject = j.at("subject").get<std::string>();
            fact.relation = j.value("relation", std::string("fact"));
            fact.true_value = j.at("true_value").get<std::string>();
            fact.conflict_value = j.at("conflict_value").get<std::string>();
            fact.domain = j.value("domain", std::string("custom"));
            fact.validate();
            facts.push_back(std::move(fact));
        } catch (const json::exception& e) {
            throw FormatError("facts line " + std::to_string(line_no) + " invalid: " + e.what());
        }
    }
    return facts;
}

TemplateSet parse_templates(const std::string& json_text) {
    try {
        const json j = json::parse(json_text);
        TemplateSet t = default_templates();
        if (j.contains("question")) t.question = j.at("question").get<std::string>();
        if (j.contains("conflict_statement"))
            t.conflict_statement = j.at("conflict_statement").get<std::string>();
        if (j.contains("injection")) t.injection = j.at("injection").get<std::string>();
        return t;
    } catch (const json::exception& e) {
        throw FormatError(std::string("templates file invalid: ") + e.what());
    }
}

}  // namespace probeforge
