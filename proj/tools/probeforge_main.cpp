// probeforge: command-line surface of the interpretability workbench.
// Exit codes: 0 success, 1 usage error, 2 data/config error, 3 internal.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "probeforge/attention_probes.hpp"
#include "probeforge/checkpoint_io.hpp"
#include "probeforge/conflict.hpp"
#include "probeforge/corpus.hpp"
#include "probeforge/errors.hpp"
#include "probeforge/ffn_probes.hpp"
#include "probeforge/model.hpp"
#include "probeforge/report.hpp"
#include "probeforge/schemas.hpp"
#include "probeforge/swap.hpp"
#include "probeforge/synth.hpp"
#include "probeforge/tokenizer.hpp"
#include "probeforge/util.hpp"
#include "probeforge/version.hpp"

namespace pf = probeforge;
using nlohmann::json;

namespace {

void write_payload(const std::string& path, const json& payload) {
    pf::util::atomic_write_file(path, pf::schemas::dump_json(payload, 2) + "\n");
}

void write_sidecar(const std::string& payload_path, const std::string& command,
                   std::vector<std::string> inputs) {
    pf::write_provenance_sidecar(payload_path, command, inputs);
}

std::optional<std::pair<std::int64_t, std::int64_t>> parse_layer_range(const std::string& text) {
    if (text.empty()) return std::nullopt;
    const std::size_t pos = text.find("..");
    if (pos == std::string::npos)
        throw pf::ConfigError("layer range must look like i..j, got '" + text + "'");
    try {
        const std::int64_t lo = std::stoll(text.substr(0, pos));
        const std::int64_t hi = std::stoll(text.substr(pos + 2));
        return std::make_pair(lo, hi);
    } catch (const std::exception&) {
        throw pf::ConfigError("layer range must look like i..j, got '" + text + "'");
    }
}

std::string read_prompt_file(const std::string& path) {
    std::string text = pf::util::read_file(path);
    if (!text.empty() && text.back() == '\n') text.pop_back();
    if (text.empty()) throw pf::InputError("prompt file is empty: " + path);
    return text;
}

std::vector<std::vector<pf::tok::TokenId>> read_prompt_lines(const std::string& path) {
    std::vector<std::vector<pf::tok::TokenId>> prompts;
    for (const std::string& line : pf::util::split(pf::util::read_file(path), '\n')) {
        if (line.empty()) continue;
        prompts.push_back(pf::tok::encode(line));
    }
    if (prompts.empty()) throw pf::InputError("no prompts found in " + path);
    return prompts;
}

// ---- subcommand bodies ----------------------------------------------------

struct SwapArgs {
    std::string recipient, donor, module, layers, out;
};

void run_swap(const SwapArgs& args) {
    const pf::Checkpoint recipient = pf::load_checkpoint(args.recipient);
    const pf::Checkpoint donor = pf::load_checkpoint(args.donor);
    pf::SwapSpec spec;
    spec.module_kind = pf::module_kind_from_name(args.module);
    spec.layer_range = parse_layer_range(args.layers);
    const pf::Checkpoint swapped = pf::swap_module(recipient, donor, spec);
    pf::save_checkpoint(swapped, args.out);
    std::cout << "wrote " << args.out << "\n";
}

struct RetrievalArgs {
    std::string ckpt, config, out;
};

void run_retrieval(const RetrievalArgs& args) {
    const pf::Checkpoint ckpt = pf::load_checkpoint(args.ckpt);
    json config_json;
    try {
        config_json = json::parse(pf::util::read_file(args.config));
    } catch (const json::exception& e) {
        throw pf::FormatError(std::string("needle config is not valid JSON: ") + e.what());
    }
    pf::NeedleConfig cfg = pf::schemas::needle_config_from_json(config_json);
    if (!config_json.contains("seed")) cfg.seed = pf::util::resolve_seed(std::nullopt, cfg.seed);
    const pf::RetrievalScoreMap map = pf::run_needle_suite(ckpt, cfg);
    write_payload(args.out, pf::schemas::retrieval_map_to_json(map, cfg));
    write_sidecar(args.out, "retrieval", {args.ckpt, args.config});
    std::cout << "wrote " << args.out << "\n";
}

struct EntropyArgs {
    std::string ckpt, prompt_file, marker = "####", out;
    std::int64_t max_new = 64;
};

void run_entropy(const EntropyArgs& args) {
    const pf::Checkpoint ckpt = pf::load_checkpoint(args.ckpt);
    const std::string prompt_text = read_prompt_file(args.prompt_file);

    pf::GenerateOptions opts;
    opts.trace = true;
    opts.answer_marker = pf::tok::encode(args.marker);
    const pf::GenerationOutput out =
        pf::generate_greedy(ckpt, pf::tok::encode(prompt_text), args.max_new, opts);
    const std::int64_t steps = static_cast<std::int64_t>(out.generated_tokens.size());
    if (steps == 0) throw pf::InputError("generation produced no steps; raise --max-new");

    // marker tokens themselves belong to the answering phase
    const std::int64_t split = out.answer_marker_index.value_or(steps);
    const pf::EntropyProfile profile = pf::attention_entropy(out.step_traces, split);

    const json echo{{"prompt_file", args.prompt_file},
                    {"marker", args.marker},
                    {"max_new", args.max_new}};
    write_payload(args.out, pf::schemas::entropy_profile_to_json(profile, echo, split, steps));
    write_sidecar(args.out, "entropy", {args.ckpt, args.prompt_file});
    std::cout << "wrote " << args.out << "\n";
}

struct FfnStatsArgs {
    std::string ckpt, prompts, out;
    double tau = 1e-3;
};

void run_ffn_stats(const FfnStatsArgs& args) {
    const pf::Checkpoint ckpt = pf::load_checkpoint(args.ckpt);
    const auto prompts = read_prompt_lines(args.prompts);
    const pf::ActivationStats stats = pf::collect_activation_stats(ckpt, prompts, args.tau);
    write_payload(args.out, pf::schemas::activation_stats_to_json(stats));
    write_sidecar(args.out, "ffn-stats", {args.ckpt, args.prompts});
    std::cout << "wrote " << args.out << "\n";
}

void run_ffn_stats_diff(const std::string& a_path, const std::string& b_path,
                        const std::string& out) {
    const pf::ActivationStats a =
        pf::schemas::activation_stats_from_json(json::parse(pf::util::read_file(a_path)));
    const pf::ActivationStats b =
        pf::schemas::activation_stats_from_json(json::parse(pf::util::read_file(b_path)));
    const std::vector<pf::LayerStatsDelta> deltas = pf::stats_profile_diff(a, b);

    std::string csv = "layer,d_mean,d_variance,d_sparsity\n";
    for (std::size_t l = 0; l < deltas.size(); ++l) {
        csv += std::to_string(l) + "," + pf::util::format_double(deltas[l].d_mean) + "," +
               pf::util::format_double(deltas[l].d_variance) + "," +
               pf::util::format_double(deltas[l].d_sparsity) + "\n";
    }
    pf::util::atomic_write_file(out, csv);
    write_sidecar(out, "ffn-stats diff", {a_path, b_path});
    std::cout << "wrote " << out << "\n";
}

struct ConflictArgs {
    std::string ckpt, facts, templates, out, table, mode = "injected";
    std::int64_t max_new = 16;
};

pf::PromptMode parse_mode(const std::string& mode) {
    if (mode == "injected") return pf::PromptMode::Injected;
    if (mode == "base") return pf::PromptMode::Base;
    throw pf::ConfigError("mode must be injected or base, got '" + mode + "'");
}

std::vector<pf::ConflictProbe> load_probes(const std::string& facts_path,
                                           const std::string& templates_path) {
    const pf::TemplateSet templates =
        templates_path.empty() ? pf::default_templates()
                               : pf::parse_templates(pf::util::read_file(templates_path));
    std::vector<pf::ConflictProbe> probes;
    for (const pf::FactRecord& fact : pf::parse_fact_records(pf::util::read_file(facts_path)))
        probes.push_back(pf::build_probe(fact, templates));
    if (probes.empty()) throw pf::InputError("no fact records in " + facts_path);
    return probes;
}

void run_conflict(const ConflictArgs& args) {
    const pf::Checkpoint ckpt = pf::load_checkpoint(args.ckpt);
    const auto probes = load_probes(args.facts, args.templates);
    const pf::ProbeResult result =
        pf::run_probe_suite(ckpt, probes, args.max_new, parse_mode(args.mode));
    write_payload(args.out, pf::schemas::probe_result_to_json(result));
    std::vector<std::string> inputs{args.ckpt, args.facts};
    if (!args.templates.empty()) inputs.push_back(args.templates);
    write_sidecar(args.out, "conflict", inputs);
    std::cout << "wrote " << args.out << "\n";
}

struct ConflictSweepArgs {
    std::string manifest, facts, templates, out, table, mode = "injected";
    std::int64_t max_new = 16;
};

void run_conflict_sweep(const ConflictSweepArgs& args) {
    json manifest;
    try {
        manifest = json::parse(pf::util::read_file(args.manifest));
    } catch (const json::exception& e) {
        throw pf::FormatError(std::string("sweep manifest is not valid JSON: ") + e.what());
    }
    std::vector<std::pair<std::string, pf::Checkpoint>> loaded;
    for (const json& entry : manifest) {
        loaded.emplace_back(entry.at("label").get<std::string>(),
                            pf::load_checkpoint(entry.at("path").get<std::string>()));
    }
    std::vector<std::pair<std::string, const pf::Checkpoint*>> refs;
    for (const auto& [label, ckpt] : loaded) refs.emplace_back(label, &ckpt);

    const auto probes = load_probes(args.facts, args.templates);
    const std::vector<pf::SweepRow> rows =
        pf::sweep_checkpoints(refs, probes, args.max_new, parse_mode(args.mode));
    write_payload(args.out, pf::schemas::sweep_rows_to_json(rows));

    if (!args.table.empty()) {
        const std::vector<std::string> columns{"parametric", "contextual", "other"};
        std::vector<std::pair<std::string, std::vector<double>>> table_rows;
        for (const pf::SweepRow& row : rows) {
            if (!row.result) continue;
            table_rows.emplace_back(row.label,
                                    std::vector<double>{row.result->parametric_rate(),
                                                        row.result->contextual_rate(),
                                                        row.result->other_rate()});
        }
        pf::util::atomic_write_file(args.table,
                                    pf::render_table_csv("label", columns, table_rows));
    }
    write_sidecar(args.out, "conflict sweep", {args.manifest, args.facts});
    std::cout << "wrote " << args.out << "\n";
}

struct MixArgs {
    std::string long_path, short_path, ratio = "1:1", out, report;
    std::int64_t budget = 0;
    std::int64_t threshold = 4096;
    std::optional<std::uint64_t> seed;
};

void run_mix(const MixArgs& args) {
    const std::vector<std::string> parts = pf::util::split(args.ratio, ':');
    if (parts.size() != 2)
        throw pf::ConfigError("ratio must look like LONG:SHORT, got '" + args.ratio + "'");
    pf::MixSpec spec;
    try {
        spec.long_parts = std::stoll(parts[0]);
        spec.short_parts = std::stoll(parts[1]);
    } catch (const std::exception&) {
        throw pf::ConfigError("ratio must be integer parts, got '" + args.ratio + "'");
    }
    spec.token_budget = args.budget;
    spec.length_threshold = args.threshold;
    spec.seed = pf::util::resolve_seed(args.seed, 0);

    const pf::Corpus long_corpus = pf::parse_jsonl_corpus(pf::util::read_file(args.long_path));
    const pf::Corpus short_corpus = pf::parse_jsonl_corpus(pf::util::read_file(args.short_path));
    const pf::MixResult result = pf::mix_corpora(long_corpus, short_corpus, spec);

    std::string stream;
    for (const std::string& line : result.lines) stream += line + "\n";
    pf::util::atomic_write_file(args.out, stream);
    if (!args.report.empty()) {
        write_payload(args.report, pf::schemas::mix_report_to_json(result.report, spec));
        write_sidecar(args.report, "mix", {args.long_path, args.short_path});
    }
    std::cout << "wrote " << args.out << "\n";
}

struct StatsArgs {
    std::string corpus, out;
    std::int64_t threshold = 4096;
};

void run_stats(const StatsArgs& args) {
    const pf::Corpus corpus = pf::parse_jsonl_corpus(pf::util::read_file(args.corpus));
    const pf::CorpusStats stats = pf::compute_corpus_stats(corpus);
    json payload = pf::schemas::corpus_stats_to_json(stats);
    std::int64_t long_count = 0;
    for (const pf::CorpusSample& s : corpus.samples)
        if (pf::classify_long_short(s.token_count, args.threshold) == pf::LengthClass::Long)
            ++long_count;
    payload["length_threshold"] = args.threshold;
    payload["long_samples"] = long_count;
    payload["short_samples"] = stats.sample_count - long_count;
    write_payload(args.out, payload);
    write_sidecar(args.out, "stats", {args.corpus});
    std::cout << "wrote " << args.out << "\n";
}

struct ReportArgs {
    std::string in, out, format = "svg", field = "matrix", title;
};

void run_report(const ReportArgs& args) {
    json payload;
    try {
        payload = json::parse(pf::util::read_file(args.in));
    } catch (const json::exception& e) {
        throw pf::FormatError(std::string("report input is not valid JSON: ") + e.what());
    }
    json matrix_json;
    if (payload.contains(args.field) && payload[args.field].is_object() &&
        payload[args.field].contains("matrix"))
        matrix_json = payload[args.field]["matrix"];  // entropy phases
    else if (payload.contains(args.field))
        matrix_json = payload[args.field];
    else
        throw pf::FormatError("report input has no field '" + args.field + "'");

    const pf::HeadMatrix matrix = pf::schemas::head_matrix_from_json(matrix_json);
    pf::HeatmapSpec spec;
    spec.n_rows = matrix.n_layers;
    spec.n_cols = matrix.n_heads;
    spec.values = matrix.values;
    spec.title = args.title;
    const pf::HeatmapFormat format =
        args.format == "csv" ? pf::HeatmapFormat::Csv : pf::HeatmapFormat::Svg;
    if (args.format != "csv" && args.format != "svg")
        throw pf::ConfigError("format must be svg or csv, got '" + args.format + "'");
    pf::emit_heatmap(spec, args.out, format);
    write_sidecar(args.out, "report", {args.in});
    std::cout << "wrote " << args.out << "\n";
}

struct CiArgs {
    std::string values, out;
    bool use_t = false;
};

void run_ci(const CiArgs& args) {
    std::vector<double> samples;
    for (const std::string& piece : pf::util::split(args.values, ',')) {
        if (piece.empty()) continue;
        try {
            samples.push_back(std::stod(piece));
        } catch (const std::exception&) {
            throw pf::InputError("--values entry is not a number: '" + piece + "'");
        }
    }
    const pf::RunStatistics stats = pf::confidence_interval(samples, args.use_t);
    const json payload = pf::schemas::run_statistics_to_json(stats);
    std::cout << pf::schemas::dump_json(payload, 2) << "\n";
    if (!args.out.empty()) write_payload(args.out, payload);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(pf::kToolName) + " " + pf::kToolVersion +
                 " - transformer interpretability workbench"};
    app.require_subcommand(1);

    SwapArgs swap_args;
    CLI::App* swap = app.add_subcommand("swap", "transplant a module between checkpoints");
    swap->add_option("--recipient", swap_args.recipient, "recipient checkpoint")->required();
    swap->add_option("--donor", swap_args.donor, "donor checkpoint")->required();
    swap->add_option("--module", swap_args.module, "module kind: mha or ffn")->required();
    swap->add_option("--layers", swap_args.layers, "inclusive layer range i..j (default: all)");
    swap->add_option("--out", swap_args.out, "output checkpoint path")->required();

    RetrievalArgs retrieval_args;
    CLI::App* retrieval =
        app.add_subcommand("retrieval", "per-head retrieval scores over a needle suite");
    retrieval->add_option("--ckpt", retrieval_args.ckpt, "checkpoint")->required();
    retrieval->add_option("--config", retrieval_args.config, "needle suite JSON config")->required();
    retrieval->add_option("--out", retrieval_args.out, "output scores JSON")->required();

    EntropyArgs entropy_args;
    CLI::App* entropy =
        app.add_subcommand("entropy", "phase-split attention entropy of one generation");
    entropy->add_option("--ckpt", entropy_args.ckpt, "checkpoint")->required();
    entropy->add_option("--prompt-file", entropy_args.prompt_file, "prompt text file")->required();
    entropy->add_option("--marker", entropy_args.marker, "answer marker (default ####)");
    entropy->add_option("--max-new", entropy_args.max_new, "decode budget (default 64)");
    entropy->add_option("--out", entropy_args.out, "output entropy JSON")->required();

    FfnStatsArgs ffn_args;
    std::string diff_a, diff_b, diff_out;
    CLI::App* ffn = app.add_subcommand("ffn-stats", "per-layer FFN activation statistics");
    ffn->add_option("--ckpt", ffn_args.ckpt, "checkpoint");
    ffn->add_option("--prompts", ffn_args.prompts, "prompt file, one per line");
    ffn->add_option("--tau", ffn_args.tau, "sparsity threshold on |activation| (default 1e-3)");
    ffn->add_option("--out", ffn_args.out, "output stats JSON");
    CLI::App* ffn_diff = ffn->add_subcommand("diff", "relative difference of two stats files");
    ffn_diff->add_option("a", diff_a, "stats JSON for the numerator model")->required();
    ffn_diff->add_option("b", diff_b, "baseline stats JSON")->required();
    ffn_diff->add_option("--out", diff_out, "output delta CSV")->required();

    ConflictArgs conflict_args;
    ConflictSweepArgs sweep_args;
    CLI::App* conflict = app.add_subcommand("conflict", "knowledge-conflict probing");
    conflict->add_option("--ckpt", conflict_args.ckpt, "checkpoint");
    conflict->add_option("--facts", conflict_args.facts, "fact records JSONL");
    conflict->add_option("--templates", conflict_args.templates, "template set JSON");
    conflict->add_option("--out", conflict_args.out, "output result JSON");
    conflict->add_option("--max-new", conflict_args.max_new, "decode budget (default 16)");
    conflict->add_option("--mode", conflict_args.mode, "injected (default) or base");
    CLI::App* sweep = conflict->add_subcommand("sweep", "probe several checkpoints");
    sweep->add_option("--manifest", sweep_args.manifest, "JSON [{label, path}, ...]")->required();
    sweep->add_option("--facts", sweep_args.facts, "fact records JSONL")->required();
    sweep->add_option("--templates", sweep_args.templates, "template set JSON");
    sweep->add_option("--out", sweep_args.out, "output sweep JSON")->required();
    sweep->add_option("--table", sweep_args.table, "optional rates CSV");
    sweep->add_option("--max-new", sweep_args.max_new, "decode budget (default 16)");
    sweep->add_option("--mode", sweep_args.mode, "injected (default) or base");

    MixArgs mix_args;
    CLI::App* mix = app.add_subcommand("mix", "deterministic long/short corpus mixing");
    mix->add_option("--long", mix_args.long_path, "long corpus JSONL")->required();
    mix->add_option("--short", mix_args.short_path, "short corpus JSONL")->required();
    mix->add_option("--ratio", mix_args.ratio, "long:short token ratio, e.g. 5:5")->required();
    mix->add_option("--budget", mix_args.budget, "token budget")->required();
    mix->add_option("--threshold", mix_args.threshold, "long/short token threshold (default 4096)");
    std::uint64_t mix_seed_value = 0;
    CLI::Option* mix_seed =
        mix->add_option("--seed", mix_seed_value, "mix seed (falls back to PROBE_FORGE_SEED)");
    mix->add_option("--out", mix_args.out, "output mixed JSONL")->required();
    mix->add_option("--report", mix_args.report, "achieved-ratio report JSON");

    StatsArgs stats_args;
    CLI::App* stats = app.add_subcommand("stats", "corpus statistics");
    stats->add_option("--corpus", stats_args.corpus, "corpus JSONL")->required();
    stats->add_option("--threshold", stats_args.threshold,
                      "long/short token threshold (default 4096)");
    stats->add_option("--out", stats_args.out, "output stats JSON")->required();

    ReportArgs report_args;
    CLI::App* report = app.add_subcommand("report", "render a heatmap from a scores file");
    report->add_option("--in", report_args.in, "scores/entropy JSON")->required();
    report->add_option("--out", report_args.out, "output file (.svg or .csv)")->required();
    report->add_option("--format", report_args.format, "svg (default) or csv");
    report->add_option("--field", report_args.field,
                       "payload field holding the matrix (default: matrix; use reasoning or "
                       "answering for entropy files)");
    report->add_option("--title", report_args.title, "heatmap title");

    CiArgs ci_args;
    CLI::App* ci = app.add_subcommand("ci", "mean/std/95% CI of repeated runs");
    ci->add_option("--values", ci_args.values, "comma-separated samples")->required();
    ci->add_flag("--t-dist", ci_args.use_t, "use Student-t quantiles instead of 1.96");
    ci->add_option("--out", ci_args.out, "optional output JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        // suggest the nearest subcommand for a misspelled name
        std::string extra;
        if (const auto& rem = app.remaining(); !rem.empty() && rem.front()[0] != '-')
            extra = rem.front();
        app.exit(e);
        if (!extra.empty()) {
            std::size_t best = SIZE_MAX;
            std::string suggestion;
            for (const CLI::App* sub : app.get_subcommands({})) {
                const std::size_t d = pf::util::edit_distance(extra, sub->get_name());
                if (d < best) {
                    best = d;
                    suggestion = sub->get_name();
                }
            }
            if (!suggestion.empty() && best <= 3)
                std::cerr << "unknown subcommand '" << extra << "'; did you mean '" << suggestion
                          << "'?\n";
        }
        return 1;
    }

    try {
        if (swap->parsed()) run_swap(swap_args);
        if (retrieval->parsed()) run_retrieval(retrieval_args);
        if (entropy->parsed()) run_entropy(entropy_args);
        if (ffn->parsed()) {
            if (ffn_diff->parsed()) {
                run_ffn_stats_diff(diff_a, diff_b, diff_out);
            } else {
                if (ffn_args.ckpt.empty() || ffn_args.prompts.empty() || ffn_args.out.empty()) {
                    std::cerr << "ffn-stats requires --ckpt, --prompts and --out (or the diff "
                                 "subcommand)\n";
                    return 1;
                }
                run_ffn_stats(ffn_args);
            }
        }
        if (conflict->parsed()) {
            if (sweep->parsed()) {
                run_conflict_sweep(sweep_args);
            } else {
                if (conflict_args.ckpt.empty() || conflict_args.facts.empty() ||
                    conflict_args.out.empty()) {
                    std::cerr << "conflict requires --ckpt, --facts and --out (or the sweep "
                                 "subcommand)\n";
                    return 1;
                }
                run_conflict(conflict_args);
            }
        }
        if (mix->parsed()) {
            if (mix_seed->count() > 0) mix_args.seed = mix_seed_value;
            run_mix(mix_args);
        }
        if (stats->parsed()) run_stats(stats_args);
        if (report->parsed()) run_report(report_args);
        if (ci->parsed()) run_ci(ci_args);
    } catch (const pf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
