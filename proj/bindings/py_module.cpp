// Python bindings for the workbench core. Structured results cross the
// boundary as JSON strings; the package __init__ decodes them into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

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
#include "probeforge/version.hpp"

namespace py = pybind11;
using namespace probeforge;
using nlohmann::json;

namespace {

std::vector<std::vector<float>> logits_rows(const Tensor& logits) {
    std::vector<std::vector<float>> rows;
    rows.reserve(static_cast<std::size_t>(logits.rows()));
    for (std::int64_t i = 0; i < logits.rows(); ++i)
        rows.emplace_back(logits.data.begin() + i * logits.cols(),
                          logits.data.begin() + (i + 1) * logits.cols());
    return rows;
}

json generation_to_json(const GenerationOutput& out) {
    json j{{"prompt_tokens", out.prompt_tokens},
           {"generated_tokens", out.generated_tokens},
           {"text", tok::decode(out.generated_tokens)}};
    if (out.answer_marker_index) j["answer_marker_index"] = *out.answer_marker_index;
    return j;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "transformer interpretability workbench core";
    m.attr("__version__") = kToolVersion;

    py::register_exception<Error>(m, "WorkbenchError");

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("n_layers", &ModelConfig::n_layers)
        .def_readwrite("n_heads", &ModelConfig::n_heads)
        .def_readwrite("d_model", &ModelConfig::d_model)
        .def_readwrite("d_head", &ModelConfig::d_head)
        .def_readwrite("d_ffn", &ModelConfig::d_ffn)
        .def_readwrite("vocab_size", &ModelConfig::vocab_size)
        .def_readwrite("rope_base", &ModelConfig::rope_base)
        .def_readwrite("use_norm", &ModelConfig::use_norm)
        .def_readwrite("max_seq_len", &ModelConfig::max_seq_len)
        .def_property(
            "activation",
            [](const ModelConfig& c) { return activation_name(c.activation); },
            [](ModelConfig& c, const std::string& name) {
                c.activation = activation_from_name(name);
            })
        .def("validate", &ModelConfig::validate);

    py::class_<Checkpoint>(m, "Checkpoint")
        .def_readonly("config", &Checkpoint::config)
        .def("validate", &Checkpoint::validate);

    m.def("encode", [](const std::string& text) { return tok::encode(text); });
    m.def("decode", [](const std::vector<tok::TokenId>& ids) {
        return tok::decode(std::span<const tok::TokenId>(ids));
    });

    m.def("zero_checkpoint", &zero_checkpoint);
    m.def("random_checkpoint", &synth::random_checkpoint, py::arg("config"), py::arg("seed"));
    m.def("load_checkpoint", &load_checkpoint);
    m.def("save_checkpoint", &save_checkpoint);

    m.def("forward_logits", [](const Checkpoint& ckpt, const std::vector<tok::TokenId>& tokens) {
        return logits_rows(forward(ckpt, tokens).logits);
    });

    m.def(
        "generate_json",
        [](const Checkpoint& ckpt, const std::vector<tok::TokenId>& prompt, std::int64_t max_new,
           const std::vector<tok::TokenId>& marker) {
            GenerateOptions opts;
            opts.trace = false;
            opts.answer_marker = marker;
            return schemas::dump_json(generation_to_json(generate_greedy(ckpt, prompt, max_new, opts)));
        },
        py::arg("ckpt"), py::arg("prompt"), py::arg("max_new"),
        py::arg("marker") = std::vector<tok::TokenId>{});

    m.def(
        "swap_module",
        [](const Checkpoint& recipient, const Checkpoint& donor, const std::string& kind,
           std::optional<std::pair<std::int64_t, std::int64_t>> layers) {
            SwapSpec spec;
            spec.module_kind = module_kind_from_name(kind);
            spec.layer_range = layers;
            return swap_module(recipient, donor, spec);
        },
        py::arg("recipient"), py::arg("donor"), py::arg("kind"),
        py::arg("layers") = std::nullopt);

    m.def("diff_checkpoints", [](const Checkpoint& a, const Checkpoint& b) {
        return diff_checkpoints(a, b);
    });

    m.def("run_needle_suite_json", [](const Checkpoint& ckpt, const std::string& config_json) {
        const NeedleConfig cfg = schemas::needle_config_from_json(json::parse(config_json));
        return schemas::dump_json(schemas::retrieval_map_to_json(run_needle_suite(ckpt, cfg), cfg));
    });

    m.def(
        "entropy_profile_json",
        [](const Checkpoint& ckpt, const std::vector<tok::TokenId>& prompt, std::int64_t max_new,
           const std::vector<tok::TokenId>& marker) {
            GenerateOptions opts;
            opts.trace = true;
            opts.answer_marker = marker;
            const GenerationOutput out = generate_greedy(ckpt, prompt, max_new, opts);
            const std::int64_t steps = static_cast<std::int64_t>(out.generated_tokens.size());
            const std::int64_t split = out.answer_marker_index.value_or(steps);
            const EntropyProfile profile = attention_entropy(out.step_traces, split);
            return schemas::dump_json(schemas::entropy_profile_to_json(profile, json::object(), split, steps));
        },
        py::arg("ckpt"), py::arg("prompt"), py::arg("max_new"),
        py::arg("marker") = std::vector<tok::TokenId>{});

    m.def("collect_activation_stats_json",
          [](const Checkpoint& ckpt, const std::vector<std::vector<tok::TokenId>>& prompts,
             double tau) {
              return schemas::dump_json(schemas::activation_stats_to_json(collect_activation_stats(ckpt, prompts, tau)));
          });

    m.def("relative_difference", &relative_difference);

    m.def(
        "run_conflict_suite_json",
        [](const Checkpoint& ckpt, const std::string& facts_jsonl,
           const std::string& templates_json, std::int64_t max_new, bool injected) {
            const TemplateSet templates = templates_json.empty()
                                              ? default_templates()
                                              : parse_templates(templates_json);
            std::vector<ConflictProbe> probes;
            for (const FactRecord& fact : parse_fact_records(facts_jsonl))
                probes.push_back(build_probe(fact, templates));
            const ProbeResult result = run_probe_suite(
                ckpt, probes, max_new, injected ? PromptMode::Injected : PromptMode::Base);
            return schemas::dump_json(schemas::probe_result_to_json(result));
        },
        py::arg("ckpt"), py::arg("facts_jsonl"), py::arg("templates_json") = std::string(),
        py::arg("max_new") = 16, py::arg("injected") = true);

    m.def(
        "mix_corpora_json",
        [](const std::string& long_jsonl, const std::string& short_jsonl, std::int64_t long_parts,
           std::int64_t short_parts, std::int64_t budget, std::uint64_t seed) {
            MixSpec spec;
            spec.long_parts = long_parts;
            spec.short_parts = short_parts;
            spec.token_budget = budget;
            spec.seed = seed;
            const MixResult result =
                mix_corpora(parse_jsonl_corpus(long_jsonl), parse_jsonl_corpus(short_jsonl), spec);
            json j = schemas::mix_report_to_json(result.report, spec);
            j["lines"] = result.lines;
            return schemas::dump_json(j);
        });

    m.def("corpus_stats_json", [](const std::string& jsonl) {
        return schemas::dump_json(schemas::corpus_stats_to_json(compute_corpus_stats(parse_jsonl_corpus(jsonl))));
    });

    m.def(
        "confidence_interval_json",
        [](const std::vector<double>& values, bool use_t) {
            return schemas::dump_json(schemas::run_statistics_to_json(confidence_interval(values, use_t)));
        },
        py::arg("values"), py::arg("use_t") = false);

    m.def(
        "render_heatmap",
        [](std::int64_t rows, std::int64_t cols, const std::vector<double>& values,
           const std::string& title, const std::string& format) {
            HeatmapSpec spec;
            spec.n_rows = rows;
            spec.n_cols = cols;
            spec.values = values;
            spec.title = title;
            return render_heatmap(spec,
                                  format == "csv" ? HeatmapFormat::Csv : HeatmapFormat::Svg);
        },
        py::arg("rows"), py::arg("cols"), py::arg("values"), py::arg("title") = std::string(),
        py::arg("format") = std::string("svg"));
}
