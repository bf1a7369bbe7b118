#include "probeforge/schemas.hpp"

#include "probeforge/errors.hpp"

namespace probeforge::schemas {

std::string dump_json(const json& j, int indent) {
    return j.dump(indent, ' ', false, json::error_handler_t::replace);
}

json head_matrix_to_json(const HeadMatrix& m) {
    return json{{"layers", m.n_layers}, {"heads", m.n_heads}, {"data", m.values}};
}

HeadMatrix head_matrix_from_json(const json& j) {
    HeadMatrix m;
    try {
        m.n_layers = j.at("layers").get<std::int64_t>();
        m.n_heads = j.at("heads").get<std::int64_t>();
        m.values = j.at("data").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("matrix json invalid: ") + e.what());
    }
    if (static_cast<std::int64_t>(m.values.size()) != m.n_layers * m.n_heads)
        throw FormatError("matrix json: data length does not match layers x heads");
    return m;
}

NeedleConfig needle_config_from_json(const json& j) {
    NeedleConfig cfg;
    try {
        cfg.needle = j.at("needle").get<std::string>();
        cfg.question = j.at("question").get<std::string>();
        cfg.answer = j.value("answer", std::string());
        cfg.haystack_source = j.value("haystack", std::string());
        if (j.contains("context_lengths"))
            cfg.context_lengths = j.at("context_lengths").get<std::vector<std::int64_t>>();
        if (j.contains("depth_fractions")) {
            if (j.at("depth_fractions").is_string()) {
                if (j.at("depth_fractions").get<std::string>() != "random")
                    throw FormatError("depth_fractions must be an array or \"random\"");
                cfg.random_depths = true;
            } else {
                cfg.depth_fractions = j.at("depth_fractions").get<std::vector<double>>();
            }
        }
        cfg.seed = j.value("seed", std::uint64_t{0});
        cfg.repetitions = j.value("repetitions", std::int64_t{1});
        cfg.max_new = j.value("max_new", std::int64_t{0});
        cfg.threshold = j.value("threshold", 0.1);
    } catch (const json::exception& e) {
        throw FormatError(std::string("needle config invalid: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

json needle_config_to_json(const NeedleConfig& cfg) {
    json j{{"needle", cfg.needle},
           {"answer", cfg.answer},
           {"question", cfg.question},
           {"haystack", cfg.haystack_source},
           {"context_lengths", cfg.context_lengths},
           {"seed", cfg.seed},
           {"repetitions", cfg.repetitions},
           {"max_new", cfg.max_new},
           {"threshold", cfg.threshold}};
    if (cfg.random_depths)
        j["depth_fractions"] = "random";
    else
        j["depth_fractions"] = cfg.depth_fractions;
    return j;
}

json retrieval_map_to_json(const RetrievalScoreMap& map, const NeedleConfig& cfg) {
    json per_config = json::array();
    for (const auto& c : map.per_config) {
        per_config.push_back(json{{"context_length", c.context_length},
                                  {"depth", c.depth},
                                  {"repetition", c.repetition},
                                  {"data", c.scores.values}});
    }
    json heads = json::array();
    for (const auto& [l, h] : classify_retrieval_heads(map, cfg.threshold))
        heads.push_back(json::array({l, h}));
    return json{{"config_echo", needle_config_to_json(cfg)},
                {"matrix", head_matrix_to_json(map.scores)},
                {"aggregates",
                 json{{"overall_score", overall_retrieval_score(map)},
                      {"threshold", cfg.threshold},
                      {"retrieval_heads", heads},
                      {"per_config", per_config}}}};
}

namespace {

json phase_to_json(const PhaseEntropy& phase) {
    return json{{"matrix", head_matrix_to_json(phase.per_head)},
                {"per_layer", phase.per_layer},
                {"steps", phase.steps}};
}

}  // namespace

json entropy_profile_to_json(const EntropyProfile& profile, const json& config_echo,
                             std::int64_t phase_split, std::int64_t steps) {
    json j{{"config_echo", config_echo}, {"phase_split", phase_split}, {"steps", steps}};
    if (profile.reasoning) j["reasoning"] = phase_to_json(*profile.reasoning);
    if (profile.answering) j["answering"] = phase_to_json(*profile.answering);
    return j;
}

json activation_stats_to_json(const ActivationStats& stats) {
    json layers = json::array();
    for (const LayerActivationStats& l : stats.per_layer)
        layers.push_back(
            json{{"mean", l.mean}, {"variance", l.variance}, {"sparsity", l.sparsity}});
    return json{{"per_layer", layers},
                {"sample_count", stats.sample_count},
                {"tau", stats.tau}};
}

ActivationStats activation_stats_from_json(const json& j) {
    ActivationStats stats;
    try {
        stats.sample_count = j.at("sample_count").get<std::int64_t>();
        stats.tau = j.at("tau").get<double>();
        for (const json& l : j.at("per_layer")) {
            LayerActivationStats layer;
            layer.mean = l.at("mean").get<double>();
            layer.variance = l.at("variance").get<double>();
            layer.sparsity = l.at("sparsity").get<double>();
            stats.per_layer.push_back(layer);
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("activation stats json invalid: ") + e.what());
    }
    return stats;
}

json probe_result_to_json(const ProbeResult& result) {
    json per_probe = json::array();
    for (const ProbeOutcome& o : result.per_probe) {
        json entry{{"id", o.id}, {"verdict", verdict_name(o.verdict)}, {"output", o.output}};
        if (o.overflow) entry["overflow"] = true;
        per_probe.push_back(entry);
    }
    return json{{"per_probe", per_probe},
                {"counts",
                 json{{"parametric", result.n_parametric},
                      {"contextual", result.n_contextual},
                      {"other", result.n_other}}},
                {"rates",
                 json{{"parametric", result.parametric_rate()},
                      {"contextual", result.contextual_rate()},
                      {"other", result.other_rate()}}}};
}

json sweep_rows_to_json(const std::vector<SweepRow>& rows) {
    json out = json::array();
    for (const SweepRow& row : rows) {
        json entry{{"label", row.label}};
        if (row.result)
            entry["result"] = probe_result_to_json(*row.result);
        else
            entry["error"] = row.error;
        out.push_back(entry);
    }
    return json{{"rows", out}};
}

json corpus_stats_to_json(const CorpusStats& stats) {
    json j{{"sample_count", stats.sample_count},
           {"total_tokens", stats.total_tokens},
           {"skipped", stats.skipped}};
    if (stats.sample_count > 0) j["avg_length"] = stats.avg_length();
    return j;
}

json mix_report_to_json(const MixReport& report, const MixSpec& spec) {
    return json{{"target",
                 json{{"long_parts", spec.long_parts},
                      {"short_parts", spec.short_parts},
                      {"token_budget", spec.token_budget},
                      {"length_threshold", spec.length_threshold},
                      {"seed", spec.seed}}},
                {"achieved",
                 json{{"long_tokens", report.long_tokens},
                      {"short_tokens", report.short_tokens},
                      {"long_samples", report.long_samples},
                      {"short_samples", report.short_samples},
                      {"total_tokens", report.total_tokens()},
                      {"long_share", report.achieved_long_share()}}},
                {"shortfall", report.shortfall}};
}

json run_statistics_to_json(const RunStatistics& stats) {
    return json{{"n", stats.n}, {"mean", stats.mean}, {"std", stats.stddev}, {"ci95", stats.ci95}};
}

}  // namespace probeforge::schemas
