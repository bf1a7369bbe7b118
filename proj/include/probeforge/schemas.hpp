#pragma once

#include <nlohmann/json.hpp>

#include "probeforge/attention_probes.hpp"
#include "probeforge/conflict.hpp"
#include "probeforge/corpus.hpp"
#include "probeforge/ffn_probes.hpp"
#include "probeforge/report.hpp"

// JSON encodings of every report payload. Each writer here has a matching
// reader so downstream subcommands (diff, report) can consume the files
// they produce.

namespace probeforge::schemas {

using nlohmann::json;

// Serialization for payloads that may carry raw generated bytes (byte-level
// text is not always valid UTF-8); invalid sequences are replaced with
// U+FFFD instead of failing the dump.
std::string dump_json(const json& j, int indent = -1);

json head_matrix_to_json(const HeadMatrix& m);
HeadMatrix head_matrix_from_json(const json& j);

NeedleConfig needle_config_from_json(const json& j);
json needle_config_to_json(const NeedleConfig& cfg);

// {config_echo, matrix, aggregates:{overall_score, retrieval_heads, per_config}}
json retrieval_map_to_json(const RetrievalScoreMap& map, const NeedleConfig& cfg);

// {config_echo, phase_split, steps, reasoning?, answering?}; each phase is
// {matrix, per_layer, steps}
json entropy_profile_to_json(const EntropyProfile& profile, const json& config_echo,
                             std::int64_t phase_split, std::int64_t steps);

json activation_stats_to_json(const ActivationStats& stats);
ActivationStats activation_stats_from_json(const json& j);

json probe_result_to_json(const ProbeResult& result);
json sweep_rows_to_json(const std::vector<SweepRow>& rows);

json corpus_stats_to_json(const CorpusStats& stats);
json mix_report_to_json(const MixReport& report, const MixSpec& spec);

json run_statistics_to_json(const RunStatistics& stats);

}  // namespace probeforge::schemas
