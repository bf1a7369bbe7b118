#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace probeforge {

struct RunStatistics {
    std::int64_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n-1)
    double ci95 = 0.0;    // half-width
};

// Mean, sample std, and 95% CI half-width. The default multiplier is the
// normal approximation 1.96; use_t switches to a Student-t quantile table
// (two-sided 95%). Throws InsufficientDataError for n < 2.
RunStatistics confidence_interval(std::span<const double> samples, bool use_t = false);

// Half-width from an already-known std: multiplier * std / sqrt(n).
double ci95_half_width(double stddev, std::int64_t n, bool use_t = false);

enum class HeatmapFormat { Svg, Csv };

struct HeatmapSpec {
    std::int64_t n_rows = 0;
    std::int64_t n_cols = 0;
    std::vector<double> values;  // row-major
    std::string title;
    std::string row_label = "layer";
    std::string col_label = "head";
};

// Deterministic rendering: no timestamps, fixed palettes, explicit min/max
// embedded in the output. A diverging (blue-white-red) scale centered at 0
// is used whenever any value is negative, a sequential white-red scale
// otherwise. Same spec twice gives byte-identical output.
std::string render_heatmap(const HeatmapSpec& spec, HeatmapFormat format);
void emit_heatmap(const HeatmapSpec& spec, const std::string& path, HeatmapFormat format);

// CSV table with a label column: header then one row per labelled series.
std::string render_table_csv(const std::string& label_header,
                             std::span<const std::string> columns,
                             std::span<const std::pair<std::string, std::vector<double>>> rows);

// Provenance sidecar written next to report payloads: tool version, the
// command, and input digests. Kept out of the deterministic payload itself.
void write_provenance_sidecar(const std::string& payload_path, const std::string& command,
                              std::span<const std::string> input_paths);

}  // namespace probeforge
