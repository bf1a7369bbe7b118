#include "probeforge/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "probeforge/errors.hpp"
#include "probeforge/util.hpp"
#include "probeforge/version.hpp"

namespace probeforge {

namespace {

// Two-sided 95% Student-t quantiles for df 1..30, then bracketed steps.
double t_quantile_975(std::int64_t df) {
    static const double table[30] = {
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
        2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
        2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
    if (df <= 30) return table[df - 1];
    if (df <= 40) return 2.021;
    if (df <= 60) return 2.000;
    if (df <= 120) return 1.980;
    return 1.96;
}

struct Rgb {
    double r, g, b;
};

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
    return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

std::string rgb_hex(const Rgb& c) {
    char buf[8];
    auto clamp255 = [](double v) {
        return static_cast<int>(std::lround(std::clamp(v, 0.0, 255.0)));
    };
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", clamp255(c.r), clamp255(c.g), clamp255(c.b));
    return buf;
}

// ColorBrewer RdBu anchors for the diverging scale, white->dark red for the
// sequential one.
const Rgb kBlue{33, 102, 172};
const Rgb kWhite{247, 247, 247};
const Rgb kRed{178, 24, 43};

std::string cell_color(double value, double min_v, double max_v, bool diverging) {
    if (diverging) {
        const double limit = std::max(std::fabs(min_v), std::fabs(max_v));
        if (limit == 0.0) return rgb_hex(kWhite);
        const double t = std::clamp(value / limit, -1.0, 1.0);
        return t < 0.0 ? rgb_hex(lerp(kWhite, kBlue, -t)) : rgb_hex(lerp(kWhite, kRed, t));
    }
    const double span = max_v - min_v;
    const double t = span == 0.0 ? 0.0 : (value - min_v) / span;
    return rgb_hex(lerp(kWhite, kRed, t));
}

}  // namespace

double ci95_half_width(double stddev, std::int64_t n, bool use_t) {
    if (n < 2) throw InsufficientDataError("confidence interval needs at least 2 samples");
    const double factor = use_t ? t_quantile_975(n - 1) : 1.96;
    return factor * stddev / std::sqrt(static_cast<double>(n));
}

RunStatistics confidence_interval(std::span<const double> samples, bool use_t) {
    const std::int64_t n = static_cast<std::int64_t>(samples.size());
    if (n < 2)
        throw InsufficientDataError("confidence interval needs at least 2 samples, got " +
                                    std::to_string(n));
    double sum = 0.0;
    for (double v : samples) sum += v;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    const double stddev = std::sqrt(ss / static_cast<double>(n - 1));

    RunStatistics stats;
    stats.n = n;
    stats.mean = mean;
    stats.stddev = stddev;
    stats.ci95 = ci95_half_width(stddev, n, use_t);
    return stats;
}

std::string render_heatmap(const HeatmapSpec& spec, HeatmapFormat format) {
    if (spec.n_rows <= 0 || spec.n_cols <= 0 || spec.values.empty())
        throw InputError("heatmap matrix is empty");
    if (static_cast<std::int64_t>(spec.values.size()) != spec.n_rows * spec.n_cols)
        throw ShapeError("heatmap values do not match n_rows x n_cols");

    const double min_v = *std::min_element(spec.values.begin(), spec.values.end());
    const double max_v = *std::max_element(spec.values.begin(), spec.values.end());
    const bool diverging = min_v < 0.0;

    if (format == HeatmapFormat::Csv) {
        std::string out;
        out += "# scale=" + std::string(diverging ? "diverging" : "sequential") +
               " min=" + util::format_double(min_v) + " max=" + util::format_double(max_v) + "\n";
        out += spec.row_label;
        for (std::int64_t c = 0; c < spec.n_cols; ++c)
            out += "," + spec.col_label + std::to_string(c);
        out += "\n";
        for (std::int64_t r = 0; r < spec.n_rows; ++r) {
            out += std::to_string(r);
            for (std::int64_t c = 0; c < spec.n_cols; ++c)
                out += "," + util::format_double(spec.values[static_cast<std::size_t>(r * spec.n_cols + c)]);
            out += "\n";
        }
        return out;
    }

    const int cell = 22, margin_left = 60, margin_top = spec.title.empty() ? 24 : 44;
    const int margin_bottom = 30;
    const std::int64_t width = margin_left + spec.n_cols * cell + 20;
    const std::int64_t height = margin_top + spec.n_rows * cell + margin_bottom;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\">\n";
    svg += "<desc>scale=" + std::string(diverging ? "diverging" : "sequential") +
           " min=" + util::format_double(min_v) + " max=" + util::format_double(max_v) +
           "</desc>\n";
    if (!spec.title.empty())
        svg += "<text x=\"" + std::to_string(margin_left) +
               "\" y=\"18\" font-family=\"monospace\" font-size=\"13\">" + spec.title +
               "</text>\n";
    for (std::int64_t r = 0; r < spec.n_rows; ++r) {
        for (std::int64_t c = 0; c < spec.n_cols; ++c) {
            const double v = spec.values[static_cast<std::size_t>(r * spec.n_cols + c)];
            svg += "<rect x=\"" + std::to_string(margin_left + c * cell) + "\" y=\"" +
                   std::to_string(margin_top + r * cell) + "\" width=\"" + std::to_string(cell) +
                   "\" height=\"" + std::to_string(cell) + "\" fill=\"" +
                   cell_color(v, min_v, max_v, diverging) + "\"><title>" +
                   spec.row_label + " " + std::to_string(r) + ", " + spec.col_label + " " +
                   std::to_string(c) + ": " + util::format_double(v) + "</title></rect>\n";
        }
        svg += "<text x=\"" + std::to_string(margin_left - 6) + "\" y=\"" +
               std::to_string(margin_top + r * cell + cell - 6) +
               "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"10\">" +
               std::to_string(r) + "</text>\n";
    }
    for (std::int64_t c = 0; c < spec.n_cols; ++c)
        svg += "<text x=\"" + std::to_string(margin_left + c * cell + cell / 2) + "\" y=\"" +
               std::to_string(margin_top + spec.n_rows * cell + 14) +
               "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"10\">" +
               std::to_string(c) + "</text>\n";
    svg += "<text x=\"" + std::to_string(margin_left - 40) + "\" y=\"" +
           std::to_string(margin_top - 8) + "\" font-family=\"monospace\" font-size=\"10\">" +
           spec.row_label + " \\ " + spec.col_label + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

void emit_heatmap(const HeatmapSpec& spec, const std::string& path, HeatmapFormat format) {
    util::atomic_write_file(path, render_heatmap(spec, format));
}

std::string render_table_csv(const std::string& label_header,
                             std::span<const std::string> columns,
                             std::span<const std::pair<std::string, std::vector<double>>> rows) {
    std::string out = label_header;
    for (const std::string& c : columns) out += "," + c;
    out += "\n";
    for (const auto& [label, values] : rows) {
        if (values.size() != columns.size())
            throw ShapeError("table row '" + label + "' has " + std::to_string(values.size()) +
                             " values for " + std::to_string(columns.size()) + " columns");
        out += label;
        for (double v : values) out += "," + util::format_double(v);
        out += "\n";
    }
    return out;
}

void write_provenance_sidecar(const std::string& payload_path, const std::string& command,
                              std::span<const std::string> input_paths) {
    nlohmann::json j;
    j["tool"] = std::string(kToolName) + " " + kToolVersion;
    j["command"] = command;
    nlohmann::json inputs = nlohmann::json::array();
    for (const std::string& p : input_paths) {
        nlohmann::json entry;
        entry["path"] = p;
        entry["fnv1a64"] = util::fnv1a64_hex(util::read_file(p));
        inputs.push_back(entry);
    }
    j["inputs"] = inputs;
    util::atomic_write_file(payload_path + ".provenance.json", j.dump(2) + "\n");
}

}  // namespace probeforge
