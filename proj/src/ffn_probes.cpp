#include "probeforge/ffn_probes.hpp"

#include <cmath>

#include "probeforge/errors.hpp"

namespace probeforge {

namespace {

// Welford accumulator with Chan's merge, so per-prompt partials combine
// associatively (fixed prompt order keeps results reproducible).
struct StreamingMoments {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    std::int64_t small_count = 0;

    void add(double x, double tau) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
        if (std::fabs(x) <= tau) ++small_count;
    }

    void merge(const StreamingMoments& other) {
        if (other.n == 0) return;
        if (n == 0) {
            *this = other;
            return;
        }
        const double delta = other.mean - mean;
        const std::int64_t total = n + other.n;
        mean += delta * static_cast<double>(other.n) / static_cast<double>(total);
        m2 += other.m2 + delta * delta * static_cast<double>(n) *
                             static_cast<double>(other.n) / static_cast<double>(total);
        small_count += other.small_count;
        n = total;
    }
};

}  // namespace

ActivationStats collect_activation_stats(const Checkpoint& ckpt,
                                         std::span<const std::vector<tok::TokenId>> prompts,
                                         double tau) {
    if (prompts.empty()) throw InputError("collect_activation_stats: empty prompt list");
    if (tau < 0.0) throw InputError("collect_activation_stats: tau must be >= 0");

    const std::int64_t n_layers = ckpt.config.n_layers;
    std::vector<StreamingMoments> totals(static_cast<std::size_t>(n_layers));

    for (const std::vector<tok::TokenId>& prompt : prompts) {
        if (prompt.empty()) throw InputError("collect_activation_stats: empty prompt");
        ForwardOptions opts;
        opts.trace = true;
        const ForwardResult fr = forward(ckpt, prompt, opts);
        std::vector<StreamingMoments> partial(static_cast<std::size_t>(n_layers));
        for (std::int64_t l = 0; l < n_layers; ++l) {
            const Tensor& act = fr.trace->ffn_act[static_cast<std::size_t>(l)];
            for (float v : act.data) partial[static_cast<std::size_t>(l)].add(static_cast<double>(v), tau);
        }
        for (std::int64_t l = 0; l < n_layers; ++l)
            totals[static_cast<std::size_t>(l)].merge(partial[static_cast<std::size_t>(l)]);
    }

    ActivationStats stats;
    stats.tau = tau;
    stats.sample_count = totals[0].n;
    stats.per_layer.resize(static_cast<std::size_t>(n_layers));
    for (std::int64_t l = 0; l < n_layers; ++l) {
        const StreamingMoments& m = totals[static_cast<std::size_t>(l)];
        LayerActivationStats& out = stats.per_layer[static_cast<std::size_t>(l)];
        out.mean = m.mean;
        out.variance = m.m2 / static_cast<double>(m.n);
        out.sparsity = static_cast<double>(m.small_count) / static_cast<double>(m.n);
    }
    return stats;
}

ActivationStats activation_stats_from_values(
    std::span<const std::vector<double>> per_layer_values, double tau) {
    if (per_layer_values.empty())
        throw InputError("activation_stats_from_values: no layers");
    ActivationStats stats;
    stats.tau = tau;
    for (const std::vector<double>& values : per_layer_values) {
        if (values.empty()) throw InputError("activation_stats_from_values: empty layer");
        StreamingMoments m;
        for (double v : values) m.add(v, tau);
        LayerActivationStats layer;
        layer.mean = m.mean;
        layer.variance = m.m2 / static_cast<double>(m.n);
        layer.sparsity = static_cast<double>(m.small_count) / static_cast<double>(m.n);
        stats.per_layer.push_back(layer);
        stats.sample_count = m.n;
    }
    return stats;
}

double relative_difference(double m_c, double m_u) {
    if (m_u == 0.0)
        throw UndefinedBaselineError("relative difference is undefined for a zero baseline");
    return (m_c - m_u) / m_u;
}

std::vector<LayerStatsDelta> stats_profile_diff(const ActivationStats& a,
                                                const ActivationStats& b) {
    if (a.n_layers() != b.n_layers())
        throw CompatibilityError("activation stats have different layer counts: " +
                                 std::to_string(a.n_layers()) + " vs " +
                                 std::to_string(b.n_layers()));
    if (a.tau != b.tau)
        throw CompatibilityError("activation stats were collected with different tau values");

    std::vector<LayerStatsDelta> out(a.per_layer.size());
    for (std::size_t l = 0; l < a.per_layer.size(); ++l) {
        out[l].d_mean = relative_difference(a.per_layer[l].mean, b.per_layer[l].mean);
        out[l].d_variance = relative_difference(a.per_layer[l].variance, b.per_layer[l].variance);
        out[l].d_sparsity = relative_difference(a.per_layer[l].sparsity, b.per_layer[l].sparsity);
    }
    return out;
}

}  // namespace probeforge
