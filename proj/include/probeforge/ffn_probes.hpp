#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "probeforge/model.hpp"

namespace probeforge {

struct LayerActivationStats {
    double mean = 0.0;
    double variance = 0.0;  // population (divide by n)
    double sparsity = 0.0;  // fraction of values with |a| <= tau
};

struct ActivationStats {
    std::vector<LayerActivationStats> per_layer;
    std::int64_t sample_count = 0;  // (token, neuron) samples per layer
    double tau = 1e-3;

    std::int64_t n_layers() const { return static_cast<std::int64_t>(per_layer.size()); }
};

// Pools FFN activations g(x * W_in) of every prompt token and neuron into
// per-layer mean/variance/sparsity. Single-pass streaming accumulation
// (per-prompt partials merged in prompt order); the tests pin equality with
// a full-materialization oracle.
ActivationStats collect_activation_stats(const Checkpoint& ckpt,
                                         std::span<const std::vector<tok::TokenId>> prompts,
                                         double tau);

// Same statistics over raw per-layer activation values (e.g. dumped from a
// trace); shares the streaming accumulator with collect_activation_stats.
ActivationStats activation_stats_from_values(
    std::span<const std::vector<double>> per_layer_values, double tau);

// (m_c - m_u) / m_u. Throws UndefinedBaselineError when m_u == 0.
double relative_difference(double m_c, double m_u);

struct LayerStatsDelta {
    double d_mean = 0.0;
    double d_variance = 0.0;
    double d_sparsity = 0.0;
};

// relative_difference per layer per statistic, a against baseline b.
std::vector<LayerStatsDelta> stats_profile_diff(const ActivationStats& a,
                                                const ActivationStats& b);

}  // namespace probeforge
