#include "probeforge/swap.hpp"

#include <cmath>

#include "probeforge/checkpoint_io.hpp"
#include "probeforge/errors.hpp"

namespace probeforge {

namespace {

void require_compatible(const ModelConfig& a, const ModelConfig& b) {
    const std::vector<std::string> diff = a.diff_fields(b);
    if (diff.empty()) return;
    std::string msg = "checkpoints are not architecture-compatible; differing fields:";
    for (const std::string& f : diff) msg += " " + f;
    throw CompatibilityError(msg);
}

}  // namespace

ModuleKind module_kind_from_name(std::string_view name) {
    if (name == "mha") return ModuleKind::Mha;
    if (name == "ffn") return ModuleKind::Ffn;
    throw ConfigError("unknown module kind: " + std::string(name) + " (expected mha or ffn)");
}

std::string module_kind_name(ModuleKind kind) {
    return kind == ModuleKind::Mha ? "mha" : "ffn";
}

Checkpoint swap_module(const Checkpoint& recipient, const Checkpoint& donor,
                       const SwapSpec& spec) {
    require_compatible(recipient.config, donor.config);

    const std::int64_t n_layers = recipient.config.n_layers;
    std::int64_t lo = 0, hi = n_layers - 1;
    if (spec.layer_range) {
        lo = spec.layer_range->first;
        hi = spec.layer_range->second;
        if (lo < 0 || hi >= n_layers || lo > hi)
            throw ConfigError("layer range " + std::to_string(lo) + ".." + std::to_string(hi) +
                              " out of bounds for " + std::to_string(n_layers) + " layers");
    }

    Checkpoint out = recipient;
    for (std::int64_t l = lo; l <= hi; ++l) {
        LayerWeights& dst = out.layers[static_cast<std::size_t>(l)];
        const LayerWeights& src = donor.layers[static_cast<std::size_t>(l)];
        if (spec.module_kind == ModuleKind::Mha) {
            dst.q_proj = src.q_proj;
            dst.k_proj = src.k_proj;
            dst.v_proj = src.v_proj;
            dst.o_proj = src.o_proj;
            if (dst.norm_attn) dst.norm_attn = src.norm_attn;
        } else {
            dst.ffn_in = src.ffn_in;
            dst.ffn_out = src.ffn_out;
            if (dst.norm_ffn) dst.norm_ffn = src.norm_ffn;
        }
    }
    return out;
}

std::map<std::string, float> diff_checkpoints(const Checkpoint& a, const Checkpoint& b) {
    require_compatible(a.config, b.config);

    std::map<std::string, const Tensor*> b_tensors;
    for_each_tensor(b, [&](const std::string& name, const Tensor& t) { b_tensors[name] = &t; });

    std::map<std::string, float> out;
    for_each_tensor(a, [&](const std::string& name, const Tensor& t) {
        const Tensor& other = *b_tensors.at(name);
        float max_abs = 0.0f;
        for (std::size_t i = 0; i < t.data.size(); ++i)
            max_abs = std::max(max_abs, std::fabs(t.data[i] - other.data[i]));
        out[name] = max_abs;
    });
    return out;
}

}  // namespace probeforge
