#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "probeforge/model.hpp"

namespace probeforge {

enum class ModuleKind { Mha, Ffn };

ModuleKind module_kind_from_name(std::string_view name);
std::string module_kind_name(ModuleKind kind);

struct SwapSpec {
    ModuleKind module_kind = ModuleKind::Mha;
    // Inclusive layer range; absent means all layers.
    std::optional<std::pair<std::int64_t, std::int64_t>> layer_range;
};

// Returns a copy of `recipient` whose MHA (q/k/v/o projections) or FFN
// (in/out matrices) tensors in the selected layers are bit-copies of the
// donor's. Norm scales travel with their module when present. Inputs are
// untouched. Throws CompatibilityError (listing differing config fields)
// unless the two checkpoints are architecture-compatible.
Checkpoint swap_module(const Checkpoint& recipient, const Checkpoint& donor,
                       const SwapSpec& spec);

// Per-tensor max-abs elementwise difference, keyed by canonical tensor name.
std::map<std::string, float> diff_checkpoints(const Checkpoint& a, const Checkpoint& b);

}  // namespace probeforge
