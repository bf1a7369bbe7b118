#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "probeforge/model.hpp"

namespace probeforge::synth {

// Seeded Gaussian checkpoint; weights scaled 1/sqrt(d_model) so small random
// models keep activations O(1). Deterministic for a fixed seed and config.
Checkpoint random_checkpoint(const ModelConfig& config, std::uint64_t seed);

// Layout shared by hand-crafted probe models. Tokens in `id_tokens` get a
// one-hot identity dimension in the residual stream; tokens in `emit_tokens`
// get an output-bus dimension wired into the output head. Everything else
// embeds to zero, which is what makes filler text provably inert.
struct ProbeModelLayout {
    std::vector<tok::TokenId> id_tokens;
    std::vector<tok::TokenId> emit_tokens;
    std::int64_t n_layers = 2;
    std::int64_t n_heads = 2;
    std::int64_t d_head = 16;
    std::int64_t d_ffn = 32;
    std::int64_t vocab_size = tok::kByteVocabSize;
    std::int64_t max_seq_len = 1024;
    double rope_base = 1e30;  // keeps the slow rotary pairs effectively static
};

// Copy chain for head (0,0): when the last token is a trigger the head
// attends the position of chain[0] and the model emits that token; each
// chain token then triggers the next. After the final chain token the head
// attends `stop_beacon` (if present in the prompt) and emits `terminator`.
// Each chain direction lives in its own slow rotary pair, so positions of
// the attended tokens are irrelevant by construction.
struct CopyChainSpec {
    std::vector<tok::TokenId> triggers;
    std::vector<tok::TokenId> chain;
    std::optional<tok::TokenId> stop_beacon;
    tok::TokenId terminator = static_cast<tok::TokenId>('.');
    float logit = 1.0f;
};

// Successor memory stored in the FFN: one neuron per (key, value) pair,
// firing when the last token equals the key and raising the value's logit.
struct SuccessorSpec {
    std::vector<std::pair<tok::TokenId, tok::TokenId>> pairs;
    float logit = 0.5f;
};

// Hand-crafted checkpoint combining an optional attention copy chain with an
// optional FFN successor memory. With both present the copy path dominates
// whenever its chain tokens appear in the prompt (contextual override);
// otherwise the FFN memory answers (parametric fallback).
Checkpoint build_probe_model(const ProbeModelLayout& layout,
                             const std::optional<CopyChainSpec>& copy_chain,
                             const SuccessorSpec& memory);

// Convenience: pure successor-memory model (attention inert).
Checkpoint make_memory_model(const ProbeModelLayout& layout, const SuccessorSpec& memory);

// ---- bundled demo constructions -------------------------------------------
// Ready-made models with provable behavior, paired with matching suite
// inputs over a controlled vocabulary. The copy-head model retrieves the
// needle "KLM" with head (0,0); the parametric model memorizes the demo
// facts in its FFN; the contextual model additionally copies an injected
// conflict value, overriding its memory whenever the conflict is present.

Checkpoint demo_copy_head_model();
// needle suite JSON matching demo_copy_head_model (full grid, answer KLM)
std::string demo_needle_config_json();

ProbeModelLayout demo_conflict_layout();
SuccessorSpec demo_conflict_memory();
Checkpoint demo_parametric_model();
Checkpoint demo_contextual_model();
// fact records (subjects A..D over single-byte tokens) and the template set
// the demo models were built against
std::string demo_facts_jsonl();
std::string demo_conflict_templates_json();

}  // namespace probeforge::synth
