#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "probeforge/tensor.hpp"
#include "probeforge/tokenizer.hpp"

namespace probeforge {

struct ModelConfig {
    std::int64_t n_layers = 1;
    std::int64_t n_heads = 1;
    std::int64_t d_model = 8;
    std::int64_t d_head = 8;
    std::int64_t d_ffn = 16;
    std::int64_t vocab_size = tok::kByteVocabSize;
    double rope_base = 10000.0;
    Activation activation = Activation::Silu;
    bool use_norm = false;
    std::int64_t max_seq_len = 1024;

    // Throws ConfigError unless d_model == n_heads * d_head, d_head is even,
    // n_layers >= 1, n_heads >= 1, vocab_size >= 2 and rope_base > 0.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;

    // Human-readable list of fields that differ, for compatibility errors.
    std::vector<std::string> diff_fields(const ModelConfig& other) const;
};

struct LayerWeights {
    Tensor q_proj;   // [d_model x d_model]
    Tensor k_proj;   // [d_model x d_model]
    Tensor v_proj;   // [d_model x d_model]
    Tensor o_proj;   // [d_model x d_model]
    Tensor ffn_in;   // [d_model x d_ffn]
    Tensor ffn_out;  // [d_ffn x d_model]
    std::optional<Tensor> norm_attn;  // [d_model], present iff use_norm
    std::optional<Tensor> norm_ffn;   // [d_model], present iff use_norm
};

struct Checkpoint {
    ModelConfig config;
    Tensor token_embedding;  // [vocab_size x d_model]
    std::vector<LayerWeights> layers;
    std::optional<Tensor> final_norm;  // [d_model], present iff use_norm
    Tensor output_head;  // [d_model x vocab_size]

    // Full structural check of every tensor shape against config.
    // Throws ShapeError/ConfigError on any inconsistency.
    void validate() const;
};

// All-zero checkpoint for a given config (norm scales set to ones when
// use_norm is on, so the zero model is still well defined).
Checkpoint zero_checkpoint(const ModelConfig& config);

// Captured internals of one forward pass.
struct TraceRecord {
    std::int64_t seq_len = 0;
    std::int64_t n_layers = 0;
    std::int64_t n_heads = 0;
    // attn[layer * n_heads + head] is a [T x T] attention matrix.
    std::vector<Tensor> attn;
    // ffn_act[layer] is [T x d_ffn]: activations after the nonlinearity.
    std::vector<Tensor> ffn_act;
    // hidden[layer] is [T x d_model]: residual stream after each layer.
    std::vector<Tensor> hidden;
    bool capture_hidden = false;

    const Tensor& attention(std::int64_t layer, std::int64_t head) const;
};

struct ForwardResult {
    Tensor logits;  // [T x vocab_size]
    std::optional<TraceRecord> trace;
};

struct GenerationOutput {
    std::vector<tok::TokenId> prompt_tokens;
    std::vector<tok::TokenId> generated_tokens;
    // step_traces[s] is the trace of the forward pass that produced
    // generated_tokens[s]; its seq_len is prompt+s.
    std::vector<TraceRecord> step_traces;
    // Index into generated_tokens of the first occurrence of the answer
    // marker, when a marker was given and found.
    std::optional<std::int64_t> answer_marker_index;
};

// Rotary embedding over dimension pairs (2j, 2j+1): pair j at position p is
// rotated by angle p * base^(-2j/d_head). Input is [T x d_head]; positions
// supplies the absolute position of each row.
Tensor apply_rope(const Tensor& q_or_k, std::span<const std::int64_t> positions,
                  double rope_base);

struct ForwardOptions {
    bool trace = false;
    bool capture_hidden = false;
};

// Decoder-only forward pass. Residual form: attention output plus input,
// then FFN output plus that. RMS pre-norm only when config.use_norm.
ForwardResult forward(const Checkpoint& ckpt, std::span<const tok::TokenId> tokens,
                      const ForwardOptions& opts = {});

struct GenerateOptions {
    bool trace = true;
    // Marker token sequence splitting the reasoning phase from the
    // answering phase, searched for in the generated tokens.
    std::vector<tok::TokenId> answer_marker;
};

// Greedy (argmax, lowest-id tiebreak) decoding; deterministic function of
// checkpoint bytes and prompt. Throws CapacityError if prompt + max_new
// exceeds the context window.
GenerationOutput generate_greedy(const Checkpoint& ckpt,
                                 std::span<const tok::TokenId> prompt,
                                 std::int64_t max_new,
                                 const GenerateOptions& opts = {});

// argmax with lowest-index tiebreak over one logits row.
tok::TokenId argmax_token(const Tensor& logits, std::int64_t row);

}  // namespace probeforge
