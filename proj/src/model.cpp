#include "probeforge/model.hpp"

#include <algorithm>
#include <cmath>

#include "probeforge/errors.hpp"

namespace probeforge {

namespace {

constexpr double kRmsEps = 1e-5;

Tensor transpose(const Tensor& m) {
    const std::int64_t r = m.rows(), c = m.cols();
    Tensor out = Tensor::zeros({c, r});
    for (std::int64_t i = 0; i < r; ++i)
        for (std::int64_t j = 0; j < c; ++j) out.data[static_cast<std::size_t>(j * r + i)] = m.data[static_cast<std::size_t>(i * c + j)];
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("add: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    Tensor out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

// RMS norm with learned per-dimension scale, computed rowwise.
Tensor rms_norm(const Tensor& x, const Tensor& scale) {
    const std::int64_t t = x.rows(), d = x.cols();
    if (scale.numel() != d) throw ShapeError("rms_norm scale size mismatch");
    Tensor out = Tensor::zeros({t, d});
    for (std::int64_t i = 0; i < t; ++i) {
        const float* row = x.data.data() + i * d;
        double ss = 0.0;
        for (std::int64_t j = 0; j < d; ++j) ss += static_cast<double>(row[j]) * static_cast<double>(row[j]);
        const double inv = 1.0 / std::sqrt(ss / static_cast<double>(d) + kRmsEps);
        float* orow = out.data.data() + i * d;
        for (std::int64_t j = 0; j < d; ++j)
            orow[j] = static_cast<float>(static_cast<double>(row[j]) * inv *
                                         static_cast<double>(scale.data[static_cast<std::size_t>(j)]));
    }
    return out;
}

// Columns [head*d_head, (head+1)*d_head) of a [T x d_model] projection.
Tensor head_slice(const Tensor& x, std::int64_t head, std::int64_t d_head) {
    const std::int64_t t = x.rows();
    Tensor out = Tensor::zeros({t, d_head});
    for (std::int64_t i = 0; i < t; ++i) {
        const float* src = x.data.data() + i * x.cols() + head * d_head;
        std::copy(src, src + d_head, out.data.data() + i * d_head);
    }
    return out;
}

void check_tensor_shape(const Tensor& t, std::vector<std::int64_t> expect,
                        const std::string& name) {
    if (t.shape != expect) {
        Tensor dummy;
        dummy.shape = std::move(expect);
        throw ShapeError("tensor " + name + " has shape " + t.shape_str() + ", expected " +
                         dummy.shape_str());
    }
}

}  // namespace

void ModelConfig::validate() const {
    if (n_layers < 1) throw ConfigError("n_layers must be >= 1");
    if (n_heads < 1) throw ConfigError("n_heads must be >= 1");
    if (vocab_size < 2) throw ConfigError("vocab_size must be >= 2");
    if (d_head < 2 || d_head % 2 != 0)
        throw ConfigError("d_head must be even and >= 2, got " + std::to_string(d_head));
    if (d_model != n_heads * d_head)
        throw ConfigError("d_model (" + std::to_string(d_model) + ") must equal n_heads*d_head (" +
                          std::to_string(n_heads * d_head) + ")");
    if (d_ffn < 1) throw ConfigError("d_ffn must be >= 1");
    if (!(rope_base > 0.0)) throw ConfigError("rope_base must be positive");
    if (max_seq_len < 1) throw ConfigError("max_seq_len must be >= 1");
}

std::vector<std::string> ModelConfig::diff_fields(const ModelConfig& other) const {
    std::vector<std::string> out;
    if (n_layers != other.n_layers) out.push_back("n_layers");
    if (n_heads != other.n_heads) out.push_back("n_heads");
    if (d_model != other.d_model) out.push_back("d_model");
    if (d_head != other.d_head) out.push_back("d_head");
    if (d_ffn != other.d_ffn) out.push_back("d_ffn");
    if (vocab_size != other.vocab_size) out.push_back("vocab_size");
    if (rope_base != other.rope_base) out.push_back("rope_base");
    if (activation != other.activation) out.push_back("activation");
    if (use_norm != other.use_norm) out.push_back("use_norm");
    if (max_seq_len != other.max_seq_len) out.push_back("max_seq_len");
    return out;
}

void Checkpoint::validate() const {
    config.validate();
    check_tensor_shape(token_embedding, {config.vocab_size, config.d_model}, "embed.tok");
    if (static_cast<std::int64_t>(layers.size()) != config.n_layers)
        throw ShapeError("checkpoint has " + std::to_string(layers.size()) + " layers, config says " +
                         std::to_string(config.n_layers));
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string p = "layer." + std::to_string(l) + ".";
        const LayerWeights& w = layers[l];
        check_tensor_shape(w.q_proj, {config.d_model, config.d_model}, p + "attn.q");
        check_tensor_shape(w.k_proj, {config.d_model, config.d_model}, p + "attn.k");
        check_tensor_shape(w.v_proj, {config.d_model, config.d_model}, p + "attn.v");
        check_tensor_shape(w.o_proj, {config.d_model, config.d_model}, p + "attn.o");
        check_tensor_shape(w.ffn_in, {config.d_model, config.d_ffn}, p + "ffn.in");
        check_tensor_shape(w.ffn_out, {config.d_ffn, config.d_model}, p + "ffn.out");
        if (config.use_norm) {
            if (!w.norm_attn || !w.norm_ffn)
                throw ConfigError("use_norm is on but " + p + "norm.* scales are missing");
            check_tensor_shape(*w.norm_attn, {config.d_model}, p + "norm.attn");
            check_tensor_shape(*w.norm_ffn, {config.d_model}, p + "norm.ffn");
        } else if (w.norm_attn || w.norm_ffn) {
            throw ConfigError("use_norm is off but " + p + "norm.* scales are present");
        }
    }
    if (config.use_norm) {
        if (!final_norm) throw ConfigError("use_norm is on but final.norm is missing");
        check_tensor_shape(*final_norm, {config.d_model}, "final.norm");
    } else if (final_norm) {
        throw ConfigError("use_norm is off but final.norm is present");
    }
    check_tensor_shape(output_head, {config.d_model, config.vocab_size}, "head.out");
}

Checkpoint zero_checkpoint(const ModelConfig& config) {
    config.validate();
    Checkpoint c;
    c.config = config;
    c.token_embedding = Tensor::zeros({config.vocab_size, config.d_model});
    c.layers.resize(static_cast<std::size_t>(config.n_layers));
    for (LayerWeights& w : c.layers) {
        w.q_proj = Tensor::zeros({config.d_model, config.d_model});
        w.k_proj = Tensor::zeros({config.d_model, config.d_model});
        w.v_proj = Tensor::zeros({config.d_model, config.d_model});
        w.o_proj = Tensor::zeros({config.d_model, config.d_model});
        w.ffn_in = Tensor::zeros({config.d_model, config.d_ffn});
        w.ffn_out = Tensor::zeros({config.d_ffn, config.d_model});
        if (config.use_norm) {
            w.norm_attn = Tensor({config.d_model},
                                 std::vector<float>(static_cast<std::size_t>(config.d_model), 1.0f));
            w.norm_ffn = Tensor({config.d_model},
                                std::vector<float>(static_cast<std::size_t>(config.d_model), 1.0f));
        }
    }
    if (config.use_norm)
        c.final_norm = Tensor({config.d_model},
                              std::vector<float>(static_cast<std::size_t>(config.d_model), 1.0f));
    c.output_head = Tensor::zeros({config.d_model, config.vocab_size});
    return c;
}

const Tensor& TraceRecord::attention(std::int64_t layer, std::int64_t head) const {
    return attn[static_cast<std::size_t>(layer * n_heads + head)];
}

Tensor apply_rope(const Tensor& q_or_k, std::span<const std::int64_t> positions,
                  double rope_base) {
    const std::int64_t t = q_or_k.rows(), d = q_or_k.cols();
    if (d % 2 != 0) throw ConfigError("rotary embedding requires an even head dimension");
    if (static_cast<std::int64_t>(positions.size()) != t)
        throw ShapeError("apply_rope: positions count does not match rows");
    std::vector<double> freqs(static_cast<std::size_t>(d / 2));
    for (std::int64_t j = 0; j < d / 2; ++j)
        freqs[static_cast<std::size_t>(j)] =
            std::pow(rope_base, -2.0 * static_cast<double>(j) / static_cast<double>(d));

    Tensor out = Tensor::zeros({t, d});
    for (std::int64_t i = 0; i < t; ++i) {
        const double pos = static_cast<double>(positions[static_cast<std::size_t>(i)]);
        const float* src = q_or_k.data.data() + i * d;
        float* dst = out.data.data() + i * d;
        for (std::int64_t j = 0; j < d / 2; ++j) {
            const double angle = pos * freqs[static_cast<std::size_t>(j)];
            const double c = std::cos(angle), s = std::sin(angle);
            const double x0 = static_cast<double>(src[2 * j]);
            const double x1 = static_cast<double>(src[2 * j + 1]);
            dst[2 * j] = static_cast<float>(x0 * c - x1 * s);
            dst[2 * j + 1] = static_cast<float>(x0 * s + x1 * c);
        }
    }
    return out;
}

ForwardResult forward(const Checkpoint& ckpt, std::span<const tok::TokenId> tokens,
                      const ForwardOptions& opts) {
    const ModelConfig& cfg = ckpt.config;
    const std::int64_t t = static_cast<std::int64_t>(tokens.size());
    if (t == 0) throw InputError("forward: empty token sequence");
    if (t > cfg.max_seq_len)
        throw CapacityError("sequence length " + std::to_string(t) + " exceeds max_seq_len " +
                            std::to_string(cfg.max_seq_len));
    for (tok::TokenId id : tokens) {
        if (id < 0 || id >= cfg.vocab_size)
            throw InputError("token id " + std::to_string(id) + " out of range for vocab_size " +
                             std::to_string(cfg.vocab_size));
    }

    std::vector<std::int64_t> positions(static_cast<std::size_t>(t));
    for (std::int64_t i = 0; i < t; ++i) positions[static_cast<std::size_t>(i)] = i;

    // token embedding lookup
    Tensor h = Tensor::zeros({t, cfg.d_model});
    for (std::int64_t i = 0; i < t; ++i) {
        const float* src = ckpt.token_embedding.data.data() + static_cast<std::int64_t>(tokens[static_cast<std::size_t>(i)]) * cfg.d_model;
        std::copy(src, src + cfg.d_model, h.data.data() + i * cfg.d_model);
    }

    ForwardResult result;
    if (opts.trace) {
        TraceRecord tr;
        tr.seq_len = t;
        tr.n_layers = cfg.n_layers;
        tr.n_heads = cfg.n_heads;
        tr.capture_hidden = opts.capture_hidden;
        result.trace = std::move(tr);
    }

    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(cfg.d_head));

    for (std::int64_t l = 0; l < cfg.n_layers; ++l) {
        const LayerWeights& w = ckpt.layers[static_cast<std::size_t>(l)];

        const Tensor attn_input = cfg.use_norm ? rms_norm(h, *w.norm_attn) : h;
        const Tensor q_full = matmul(attn_input, w.q_proj);
        const Tensor k_full = matmul(attn_input, w.k_proj);
        const Tensor v_full = matmul(attn_input, w.v_proj);

        Tensor concat = Tensor::zeros({t, cfg.d_model});
        for (std::int64_t head = 0; head < cfg.n_heads; ++head) {
            const Tensor q = apply_rope(head_slice(q_full, head, cfg.d_head), positions, cfg.rope_base);
            const Tensor k = apply_rope(head_slice(k_full, head, cfg.d_head), positions, cfg.rope_base);
            const Tensor v = head_slice(v_full, head, cfg.d_head);

            Tensor scores = matmul(q, transpose(k));
            for (float& s : scores.data) s = static_cast<float>(static_cast<double>(s) * inv_sqrt_d);
            const Tensor attn = masked_softmax_rows(scores, /*causal=*/true);
            const Tensor head_out = matmul(attn, v);

            for (std::int64_t i = 0; i < t; ++i)
                std::copy(head_out.data.data() + i * cfg.d_head,
                          head_out.data.data() + (i + 1) * cfg.d_head,
                          concat.data.data() + i * cfg.d_model + head * cfg.d_head);
            if (result.trace) result.trace->attn.push_back(attn);
        }

        h = add(matmul(concat, w.o_proj), h);

        const Tensor ffn_input = cfg.use_norm ? rms_norm(h, *w.norm_ffn) : h;
        const Tensor act = activation(matmul(ffn_input, w.ffn_in), cfg.activation);
        if (result.trace) result.trace->ffn_act.push_back(act);
        h = add(matmul(act, w.ffn_out), h);

        if (result.trace && opts.capture_hidden) result.trace->hidden.push_back(h);
    }

    const Tensor head_input = cfg.use_norm ? rms_norm(h, *ckpt.final_norm) : h;
    result.logits = matmul(head_input, ckpt.output_head);
    return result;
}

tok::TokenId argmax_token(const Tensor& logits, std::int64_t row) {
    const std::int64_t v = logits.cols();
    const float* r = logits.data.data() + row * v;
    std::int64_t best = 0;
    for (std::int64_t j = 1; j < v; ++j)
        if (r[j] > r[best]) best = j;
    return static_cast<tok::TokenId>(best);
}

GenerationOutput generate_greedy(const Checkpoint& ckpt,
                                 std::span<const tok::TokenId> prompt,
                                 std::int64_t max_new,
                                 const GenerateOptions& opts) {
    if (prompt.empty()) throw InputError("generate_greedy: empty prompt");
    if (max_new < 0) throw InputError("generate_greedy: negative max_new");
    const std::int64_t budget = ckpt.config.max_seq_len;
    if (static_cast<std::int64_t>(prompt.size()) + max_new > budget)
        throw CapacityError("prompt (" + std::to_string(prompt.size()) + ") + max_new (" +
                            std::to_string(max_new) + ") exceeds max_seq_len " +
                            std::to_string(budget));

    GenerationOutput out;
    out.prompt_tokens.assign(prompt.begin(), prompt.end());

    std::vector<tok::TokenId> seq(prompt.begin(), prompt.end());
    for (std::int64_t step = 0; step < max_new; ++step) {
        ForwardOptions fo;
        fo.trace = opts.trace;
        ForwardResult fr = forward(ckpt, seq, fo);
        const tok::TokenId next = argmax_token(fr.logits, static_cast<std::int64_t>(seq.size()) - 1);
        out.generated_tokens.push_back(next);
        if (fr.trace) out.step_traces.push_back(std::move(*fr.trace));
        seq.push_back(next);
    }

    if (!opts.answer_marker.empty()) {
        const auto& g = out.generated_tokens;
        const auto& m = opts.answer_marker;
        if (g.size() >= m.size()) {
            for (std::size_t i = 0; i + m.size() <= g.size(); ++i) {
                if (std::equal(m.begin(), m.end(), g.begin() + static_cast<std::ptrdiff_t>(i))) {
                    out.answer_marker_index = static_cast<std::int64_t>(i);
                    break;
                }
            }
        }
    }
    return out;
}

}  // namespace probeforge
