#include "probeforge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "probeforge/checkpoint_io.hpp"
#include "probeforge/errors.hpp"

namespace probeforge::synth {

namespace {

// pairs 0 and 1 of each head rotate too fast to carry position-independent
// signals; chain directions start at pair 2.
constexpr std::int64_t kFirstSlowPair = 2;

struct DimPlan {
    std::map<tok::TokenId, std::int64_t> id_dim;
    std::map<tok::TokenId, std::int64_t> emit_dim;
};

DimPlan plan_dims(const ProbeModelLayout& layout) {
    DimPlan plan;
    std::int64_t next = 0;
    for (tok::TokenId t : layout.id_tokens) {
        if (plan.id_dim.count(t)) throw ConfigError("duplicate id token in probe model layout");
        plan.id_dim[t] = next++;
    }
    for (tok::TokenId t : layout.emit_tokens) {
        if (plan.emit_dim.count(t)) throw ConfigError("duplicate emit token in probe model layout");
        plan.emit_dim[t] = next++;
    }
    const std::int64_t d_model = layout.n_heads * layout.d_head;
    if (next > d_model)
        throw ConfigError("probe model layout needs " + std::to_string(next) +
                          " residual dims but d_model is " + std::to_string(d_model));
    return plan;
}

}  // namespace

Checkpoint random_checkpoint(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Checkpoint ckpt = zero_checkpoint(config);
    std::mt19937_64 rng(seed);
    const float scale = 1.0f / std::sqrt(static_cast<float>(config.d_model));
    std::normal_distribution<float> dist(0.0f, 1.0f);
    for_each_tensor(ckpt, [&](const std::string& name, Tensor& t) {
        const bool is_norm = name.find("norm") != std::string::npos;
        for (float& v : t.data) {
            if (is_norm)
                v = 1.0f + 0.1f * dist(rng);
            else
                v = scale * dist(rng);
        }
    });
    return ckpt;
}

Checkpoint build_probe_model(const ProbeModelLayout& layout,
                             const std::optional<CopyChainSpec>& copy_chain,
                             const SuccessorSpec& memory) {
    ModelConfig cfg;
    cfg.n_layers = layout.n_layers;
    cfg.n_heads = layout.n_heads;
    cfg.d_head = layout.d_head;
    cfg.d_model = layout.n_heads * layout.d_head;
    cfg.d_ffn = layout.d_ffn;
    cfg.vocab_size = layout.vocab_size;
    cfg.rope_base = layout.rope_base;
    cfg.activation = Activation::Relu;
    cfg.use_norm = false;
    cfg.max_seq_len = layout.max_seq_len;
    cfg.validate();

    const DimPlan plan = plan_dims(layout);
    Checkpoint ckpt = zero_checkpoint(cfg);

    auto id_of = [&](tok::TokenId t) -> std::int64_t {
        auto it = plan.id_dim.find(t);
        if (it == plan.id_dim.end())
            throw ConfigError("token " + std::to_string(t) + " is not in the layout's id_tokens");
        return it->second;
    };
    auto emit_of = [&](tok::TokenId t) -> std::int64_t {
        auto it = plan.emit_dim.find(t);
        if (it == plan.emit_dim.end())
            throw ConfigError("token " + std::to_string(t) + " is not in the layout's emit_tokens");
        return it->second;
    };

    for (const auto& [token, dim] : plan.id_dim)
        ckpt.token_embedding.at(token, dim) = 1.0f;
    for (const auto& [dim_token, dim] : plan.emit_dim)
        ckpt.output_head.at(dim, dim_token) = 1.0f;

    LayerWeights& w = ckpt.layers[0];

    if (copy_chain) {
        const CopyChainSpec& cc = *copy_chain;
        if (cc.chain.empty()) throw ConfigError("copy chain must be nonempty");
        const std::int64_t n_dirs =
            static_cast<std::int64_t>(cc.chain.size()) + (cc.stop_beacon ? 1 : 0);
        if (kFirstSlowPair + n_dirs > layout.d_head / 2)
            throw ConfigError("copy chain needs " + std::to_string(n_dirs) +
                              " rotary pairs but d_head/2 - 2 = " +
                              std::to_string(layout.d_head / 2 - kFirstSlowPair));

        // direction s lives in rotary pair (kFirstSlowPair + s) of head 0;
        // q/k amplitudes put the matched score around 400 after 1/sqrt(d).
        const float q_amp = 40.0f, k_amp = 40.0f;
        auto pair_col = [&](std::int64_t dir) { return 2 * (kFirstSlowPair + dir); };
        auto query_dir = [&](tok::TokenId from, std::int64_t dir) {
            w.q_proj.at(id_of(from), pair_col(dir)) = q_amp;
        };
        auto key_dir = [&](tok::TokenId at, std::int64_t dir) {
            w.k_proj.at(id_of(at), pair_col(dir)) = k_amp;
        };

        const std::int64_t stop_dir = static_cast<std::int64_t>(cc.chain.size());
        for (tok::TokenId trig : cc.triggers) query_dir(trig, 0);
        for (std::size_t i = 0; i < cc.chain.size(); ++i) {
            const std::int64_t next_dir =
                (i + 1 < cc.chain.size()) ? static_cast<std::int64_t>(i + 1) : stop_dir;
            key_dir(cc.chain[i], static_cast<std::int64_t>(i));
            if (cc.stop_beacon || i + 1 < cc.chain.size()) query_dir(cc.chain[i], next_dir);
        }
        if (cc.stop_beacon) {
            key_dir(*cc.stop_beacon, stop_dir);
            query_dir(cc.terminator, stop_dir);
        }

        // value/output wiring: attending chain[i] emits chain[i]; attending
        // the stop beacon emits the terminator.
        for (std::size_t i = 0; i < cc.chain.size(); ++i) {
            w.v_proj.at(id_of(cc.chain[i]), static_cast<std::int64_t>(i)) = 1.0f;
            w.o_proj.at(static_cast<std::int64_t>(i), emit_of(cc.chain[i])) = cc.logit;
        }
        if (cc.stop_beacon) {
            w.v_proj.at(id_of(*cc.stop_beacon), stop_dir) = 1.0f;
            w.o_proj.at(stop_dir, emit_of(cc.terminator)) = cc.logit;
        }
    }

    if (!memory.pairs.empty()) {
        if (static_cast<std::int64_t>(memory.pairs.size()) > layout.d_ffn)
            throw ConfigError("successor memory needs " + std::to_string(memory.pairs.size()) +
                              " neurons but d_ffn is " + std::to_string(layout.d_ffn));
        std::int64_t neuron = 0;
        for (const auto& [key, value] : memory.pairs) {
            w.ffn_in.at(id_of(key), neuron) = 1.0f;
            w.ffn_out.at(neuron, emit_of(value)) = memory.logit;
            ++neuron;
        }
    }

    ckpt.validate();
    return ckpt;
}

Checkpoint make_memory_model(const ProbeModelLayout& layout, const SuccessorSpec& memory) {
    return build_probe_model(layout, std::nullopt, memory);
}

namespace {

tok::TokenId ch(char c) { return static_cast<tok::TokenId>(c); }

}  // namespace

Checkpoint demo_copy_head_model() {
    ProbeModelLayout layout;
    layout.id_tokens = {ch('>'), ch('K'), ch('L'), ch('M'), ch('?'), ch('.')};
    layout.emit_tokens = {ch('K'), ch('L'), ch('M'), ch('.')};
    CopyChainSpec chain;
    chain.triggers = {ch('>')};
    chain.chain = {ch('K'), ch('L'), ch('M')};
    chain.stop_beacon = ch('?');
    chain.terminator = ch('.');
    return build_probe_model(layout, chain, {});
}

std::string demo_needle_config_json() {
    return R"({
  "needle": "the magic word is KLM.",
  "answer": "KLM",
  "question": " what is the magic word? >",
  "haystack": "lorem ipsum dolor sit amet consectetur adipiscing elit sed do eiusmod tempor incididunt ut labore et dolore magna aliqua ",
  "context_lengths": [0, 64, 128, 256, 512],
  "depth_fractions": [0.0, 0.25, 0.5, 0.75, 1.0],
  "repetitions": 1,
  "max_new": 5
}
)";
}

ProbeModelLayout demo_conflict_layout() {
    ProbeModelLayout layout;
    layout.id_tokens = {ch('A'), ch('B'), ch('C'), ch('D'), ch('u'), ch('v'), ch('w'),
                        ch('x'), ch('y'), ch('z'), ch('s'), ch('t'), ch('K'), ch('L'),
                        ch(':'), ch('.')};
    layout.emit_tokens = {ch('u'), ch('v'), ch('w'), ch('x'), ch('y'), ch('z'),
                          ch('s'), ch('t'), ch('K'), ch('L'), ch('.')};
    return layout;
}

SuccessorSpec demo_conflict_memory() {
    SuccessorSpec memory;
    memory.pairs = {{ch('A'), ch('u')}, {ch('u'), ch('v')}, {ch('B'), ch('w')},
                    {ch('w'), ch('x')}, {ch('C'), ch('y')}, {ch('y'), ch('z')},
                    {ch('D'), ch('s')}, {ch('s'), ch('t')}, {ch('v'), ch('.')},
                    {ch('x'), ch('.')}, {ch('z'), ch('.')}, {ch('t'), ch('.')},
                    {ch('.'), ch('.')}};
    return memory;
}

Checkpoint demo_parametric_model() {
    return make_memory_model(demo_conflict_layout(), demo_conflict_memory());
}

Checkpoint demo_contextual_model() {
    CopyChainSpec chain;
    chain.triggers = {ch('A'), ch('B'), ch('C'), ch('D')};
    chain.chain = {ch('K'), ch('L')};
    chain.stop_beacon = ch(':');
    chain.terminator = ch('.');
    chain.logit = 1.0f;
    SuccessorSpec memory = demo_conflict_memory();
    memory.logit = 0.5f;
    return build_probe_model(demo_conflict_layout(), chain, memory);
}

std::string demo_facts_jsonl() {
    return R"({"subject":"A","relation":"capital","true_value":"uv","conflict_value":"KL","domain":"custom"}
{"subject":"B","relation":"capital","true_value":"wx","conflict_value":"KL","domain":"custom"}
{"subject":"C","relation":"capital","true_value":"yz","conflict_value":"KL","domain":"custom"}
{"subject":"D","relation":"capital","true_value":"st","conflict_value":"KL","domain":"custom"}
)";
}

std::string demo_conflict_templates_json() {
    return R"({
  "question": "what is the capital of {subject}",
  "conflict_statement": "{subject} is {conflict_value} now.",
  "injection": "you should know: {statement} {question}"
}
)";
}

}  // namespace probeforge::synth
