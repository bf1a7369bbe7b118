#include <doctest.h>

#include "probeforge/checkpoint_io.hpp"
#include "probeforge/errors.hpp"
#include "probeforge/model.hpp"
#include "probeforge/swap.hpp"
#include "probeforge/synth.hpp"
#include "probeforge/tokenizer.hpp"

using namespace probeforge;

namespace {

ModelConfig swap_config() {
    ModelConfig cfg;
    cfg.n_layers = 3;
    cfg.n_heads = 2;
    cfg.d_head = 4;
    cfg.d_model = 8;
    cfg.d_ffn = 6;
    cfg.vocab_size = 16;
    cfg.max_seq_len = 32;
    return cfg;
}

bool starts_with(const std::string& s, const std::string& prefix) {
    return s.rfind(prefix, 0) == 0;
}

}  // namespace

TEST_CASE("self-swap is the identity on checkpoint bytes") {
    const Checkpoint a = synth::random_checkpoint(swap_config(), 21);
    const std::string original = serialize_checkpoint(a);
    for (ModuleKind kind : {ModuleKind::Mha, ModuleKind::Ffn}) {
        SwapSpec spec;
        spec.module_kind = kind;
        CHECK(serialize_checkpoint(swap_module(a, a, spec)) == original);
    }
}

TEST_CASE("swap round-trip through a donor restores the recipient bit-exactly") {
    const Checkpoint a = synth::random_checkpoint(swap_config(), 22);
    const Checkpoint b = synth::random_checkpoint(swap_config(), 23);
    const std::string original = serialize_checkpoint(a);
    SwapSpec ffn;
    ffn.module_kind = ModuleKind::Ffn;
    const Checkpoint swapped = swap_module(a, b, ffn);
    const Checkpoint restored = swap_module(swapped, a, ffn);
    CHECK(serialize_checkpoint(restored) == original);
}

TEST_CASE("swap is idempotent") {
    const Checkpoint a = synth::random_checkpoint(swap_config(), 24);
    const Checkpoint b = synth::random_checkpoint(swap_config(), 25);
    SwapSpec mha;
    mha.module_kind = ModuleKind::Mha;
    const Checkpoint once = swap_module(a, b, mha);
    const Checkpoint twice = swap_module(once, b, mha);
    CHECK(serialize_checkpoint(once) == serialize_checkpoint(twice));
}

TEST_CASE("swap footprint: only the swapped module's tensors differ") {
    const Checkpoint a = synth::random_checkpoint(swap_config(), 26);
    const Checkpoint b = synth::random_checkpoint(swap_config(), 27);

    SwapSpec mha;
    mha.module_kind = ModuleKind::Mha;
    const auto mha_diff = diff_checkpoints(a, swap_module(a, b, mha));
    for (const auto& [name, value] : mha_diff) {
        const bool is_attn = name.find(".attn.") != std::string::npos;
        if (is_attn)
            CHECK(value > 0.0f);
        else
            CHECK(value == 0.0f);
    }

    SwapSpec ffn;
    ffn.module_kind = ModuleKind::Ffn;
    const auto ffn_diff = diff_checkpoints(a, swap_module(a, b, ffn));
    for (const auto& [name, value] : ffn_diff) {
        const bool is_ffn = name.find(".ffn.") != std::string::npos;
        if (is_ffn)
            CHECK(value > 0.0f);
        else
            CHECK(value == 0.0f);
    }
}

TEST_CASE("layer-range swap touches only the selected layers") {
    const Checkpoint a = synth::random_checkpoint(swap_config(), 28);
    const Checkpoint b = synth::random_checkpoint(swap_config(), 29);
    SwapSpec spec;
    spec.module_kind = ModuleKind::Mha;
    spec.layer_range = {{1, 1}};
    const auto diff = diff_checkpoints(a, swap_module(a, b, spec));
    for (const auto& [name, value] : diff) {
        if (starts_with(name, "layer.1.attn."))
            CHECK(value > 0.0f);
        else
            CHECK(value == 0.0f);
    }
    spec.layer_range = {{2, 5}};
    CHECK_THROWS_AS(swap_module(a, b, spec), ConfigError);
}

TEST_CASE("config mismatch lists the differing fields") {
    const Checkpoint a = synth::random_checkpoint(swap_config(), 30);
    ModelConfig other = swap_config();
    other.d_ffn = 12;
    other.vocab_size = 24;
    const Checkpoint b = synth::random_checkpoint(other, 31);
    SwapSpec spec;
    try {
        swap_module(a, b, spec);
        FAIL("expected CompatibilityError");
    } catch (const CompatibilityError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("d_ffn") != std::string::npos);
        CHECK(msg.find("vocab_size") != std::string::npos);
    }
    CHECK_THROWS_AS(diff_checkpoints(a, b), CompatibilityError);
}

TEST_CASE("diff matches a naive elementwise oracle") {
    const Checkpoint a = synth::random_checkpoint(swap_config(), 32);
    const Checkpoint b = synth::random_checkpoint(swap_config(), 33);
    const auto diff = diff_checkpoints(a, b);

    const auto self_diff = diff_checkpoints(a, a);
    for (const auto& [name, value] : self_diff) CHECK(value == 0.0f);

    // independent elementwise scan over every tensor
    std::map<std::string, const Tensor*> b_by_name;
    for_each_tensor(b, [&](const std::string& name, const Tensor& t) { b_by_name[name] = &t; });
    std::size_t checked = 0;
    for_each_tensor(a, [&](const std::string& name, const Tensor& t) {
        float expect = 0.0f;
        const Tensor& other = *b_by_name.at(name);
        for (std::size_t i = 0; i < t.data.size(); ++i)
            expect = std::max(expect, std::abs(t.data[i] - other.data[i]));
        CHECK(diff.at(name) == expect);
        ++checked;
    });
    CHECK(checked == diff.size());
}

TEST_CASE("donor FFN carries a memorized fact into the recipient") {
    using synth::ProbeModelLayout;
    using synth::SuccessorSpec;

    const auto id = [](char c) { return static_cast<tok::TokenId>(c); };
    ProbeModelLayout layout;
    layout.id_tokens = {id('A'), id('x'), id('y')};
    layout.emit_tokens = {id('x'), id('y'), id('.')};

    SuccessorSpec facts;
    facts.pairs = {{id('A'), id('x')}, {id('x'), id('y')}, {id('y'), id('.')}};

    const Checkpoint without = synth::make_memory_model(layout, {});
    const Checkpoint with = synth::make_memory_model(layout, facts);

    const std::vector<tok::TokenId> prompt = tok::encode("capital of A");
    const GenerationOutput before = generate_greedy(without, prompt, 3);
    CHECK(tok::decode(before.generated_tokens) != "xy.");

    SwapSpec spec;
    spec.module_kind = ModuleKind::Ffn;
    const Checkpoint transplanted = swap_module(without, with, spec);
    const GenerationOutput after = generate_greedy(transplanted, prompt, 3);
    CHECK(tok::decode(after.generated_tokens) == "xy.");

    // attention tensors were untouched by the FFN swap
    const auto diff = diff_checkpoints(without, transplanted);
    for (const auto& [name, value] : diff)
        if (name.find(".attn.") != std::string::npos || name == "embed.tok" ||
            name == "head.out")
            CHECK(value == 0.0f);
}
