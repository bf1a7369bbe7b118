// probeforge-gen: bundled generator for synthetic workbench assets
// (toy checkpoints, corpora, fact sets) so every CLI subcommand can be
// exercised without external data.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "probeforge/checkpoint_io.hpp"
#include "probeforge/errors.hpp"
#include "probeforge/synth.hpp"
#include "probeforge/util.hpp"
#include "probeforge/version.hpp"

namespace pf = probeforge;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

pf::ModelConfig toy_config() {
    pf::ModelConfig cfg;
    cfg.n_layers = 2;
    cfg.n_heads = 2;
    cfg.d_head = 8;
    cfg.d_model = 16;
    cfg.d_ffn = 32;
    cfg.vocab_size = pf::tok::kByteVocabSize;
    cfg.max_seq_len = 768;
    return cfg;
}

std::string synthetic_corpus(std::int64_t samples, std::int64_t tokens_per_sample,
                             std::uint64_t seed, const std::string& tag) {
    static const char* kWords[] = {"alpha", "bravo", "carbon", "delta",  "ember",
                                   "fjord", "gamma", "helix",  "indigo", "jasper"};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, std::size(kWords) - 1);
    std::string out;
    for (std::int64_t i = 0; i < samples; ++i) {
        std::string text;
        while (static_cast<std::int64_t>(text.size()) < tokens_per_sample) {
            if (!text.empty()) text += " ";
            text += kWords[pick(rng)];
        }
        text.resize(static_cast<std::size_t>(tokens_per_sample), 'x');
        json j{{"id", tag + "-" + std::to_string(i)}, {"text", text}};
        out += j.dump() + "\n";
    }
    return out;
}

std::string demo_facts() {
    json lines = json::array();
    lines.push_back(json{{"subject", "Shijiazhuang"},
                         {"relation", "located_in"},
                         {"true_value", "China"},
                         {"conflict_value", "USA"},
                         {"domain", "geography"}});
    lines.push_back(json{{"subject", "Harbin"},
                         {"relation", "located_in"},
                         {"true_value", "China"},
                         {"conflict_value", "Canada"},
                         {"domain", "geography"}});
    lines.push_back(json{{"subject", "Lyon"},
                         {"relation", "located_in"},
                         {"true_value", "France"},
                         {"conflict_value", "Brazil"},
                         {"domain", "geography"}});
    std::string out;
    for (const json& j : lines) out += j.dump() + "\n";
    return out;
}

std::string demo_needle_config() {
    json j{{"needle", "the vault code is KLM."},
           {"answer", "KLM"},
           {"question", " what is the vault code? >"},
           {"haystack",
            "rivers wind through quiet valleys while distant hills gather morning fog "},
           {"context_lengths", {0, 32, 64}},
           {"depth_fractions", {0.0, 0.5, 1.0}},
           {"repetitions", 1},
           {"max_new", 5}};
    return j.dump(2) + "\n";
}

void write(const fs::path& path, const std::string& bytes) {
    pf::util::atomic_write_file(path.string(), bytes);
    std::cout << "wrote " << path.string() << "\n";
}

void run_toy_pair(const std::string& out_dir, std::uint64_t seed) {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    const pf::ModelConfig cfg = toy_config();
    pf::save_checkpoint(pf::synth::random_checkpoint(cfg, seed), (dir / "a.ckpt").string());
    std::cout << "wrote " << (dir / "a.ckpt").string() << "\n";
    pf::save_checkpoint(pf::synth::random_checkpoint(cfg, seed + 1), (dir / "b.ckpt").string());
    std::cout << "wrote " << (dir / "b.ckpt").string() << "\n";

    write(dir / "needle.json", demo_needle_config());
    write(dir / "prompts.txt",
          "the quick brown fox jumps over the lazy dog\n"
          "pack my box with five dozen liquor jugs\n"
          "how vexingly quick daft zebras jump\n");
    write(dir / "facts.jsonl", demo_facts());
    write(dir / "long.jsonl", synthetic_corpus(64, 600, seed + 2, "long"));
    write(dir / "short.jsonl", synthetic_corpus(256, 80, seed + 3, "short"));

    json manifest = json::array();
    manifest.push_back(json{{"label", "a"}, {"path", (dir / "a.ckpt").string()}});
    manifest.push_back(json{{"label", "b"}, {"path", (dir / "b.ckpt").string()}});
    write(dir / "ckpts.json", manifest.dump(2) + "\n");
}

// models with provable probe behavior: a copy head that retrieves the demo
// needle, and a parametric/contextual pair that flips under injected
// conflicts
void run_probe_kit(const std::string& out_dir) {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    pf::save_checkpoint(pf::synth::demo_copy_head_model(), (dir / "copy_head.ckpt").string());
    std::cout << "wrote " << (dir / "copy_head.ckpt").string() << "\n";
    write(dir / "needle.json", pf::synth::demo_needle_config_json());

    pf::save_checkpoint(pf::synth::demo_parametric_model(), (dir / "parametric.ckpt").string());
    std::cout << "wrote " << (dir / "parametric.ckpt").string() << "\n";
    pf::save_checkpoint(pf::synth::demo_contextual_model(), (dir / "contextual.ckpt").string());
    std::cout << "wrote " << (dir / "contextual.ckpt").string() << "\n";
    write(dir / "facts.jsonl", pf::synth::demo_facts_jsonl());
    write(dir / "templates.json", pf::synth::demo_conflict_templates_json());

    json manifest = json::array();
    manifest.push_back(json{{"label", "parametric"}, {"path", (dir / "parametric.ckpt").string()}});
    manifest.push_back(json{{"label", "contextual"}, {"path", (dir / "contextual.ckpt").string()}});
    write(dir / "ckpts.json", manifest.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("probeforge-gen ") + pf::kToolVersion +
                 " - synthetic asset generator"};
    app.require_subcommand(1);

    std::string pair_dir = "toy";
    std::uint64_t pair_seed = 1;
    CLI::App* toy_pair =
        app.add_subcommand("toy-pair", "demo kit: two toy checkpoints plus suite inputs");
    toy_pair->add_option("--out-dir", pair_dir, "output directory (default: toy)");
    toy_pair->add_option("--seed", pair_seed, "base seed (default 1)");

    std::string kit_dir = "probes";
    CLI::App* probe_kit = app.add_subcommand(
        "probe-kit", "hand-crafted models with provable retrieval/conflict behavior");
    probe_kit->add_option("--out-dir", kit_dir, "output directory (default: probes)");

    std::string ckpt_out = "model.ckpt";
    std::uint64_t ckpt_seed = 1;
    std::int64_t layers = 2, heads = 2, d_head = 8, d_ffn = 32, max_seq = 768;
    CLI::App* ckpt = app.add_subcommand("ckpt", "one random checkpoint");
    ckpt->add_option("--out", ckpt_out, "output path");
    ckpt->add_option("--seed", ckpt_seed, "seed");
    ckpt->add_option("--layers", layers, "layer count");
    ckpt->add_option("--heads", heads, "head count");
    ckpt->add_option("--d-head", d_head, "head dimension (even)");
    ckpt->add_option("--d-ffn", d_ffn, "FFN width");
    ckpt->add_option("--max-seq", max_seq, "context window");

    std::string corpus_out = "corpus.jsonl";
    std::int64_t samples = 100, tokens = 100;
    std::uint64_t corpus_seed = 1;
    CLI::App* corpus = app.add_subcommand("corpus", "synthetic JSONL corpus");
    corpus->add_option("--out", corpus_out, "output path");
    corpus->add_option("--samples", samples, "sample count");
    corpus->add_option("--tokens", tokens, "tokens per sample");
    corpus->add_option("--seed", corpus_seed, "seed");

    std::string facts_out = "facts.jsonl";
    CLI::App* facts = app.add_subcommand("facts", "demo fact records");
    facts->add_option("--out", facts_out, "output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (toy_pair->parsed()) run_toy_pair(pair_dir, pair_seed);
        if (probe_kit->parsed()) run_probe_kit(kit_dir);
        if (ckpt->parsed()) {
            pf::ModelConfig cfg;
            cfg.n_layers = layers;
            cfg.n_heads = heads;
            cfg.d_head = d_head;
            cfg.d_model = heads * d_head;
            cfg.d_ffn = d_ffn;
            cfg.max_seq_len = max_seq;
            pf::save_checkpoint(pf::synth::random_checkpoint(cfg, ckpt_seed), ckpt_out);
            std::cout << "wrote " << ckpt_out << "\n";
        }
        if (corpus->parsed())
            write(corpus_out, synthetic_corpus(samples, tokens, corpus_seed, "sample"));
        if (facts->parsed()) write(facts_out, demo_facts());
    } catch (const pf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
