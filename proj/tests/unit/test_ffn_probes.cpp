#include <doctest.h>

#include <cmath>
#include <random>

#include "probeforge/errors.hpp"
#include "probeforge/ffn_probes.hpp"
#include "probeforge/synth.hpp"

using namespace probeforge;

namespace {

ModelConfig ffn_config() {
    ModelConfig cfg;
    cfg.n_layers = 2;
    cfg.n_heads = 2;
    cfg.d_head = 4;
    cfg.d_model = 8;
    cfg.d_ffn = 10;
    cfg.vocab_size = 24;
    cfg.max_seq_len = 64;
    return cfg;
}

std::vector<std::vector<tok::TokenId>> random_prompts(std::int64_t count, std::int64_t max_len,
                                                      std::int64_t vocab, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> len_dist(1, max_len);
    std::uniform_int_distribution<tok::TokenId> tok_dist(0, static_cast<tok::TokenId>(vocab - 1));
    std::vector<std::vector<tok::TokenId>> prompts(static_cast<std::size_t>(count));
    for (auto& p : prompts) {
        p.resize(static_cast<std::size_t>(len_dist(rng)));
        for (auto& t : p) t = tok_dist(rng);
    }
    return prompts;
}

// full-materialization oracle: collect every activation, then compute stats
ActivationStats materialized_oracle(const Checkpoint& ckpt,
                                    std::span<const std::vector<tok::TokenId>> prompts,
                                    double tau) {
    const std::int64_t n_layers = ckpt.config.n_layers;
    std::vector<std::vector<double>> all(static_cast<std::size_t>(n_layers));
    for (const auto& prompt : prompts) {
        ForwardOptions opts;
        opts.trace = true;
        const ForwardResult fr = forward(ckpt, prompt, opts);
        for (std::int64_t l = 0; l < n_layers; ++l)
            for (float v : fr.trace->ffn_act[static_cast<std::size_t>(l)].data)
                all[static_cast<std::size_t>(l)].push_back(static_cast<double>(v));
    }
    ActivationStats stats;
    stats.tau = tau;
    stats.sample_count = static_cast<std::int64_t>(all[0].size());
    for (const auto& values : all) {
        double sum = 0.0;
        for (double v : values) sum += v;
        const double mean = sum / static_cast<double>(values.size());
        double ss = 0.0;
        std::int64_t small = 0;
        for (double v : values) {
            ss += (v - mean) * (v - mean);
            if (std::fabs(v) <= tau) ++small;
        }
        LayerActivationStats layer;
        layer.mean = mean;
        layer.variance = ss / static_cast<double>(values.size());
        layer.sparsity = static_cast<double>(small) / static_cast<double>(values.size());
        stats.per_layer.push_back(layer);
    }
    return stats;
}

}  // namespace

TEST_CASE("all-zero FFN input weights give constant activations") {
    const Checkpoint ckpt = zero_checkpoint(ffn_config());  // silu, g(0) = 0
    const std::vector<std::vector<tok::TokenId>> prompts{{1, 2, 3}, {4, 5}};
    const ActivationStats stats = collect_activation_stats(ckpt, prompts, 1e-3);
    CHECK(stats.sample_count == 5 * ffn_config().d_ffn);
    for (const auto& layer : stats.per_layer) {
        CHECK(layer.mean == 0.0);
        CHECK(layer.variance == 0.0);
        CHECK(layer.sparsity == 1.0);
    }
}

TEST_CASE("hand arithmetic: activations {1,-1,0,0}") {
    const std::vector<std::vector<double>> layers{{1.0, -1.0, 0.0, 0.0}};
    const ActivationStats stats = activation_stats_from_values(layers, 1e-3);
    REQUIRE(stats.per_layer.size() == 1);
    CHECK(stats.per_layer[0].mean == 0.0);
    CHECK(stats.per_layer[0].variance == doctest::Approx(0.5));
    CHECK(stats.per_layer[0].sparsity == 0.5);
    CHECK(stats.sample_count == 4);
}

TEST_CASE("streaming statistics equal the full-materialization oracle") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        ModelConfig cfg = ffn_config();
        cfg.activation = trial % 2 == 0 ? Activation::Silu : Activation::Relu;
        const Checkpoint ckpt = synth::random_checkpoint(cfg, 1000 + trial);
        const auto prompts = random_prompts(6, 12, cfg.vocab_size, 50 + trial);
        const double tau = trial % 3 == 0 ? 0.0 : 1e-3;

        const ActivationStats got = collect_activation_stats(ckpt, prompts, tau);
        const ActivationStats expect = materialized_oracle(ckpt, prompts, tau);
        REQUIRE(got.per_layer.size() == expect.per_layer.size());
        CHECK(got.sample_count == expect.sample_count);
        for (std::size_t l = 0; l < got.per_layer.size(); ++l) {
            CHECK(std::fabs(got.per_layer[l].mean - expect.per_layer[l].mean) <= 1e-6);
            CHECK(std::fabs(got.per_layer[l].variance - expect.per_layer[l].variance) <= 1e-6);
            CHECK(got.per_layer[l].sparsity == expect.per_layer[l].sparsity);
        }
    }
}

TEST_CASE("sparsity is monotone nondecreasing in tau") {
    const Checkpoint ckpt = synth::random_checkpoint(ffn_config(), 301);
    const auto prompts = random_prompts(4, 10, ffn_config().vocab_size, 301);
    double prev = -1.0;
    for (double tau : {0.0, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 100.0}) {
        const ActivationStats stats = collect_activation_stats(ckpt, prompts, tau);
        double mean_sparsity = 0.0;
        for (const auto& layer : stats.per_layer) mean_sparsity += layer.sparsity;
        mean_sparsity /= static_cast<double>(stats.per_layer.size());
        CHECK(mean_sparsity >= prev);
        prev = mean_sparsity;
    }
}

TEST_CASE("statistics are invariant to prompt ordering") {
    const Checkpoint ckpt = synth::random_checkpoint(ffn_config(), 302);
    auto prompts = random_prompts(5, 10, ffn_config().vocab_size, 302);
    const ActivationStats a = collect_activation_stats(ckpt, prompts, 1e-3);
    std::reverse(prompts.begin(), prompts.end());
    const ActivationStats b = collect_activation_stats(ckpt, prompts, 1e-3);
    for (std::size_t l = 0; l < a.per_layer.size(); ++l) {
        CHECK(std::fabs(a.per_layer[l].mean - b.per_layer[l].mean) <= 1e-9);
        CHECK(std::fabs(a.per_layer[l].variance - b.per_layer[l].variance) <= 1e-9);
        CHECK(a.per_layer[l].sparsity == b.per_layer[l].sparsity);
    }
}

TEST_CASE("relu sparsity at tau=0 counts exact zeros") {
    ModelConfig cfg = ffn_config();
    cfg.activation = Activation::Relu;
    const Checkpoint ckpt = synth::random_checkpoint(cfg, 303);
    const auto prompts = random_prompts(3, 8, cfg.vocab_size, 303);

    const ActivationStats stats = collect_activation_stats(ckpt, prompts, 0.0);
    const ActivationStats oracle = materialized_oracle(ckpt, prompts, 0.0);
    for (std::size_t l = 0; l < stats.per_layer.size(); ++l)
        CHECK(stats.per_layer[l].sparsity == oracle.per_layer[l].sparsity);
    // relu zeroes a nontrivial fraction of random pre-activations
    CHECK(stats.per_layer[0].sparsity > 0.0);
}

TEST_CASE("empty prompt list is rejected") {
    const Checkpoint ckpt = zero_checkpoint(ffn_config());
    CHECK_THROWS_AS(collect_activation_stats(ckpt, {}, 1e-3), InputError);
}

TEST_CASE("relative difference: identities and the documented arithmetic") {
    CHECK(relative_difference(5.0, 5.0) == 0.0);
    CHECK(relative_difference(2.0, 1.0) == 1.0);
    CHECK(relative_difference(92.91, 90.55) == doctest::Approx(0.02606).epsilon(1e-3));
    CHECK_THROWS_AS(relative_difference(1.0, 0.0), UndefinedBaselineError);
}

TEST_CASE("relative difference matches direct evaluation on random pairs") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> dist(-10.0, 10.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double c = dist(rng);
        double u = dist(rng);
        if (u == 0.0) u = 1.0;
        CHECK(std::fabs(relative_difference(c, u) - (c - u) / u) <= 1e-9);
    }
}

TEST_CASE("stats profile diff: identities and elementwise formula") {
    auto stats_of = [](std::vector<LayerActivationStats> layers, double tau) {
        ActivationStats s;
        s.per_layer = std::move(layers);
        s.tau = tau;
        s.sample_count = 100;
        return s;
    };

    const ActivationStats a =
        stats_of({{1.0, 2.0, 0.5}, {3.0, 4.0, 0.25}}, 1e-3);
    const auto self_diff = stats_profile_diff(a, a);
    for (const auto& d : self_diff) {
        CHECK(d.d_mean == 0.0);
        CHECK(d.d_variance == 0.0);
        CHECK(d.d_sparsity == 0.0);
    }

    const ActivationStats doubled =
        stats_of({{2.0, 4.0, 1.0}, {6.0, 8.0, 0.5}}, 1e-3);
    const auto diff = stats_profile_diff(doubled, a);
    for (const auto& d : diff) {
        CHECK(d.d_mean == doctest::Approx(1.0));
        CHECK(d.d_variance == doctest::Approx(1.0));
        CHECK(d.d_sparsity == doctest::Approx(1.0));
    }

    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> dist(0.1, 5.0);
    std::vector<LayerActivationStats> la, lb;
    for (int l = 0; l < 4; ++l) {
        la.push_back({dist(rng), dist(rng), dist(rng)});
        lb.push_back({dist(rng), dist(rng), dist(rng)});
    }
    const auto rand_diff = stats_profile_diff(stats_of(la, 0.5), stats_of(lb, 0.5));
    for (std::size_t l = 0; l < rand_diff.size(); ++l) {
        CHECK(rand_diff[l].d_mean == doctest::Approx((la[l].mean - lb[l].mean) / lb[l].mean));
        CHECK(rand_diff[l].d_variance ==
              doctest::Approx((la[l].variance - lb[l].variance) / lb[l].variance));
        CHECK(rand_diff[l].d_sparsity ==
              doctest::Approx((la[l].sparsity - lb[l].sparsity) / lb[l].sparsity));
    }

    CHECK_THROWS_AS(stats_profile_diff(a, stats_of({{1, 1, 1}}, 1e-3)), CompatibilityError);
    const ActivationStats other_tau = stats_of({{1.0, 2.0, 0.5}, {3.0, 4.0, 0.25}}, 1e-2);
    CHECK_THROWS_AS(stats_profile_diff(a, other_tau), CompatibilityError);
}
