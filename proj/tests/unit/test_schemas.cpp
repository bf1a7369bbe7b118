#include <doctest.h>

#include "probeforge/errors.hpp"
#include "probeforge/schemas.hpp"

using namespace probeforge;
using nlohmann::json;

TEST_CASE("head matrix json round-trip") {
    HeadMatrix m = HeadMatrix::zeros(2, 3);
    m.at(0, 1) = 0.5;
    m.at(1, 2) = -0.25;
    const HeadMatrix back = schemas::head_matrix_from_json(schemas::head_matrix_to_json(m));
    CHECK(back.n_layers == 2);
    CHECK(back.n_heads == 3);
    CHECK(back.values == m.values);

    json bad = schemas::head_matrix_to_json(m);
    bad["data"] = std::vector<double>{1.0};
    CHECK_THROWS_AS(schemas::head_matrix_from_json(bad), FormatError);
}

TEST_CASE("needle config json round-trip and random mode") {
    const json j{{"needle", "answer X here"},
                 {"answer", "X"},
                 {"question", " q?"},
                 {"haystack", "filler words "},
                 {"context_lengths", {0, 8}},
                 {"depth_fractions", {0.0, 1.0}},
                 {"repetitions", 2},
                 {"threshold", 0.25}};
    const NeedleConfig cfg = schemas::needle_config_from_json(j);
    CHECK(cfg.answer == "X");
    CHECK(cfg.repetitions == 2);
    CHECK(cfg.threshold == 0.25);
    const NeedleConfig back =
        schemas::needle_config_from_json(schemas::needle_config_to_json(cfg));
    CHECK(back.context_lengths == cfg.context_lengths);
    CHECK(back.depth_fractions == cfg.depth_fractions);

    json random = j;
    random["depth_fractions"] = "random";
    random["seed"] = 9;
    const NeedleConfig rnd = schemas::needle_config_from_json(random);
    CHECK(rnd.random_depths);
    CHECK(rnd.seed == 9);

    json bad = j;
    bad["depth_fractions"] = {1.5};
    CHECK_THROWS_AS(schemas::needle_config_from_json(bad), ConfigError);
}

TEST_CASE("activation stats json round-trip") {
    ActivationStats stats;
    stats.tau = 1e-3;
    stats.sample_count = 60;
    stats.per_layer = {{0.5, 0.25, 0.1}, {1.5, 2.0, 0.4}};
    const ActivationStats back =
        schemas::activation_stats_from_json(schemas::activation_stats_to_json(stats));
    CHECK(back.tau == stats.tau);
    CHECK(back.sample_count == 60);
    REQUIRE(back.per_layer.size() == 2);
    CHECK(back.per_layer[1].variance == 2.0);
}

TEST_CASE("probe result json carries counts, rates and verdicts") {
    ProbeResult result;
    result.per_probe.push_back({"p1", Verdict::Parametric, "China", false});
    result.per_probe.push_back({"p2", Verdict::Other, "", true});
    result.n_parametric = 1;
    result.n_other = 1;
    const json j = schemas::probe_result_to_json(result);
    CHECK(j["counts"]["parametric"] == 1);
    CHECK(j["rates"]["parametric"] == 0.5);
    CHECK(j["per_probe"][0]["verdict"] == "parametric");
    CHECK(j["per_probe"][1]["overflow"] == true);
}
