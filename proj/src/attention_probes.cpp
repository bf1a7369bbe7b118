#include "probeforge/attention_probes.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "probeforge/errors.hpp"
#include "probeforge/tokenizer.hpp"

namespace probeforge {

HeadMatrix HeadMatrix::zeros(std::int64_t layers, std::int64_t heads) {
    HeadMatrix m;
    m.n_layers = layers;
    m.n_heads = heads;
    m.values.assign(static_cast<std::size_t>(layers * heads), 0.0);
    return m;
}

double HeadMatrix::at(std::int64_t layer, std::int64_t head) const {
    return values[static_cast<std::size_t>(layer * n_heads + head)];
}

double& HeadMatrix::at(std::int64_t layer, std::int64_t head) {
    return values[static_cast<std::size_t>(layer * n_heads + head)];
}

void NeedleConfig::validate() const {
    if (needle.empty()) throw ConfigError("needle text is empty");
    if (!answer.empty() && needle.find(answer) == std::string::npos)
        throw ConfigError("answer text does not occur inside the needle");
    for (std::int64_t len : context_lengths)
        if (len < 0) throw ConfigError("context lengths must be >= 0");
    if (!random_depths) {
        if (depth_fractions.empty()) throw ConfigError("depth_fractions is empty");
        for (double d : depth_fractions)
            if (d < 0.0 || d > 1.0) throw ConfigError("depth fractions must lie in [0,1]");
    }
    if (context_lengths.empty()) throw ConfigError("context_lengths is empty");
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (threshold < 0.0 || threshold > 1.0) throw ConfigError("threshold must lie in [0,1]");
}

namespace {

struct NeedlePlan {
    std::vector<tok::TokenId> needle_tokens;
    std::vector<tok::TokenId> question_tokens;
    std::vector<tok::TokenId> filler_tokens;
    std::int64_t answer_offset = 0;  // token offset of the answer inside the needle
    std::int64_t answer_len = 0;
    std::int64_t max_new = 0;
};

NeedlePlan plan_suite(const NeedleConfig& cfg) {
    NeedlePlan plan;
    plan.needle_tokens = tok::encode(cfg.needle);
    plan.question_tokens = tok::encode(cfg.question);
    plan.filler_tokens = tok::encode(cfg.haystack_source);

    // byte tokenizer: the answer's token offset equals its byte offset
    const std::string& answer = cfg.answer.empty() ? cfg.needle : cfg.answer;
    const std::size_t byte_off = cfg.needle.find(answer);
    plan.answer_offset = static_cast<std::int64_t>(byte_off == std::string::npos ? 0 : byte_off);
    plan.answer_len = static_cast<std::int64_t>(tok::encode(answer).size());
    if (plan.answer_len == 0) throw ConfigError("needle answer tokens are empty");

    plan.max_new = cfg.max_new > 0 ? cfg.max_new : plan.answer_len + 2;

    const std::int64_t max_ctx = *std::max_element(cfg.context_lengths.begin(),
                                                   cfg.context_lengths.end());
    if (max_ctx > 0 && plan.filler_tokens.empty())
        throw ConfigError("haystack_source is empty but context lengths are positive");
    return plan;
}

HeadMatrix score_one_config(const Checkpoint& ckpt, const NeedlePlan& plan,
                            std::int64_t context_length, double depth) {
    const std::int64_t needle_len = static_cast<std::int64_t>(plan.needle_tokens.size());
    const std::int64_t insert_pos = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::llround(depth * static_cast<double>(context_length))), 0,
        context_length);

    std::vector<tok::TokenId> prompt;
    prompt.reserve(static_cast<std::size_t>(context_length + needle_len) +
                   plan.question_tokens.size());
    for (std::int64_t i = 0; i < insert_pos; ++i)
        prompt.push_back(plan.filler_tokens[static_cast<std::size_t>(i) % plan.filler_tokens.size()]);
    prompt.insert(prompt.end(), plan.needle_tokens.begin(), plan.needle_tokens.end());
    for (std::int64_t i = insert_pos; i < context_length; ++i)
        prompt.push_back(plan.filler_tokens[static_cast<std::size_t>(i) % plan.filler_tokens.size()]);
    prompt.insert(prompt.end(), plan.question_tokens.begin(), plan.question_tokens.end());

    const std::int64_t needle_start = insert_pos;
    const std::int64_t answer_start = needle_start + plan.answer_offset;
    const std::int64_t answer_end = answer_start + plan.answer_len;

    if (static_cast<std::int64_t>(prompt.size()) + plan.max_new > ckpt.config.max_seq_len)
        throw ConfigError("needle configuration exceeds the model context budget: prompt of " +
                          std::to_string(prompt.size()) + " + " + std::to_string(plan.max_new) +
                          " new tokens vs max_seq_len " +
                          std::to_string(ckpt.config.max_seq_len));

    GenerateOptions gen_opts;
    gen_opts.trace = true;
    const GenerationOutput out = generate_greedy(ckpt, prompt, plan.max_new, gen_opts);

    const std::int64_t n_layers = ckpt.config.n_layers;
    const std::int64_t n_heads = ckpt.config.n_heads;

    // per head: set of answer positions retrieved by a matching step
    std::vector<std::set<std::int64_t>> retrieved(
        static_cast<std::size_t>(n_layers * n_heads));

    for (std::size_t s = 0; s < out.generated_tokens.size(); ++s) {
        const tok::TokenId generated = out.generated_tokens[s];
        const TraceRecord& tr = out.step_traces[s];
        const std::int64_t row = tr.seq_len - 1;
        for (std::int64_t l = 0; l < n_layers; ++l) {
            for (std::int64_t h = 0; h < n_heads; ++h) {
                const Tensor& attn = tr.attention(l, h);
                const float* arow = attn.data.data() + row * tr.seq_len;
                std::int64_t best = 0;
                for (std::int64_t j = 1; j <= row; ++j)
                    if (arow[j] > arow[best]) best = j;
                // membership needs both: argmax inside the needle span and
                // attended token identical to the token being generated
                if (best >= needle_start && best < needle_start + needle_len &&
                    best < static_cast<std::int64_t>(prompt.size()) &&
                    prompt[static_cast<std::size_t>(best)] == generated) {
                    retrieved[static_cast<std::size_t>(l * n_heads + h)].insert(best);
                }
            }
        }
    }

    HeadMatrix scores = HeadMatrix::zeros(n_layers, n_heads);
    for (std::int64_t l = 0; l < n_layers; ++l) {
        for (std::int64_t h = 0; h < n_heads; ++h) {
            const auto& set = retrieved[static_cast<std::size_t>(l * n_heads + h)];
            std::int64_t hits = 0;
            for (std::int64_t p : set)
                if (p >= answer_start && p < answer_end) ++hits;
            scores.at(l, h) = static_cast<double>(hits) / static_cast<double>(plan.answer_len);
        }
    }
    return scores;
}

}  // namespace

RetrievalScoreMap run_needle_suite(const Checkpoint& ckpt, const NeedleConfig& cfg) {
    cfg.validate();
    const NeedlePlan plan = plan_suite(cfg);

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    RetrievalScoreMap map;
    map.scores = HeadMatrix::zeros(ckpt.config.n_layers, ckpt.config.n_heads);

    for (std::int64_t len : cfg.context_lengths) {
        for (std::int64_t rep = 0; rep < cfg.repetitions; ++rep) {
            std::vector<double> depths;
            if (cfg.random_depths)
                depths.push_back(uniform(rng));
            else
                depths = cfg.depth_fractions;
            for (double depth : depths) {
                RetrievalScoreMap::ConfigResult result;
                result.context_length = len;
                result.depth = depth;
                result.repetition = rep;
                result.scores = score_one_config(ckpt, plan, len, depth);
                map.per_config.push_back(std::move(result));
            }
        }
    }

    const double n = static_cast<double>(map.per_config.size());
    for (const auto& c : map.per_config)
        for (std::size_t i = 0; i < map.scores.values.size(); ++i)
            map.scores.values[i] += c.scores.values[i];
    for (double& v : map.scores.values) v = std::clamp(v / n, 0.0, 1.0);
    return map;
}

std::set<std::pair<std::int64_t, std::int64_t>> classify_retrieval_heads(
    const RetrievalScoreMap& map, double threshold) {
    if (threshold < 0.0 || threshold > 1.0)
        throw ConfigError("retrieval-head threshold must lie in [0,1]");
    std::set<std::pair<std::int64_t, std::int64_t>> heads;
    for (std::int64_t l = 0; l < map.scores.n_layers; ++l)
        for (std::int64_t h = 0; h < map.scores.n_heads; ++h)
            if (map.scores.at(l, h) > threshold) heads.insert({l, h});
    return heads;
}

std::set<std::pair<std::int64_t, std::int64_t>> retrieval_head_intersection(
    std::span<const RetrievalScoreMap> maps, double threshold) {
    if (maps.empty()) return {};
    for (const RetrievalScoreMap& m : maps)
        if (!m.scores.same_shape(maps[0].scores))
            throw CompatibilityError("retrieval score maps have mismatched shapes");
    auto acc = classify_retrieval_heads(maps[0], threshold);
    for (std::size_t i = 1; i < maps.size(); ++i) {
        const auto next = classify_retrieval_heads(maps[i], threshold);
        std::set<std::pair<std::int64_t, std::int64_t>> merged;
        std::set_intersection(acc.begin(), acc.end(), next.begin(), next.end(),
                              std::inserter(merged, merged.begin()));
        acc = std::move(merged);
    }
    return acc;
}

double overall_retrieval_score(const RetrievalScoreMap& map) {
    double sum = 0.0;
    for (double v : map.scores.values) sum += v;
    return sum;
}

HeadMatrix score_difference_map(const RetrievalScoreMap& a, const RetrievalScoreMap& b) {
    if (!a.scores.same_shape(b.scores))
        throw CompatibilityError("retrieval score maps have mismatched shapes");
    HeadMatrix out = HeadMatrix::zeros(a.scores.n_layers, a.scores.n_heads);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = a.scores.values[i] - b.scores.values[i];
    return out;
}

double attention_row_entropy(const Tensor& attn, std::int64_t row) {
    const std::int64_t t = attn.cols();
    const float* arow = attn.data.data() + row * t;
    double entropy = 0.0;
    for (std::int64_t j = 0; j < t; ++j) {
        const double p = static_cast<double>(arow[j]);
        if (p > 0.0) entropy -= p * std::log(p);
    }
    return entropy;
}

EntropyProfile attention_entropy(std::span<const TraceRecord> step_traces,
                                 std::int64_t phase_split) {
    if (step_traces.empty()) throw InputError("attention_entropy: no decode steps");
    const std::int64_t steps = static_cast<std::int64_t>(step_traces.size());
    if (phase_split < 0 || phase_split > steps)
        throw InputError("phase_split " + std::to_string(phase_split) +
                         " outside generated range [0," + std::to_string(steps) + "]");

    const std::int64_t n_layers = step_traces[0].n_layers;
    const std::int64_t n_heads = step_traces[0].n_heads;

    auto accumulate = [&](std::int64_t begin, std::int64_t end) -> std::optional<PhaseEntropy> {
        if (begin >= end) return std::nullopt;
        PhaseEntropy phase;
        phase.steps = end - begin;
        phase.per_head = HeadMatrix::zeros(n_layers, n_heads);
        for (std::int64_t s = begin; s < end; ++s) {
            const TraceRecord& tr = step_traces[static_cast<std::size_t>(s)];
            const std::int64_t row = tr.seq_len - 1;
            for (std::int64_t l = 0; l < n_layers; ++l)
                for (std::int64_t h = 0; h < n_heads; ++h)
                    phase.per_head.at(l, h) += attention_row_entropy(tr.attention(l, h), row);
        }
        for (double& v : phase.per_head.values) v /= static_cast<double>(phase.steps);
        phase.per_layer.resize(static_cast<std::size_t>(n_layers));
        for (std::int64_t l = 0; l < n_layers; ++l) {
            double sum = 0.0;
            for (std::int64_t h = 0; h < n_heads; ++h) sum += phase.per_head.at(l, h);
            phase.per_layer[static_cast<std::size_t>(l)] = sum / static_cast<double>(n_heads);
        }
        return phase;
    };

    EntropyProfile profile;
    profile.reasoning = accumulate(0, phase_split);
    profile.answering = accumulate(phase_split, steps);
    return profile;
}

std::string quadrant_name(EntropyQuadrant q) {
    switch (q) {
        case EntropyQuadrant::FavorableA: return "favorable_a";
        case EntropyQuadrant::FavorableB: return "favorable_b";
        case EntropyQuadrant::AHigherBoth: return "a_higher_both";
        case EntropyQuadrant::ALowerBoth: return "a_lower_both";
        case EntropyQuadrant::Neutral: return "neutral";
    }
    throw ConfigError("invalid quadrant value");
}

std::vector<LayerEntropyDelta> entropy_difference(const EntropyProfile& a,
                                                  const EntropyProfile& b) {
    if (!a.reasoning || !a.answering || !b.reasoning || !b.answering)
        throw InputError("entropy_difference requires both phases in both profiles");
    if (!a.reasoning->per_head.same_shape(b.reasoning->per_head))
        throw CompatibilityError("entropy profiles have mismatched shapes");

    const std::int64_t n_layers = a.reasoning->per_head.n_layers;
    std::vector<LayerEntropyDelta> out(static_cast<std::size_t>(n_layers));
    for (std::int64_t l = 0; l < n_layers; ++l) {
        LayerEntropyDelta& d = out[static_cast<std::size_t>(l)];
        d.d_reasoning = a.reasoning->per_layer[static_cast<std::size_t>(l)] -
                        b.reasoning->per_layer[static_cast<std::size_t>(l)];
        d.d_answering = a.answering->per_layer[static_cast<std::size_t>(l)] -
                        b.answering->per_layer[static_cast<std::size_t>(l)];
        if (d.d_reasoning == 0.0 || d.d_answering == 0.0)
            d.quadrant = EntropyQuadrant::Neutral;
        else if (d.d_reasoning > 0.0 && d.d_answering < 0.0)
            d.quadrant = EntropyQuadrant::FavorableA;
        else if (d.d_reasoning < 0.0 && d.d_answering > 0.0)
            d.quadrant = EntropyQuadrant::FavorableB;
        else if (d.d_reasoning > 0.0)
            d.quadrant = EntropyQuadrant::AHigherBoth;
        else
            d.quadrant = EntropyQuadrant::ALowerBoth;
    }
    return out;
}

}  // namespace probeforge
