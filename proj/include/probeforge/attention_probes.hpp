#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "probeforge/model.hpp"

namespace probeforge {

// Generic per-(layer, head) matrix of doubles, row-major.
struct HeadMatrix {
    std::int64_t n_layers = 0;
    std::int64_t n_heads = 0;
    std::vector<double> values;

    static HeadMatrix zeros(std::int64_t layers, std::int64_t heads);
    double at(std::int64_t layer, std::int64_t head) const;
    double& at(std::int64_t layer, std::int64_t head);
    bool same_shape(const HeadMatrix& o) const {
        return n_layers == o.n_layers && n_heads == o.n_heads;
    }
};

// Needle-in-a-haystack suite configuration. The needle is a carrier
// sentence with the answer embedded in it; `answer` marks which part is
// scored (empty means the whole needle). Context lengths count filler
// tokens; the needle is inserted at each depth fraction of the filler.
struct NeedleConfig {
    std::string needle;
    std::string answer;
    std::string question;
    std::string haystack_source;
    std::vector<std::int64_t> context_lengths = {0, 64, 128, 256, 512};
    std::vector<double> depth_fractions = {0.0, 0.25, 0.5, 0.75, 1.0};
    bool random_depths = false;  // one seeded uniform depth per (length, repetition)
    std::uint64_t seed = 0;
    std::int64_t repetitions = 1;
    std::int64_t max_new = 0;  // 0 -> answer token count + 2
    double threshold = 0.1;    // retrieval-head cut, used by reports

    void validate() const;
};

struct RetrievalScoreMap {
    HeadMatrix scores;  // mean over configurations, every entry in [0,1]
    struct ConfigResult {
        std::int64_t context_length = 0;
        double depth = 0.0;
        std::int64_t repetition = 0;
        HeadMatrix scores;
    };
    std::vector<ConfigResult> per_config;
};

// Runs the full (length x depth x repetition) grid. Per head and
// configuration the score is |g_h ∩ k| / |k| where k is the set of answer
// token positions and g_h collects positions that were argmax-attended by
// the head at a step whose generated token equals the attended one.
RetrievalScoreMap run_needle_suite(const Checkpoint& ckpt, const NeedleConfig& cfg);

// Heads with score strictly above the threshold.
std::set<std::pair<std::int64_t, std::int64_t>> classify_retrieval_heads(
    const RetrievalScoreMap& map, double threshold);

std::set<std::pair<std::int64_t, std::int64_t>> retrieval_head_intersection(
    std::span<const RetrievalScoreMap> maps, double threshold);

// Sum over all per-head scores (sum, not mean: matches the magnitude of
// whole-model scores reported as >1).
double overall_retrieval_score(const RetrievalScoreMap& map);

// Elementwise a - b.
HeadMatrix score_difference_map(const RetrievalScoreMap& a, const RetrievalScoreMap& b);

// Shannon entropy (nats) of one attention row, 0*log0 == 0.
double attention_row_entropy(const Tensor& attn, std::int64_t row);

struct PhaseEntropy {
    HeadMatrix per_head;            // mean entropy over the phase's decode steps
    std::vector<double> per_layer;  // mean over heads
    std::int64_t steps = 0;
};

struct EntropyProfile {
    std::optional<PhaseEntropy> reasoning;
    std::optional<PhaseEntropy> answering;
};

// Per-head mean attention entropy of each decode step's generating row,
// split into reasoning (step < phase_split) and answering (step >=
// phase_split) phases. An empty phase is reported absent.
EntropyProfile attention_entropy(std::span<const TraceRecord> step_traces,
                                 std::int64_t phase_split);

enum class EntropyQuadrant {
    FavorableA,   // a reasons with higher entropy and answers with lower
    FavorableB,   // the mirror image
    AHigherBoth,  // a has higher entropy in both phases
    ALowerBoth,   // a has lower entropy in both phases
    Neutral,      // at least one difference is exactly zero
};

std::string quadrant_name(EntropyQuadrant q);

struct LayerEntropyDelta {
    double d_reasoning = 0.0;  // a minus b
    double d_answering = 0.0;
    EntropyQuadrant quadrant = EntropyQuadrant::Neutral;
};

// Per-layer (reasoning, answering) entropy differences a - b with a
// quadrant label per layer. Both profiles must carry both phases.
std::vector<LayerEntropyDelta> entropy_difference(const EntropyProfile& a,
                                                  const EntropyProfile& b);

}  // namespace probeforge
