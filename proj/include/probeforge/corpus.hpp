#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace probeforge {

// One line-delimited JSON sample. `raw_line` preserves the original bytes
// (unknown fields pass through untouched); `token_count` uses the
// workbench tokenizer on the `text` field.
struct CorpusSample {
    std::string raw_line;
    std::int64_t token_count = 0;
};

struct Corpus {
    std::vector<CorpusSample> samples;
    std::int64_t skipped = 0;  // unreadable lines, skipped with a warning count
};

// Parses JSONL text; lines that fail to parse or lack a string `text`
// field are counted in `skipped` rather than aborting.
Corpus parse_jsonl_corpus(const std::string& jsonl_text);

struct CorpusStats {
    std::int64_t sample_count = 0;
    std::int64_t total_tokens = 0;
    std::int64_t skipped = 0;

    // Exact quotient; throws InputError on an empty corpus.
    double avg_length() const;
};

CorpusStats compute_corpus_stats(const Corpus& corpus);

enum class LengthClass { Long, Short };

// Long iff token_count strictly exceeds the threshold.
LengthClass classify_long_short(std::int64_t token_count, std::int64_t threshold);

struct MixSpec {
    std::int64_t long_parts = 1;
    std::int64_t short_parts = 1;
    std::int64_t token_budget = 0;
    std::int64_t length_threshold = 4096;
    std::uint64_t seed = 0;

    void validate() const;
};

struct MixReport {
    std::int64_t long_tokens = 0;
    std::int64_t short_tokens = 0;
    std::int64_t long_samples = 0;
    std::int64_t short_samples = 0;
    bool shortfall = false;  // a corpus ran out before the budget was met

    std::int64_t total_tokens() const { return long_tokens + short_tokens; }
    double achieved_long_share() const;
};

struct MixResult {
    std::vector<std::string> lines;  // original sample lines, emission order
    MixReport report;
};

// Seeded sampling without replacement, alternating by token-share deficit
// against the target ratio, until the token budget is met (overshoot
// bounded by one sample). Deterministic function of the corpora bytes and
// the MixSpec, seed included.
MixResult mix_corpora(const Corpus& long_corpus, const Corpus& short_corpus,
                      const MixSpec& spec);

}  // namespace probeforge
