#include "probeforge/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "probeforge/errors.hpp"
#include "probeforge/tokenizer.hpp"
#include "probeforge/util.hpp"

namespace probeforge {

using nlohmann::json;

Corpus parse_jsonl_corpus(const std::string& jsonl_text) {
    Corpus corpus;
    for (const std::string& line : util::split(jsonl_text, '\n')) {
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            if (!j.contains("text") || !j["text"].is_string()) {
                ++corpus.skipped;
                continue;
            }
            CorpusSample sample;
            sample.raw_line = line;
            sample.token_count =
                static_cast<std::int64_t>(tok::encode(j["text"].get<std::string>()).size());
            corpus.samples.push_back(std::move(sample));
        } catch (const json::exception&) {
            ++corpus.skipped;
        }
    }
    return corpus;
}

double CorpusStats::avg_length() const {
    if (sample_count == 0)
        throw InputError("average length is undefined for an empty corpus");
    return static_cast<double>(total_tokens) / static_cast<double>(sample_count);
}

CorpusStats compute_corpus_stats(const Corpus& corpus) {
    CorpusStats stats;
    stats.sample_count = static_cast<std::int64_t>(corpus.samples.size());
    stats.skipped = corpus.skipped;
    for (const CorpusSample& s : corpus.samples) stats.total_tokens += s.token_count;
    return stats;
}

LengthClass classify_long_short(std::int64_t token_count, std::int64_t threshold) {
    return token_count > threshold ? LengthClass::Long : LengthClass::Short;
}

void MixSpec::validate() const {
    if (long_parts < 0 || short_parts < 0) throw ConfigError("mix ratio parts must be >= 0");
    if (long_parts == 0 && short_parts == 0)
        throw ConfigError("mix ratio parts must not both be zero");
    if (token_budget <= 0) throw ConfigError("token_budget must be positive");
    if (length_threshold < 0) throw ConfigError("length_threshold must be >= 0");
}

double MixReport::achieved_long_share() const {
    const std::int64_t total = total_tokens();
    return total == 0 ? 0.0 : static_cast<double>(long_tokens) / static_cast<double>(total);
}

MixResult mix_corpora(const Corpus& long_corpus, const Corpus& short_corpus,
                      const MixSpec& spec) {
    spec.validate();
    if (spec.long_parts > 0 && long_corpus.samples.empty())
        throw InputError("long corpus is empty but its ratio part is positive");
    if (spec.short_parts > 0 && short_corpus.samples.empty())
        throw InputError("short corpus is empty but its ratio part is positive");

    // independent deterministic orders for the two streams
    auto shuffled_order = [](std::size_t n, std::uint64_t seed) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(seed);
        std::shuffle(order.begin(), order.end(), rng);
        return order;
    };
    const std::vector<std::size_t> long_order =
        shuffled_order(long_corpus.samples.size(), spec.seed);
    const std::vector<std::size_t> short_order =
        shuffled_order(short_corpus.samples.size(), spec.seed ^ 0x9e3779b97f4a7c15ULL);

    MixResult result;
    std::size_t long_next = 0, short_next = 0;

    auto take_long = [&]() {
        const CorpusSample& s = long_corpus.samples[long_order[long_next++]];
        result.lines.push_back(s.raw_line);
        result.report.long_tokens += s.token_count;
        ++result.report.long_samples;
    };
    auto take_short = [&]() {
        const CorpusSample& s = short_corpus.samples[short_order[short_next++]];
        result.lines.push_back(s.raw_line);
        result.report.short_tokens += s.token_count;
        ++result.report.short_samples;
    };

    while (result.report.total_tokens() < spec.token_budget) {
        const bool long_available = spec.long_parts > 0 && long_next < long_order.size();
        const bool short_available = spec.short_parts > 0 && short_next < short_order.size();
        if (!long_available && !short_available) {
            result.report.shortfall = true;
            break;
        }
        if (!short_available) {
            // a wanted stream ran dry before the budget: partial mix
            if (spec.short_parts > 0) result.report.shortfall = true;
            take_long();
            continue;
        }
        if (!long_available) {
            if (spec.long_parts > 0) result.report.shortfall = true;
            take_short();
            continue;
        }
        // pick whichever stream is furthest below its target token share:
        // long_tokens/total <= long_parts/(long+short), cross-multiplied
        const bool pick_long =
            result.report.long_tokens * spec.short_parts <=
            result.report.short_tokens * spec.long_parts;
        if (pick_long)
            take_long();
        else
            take_short();
    }
    return result;
}

}  // namespace probeforge
