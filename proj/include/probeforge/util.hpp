#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace probeforge::util {

// Writes `bytes` to `path` atomically (temp file in the same directory,
// then rename). Throws InputError on I/O failure.
void atomic_write_file(const std::string& path, std::string_view bytes);

// Reads a whole file into a string. Throws InputError if unreadable.
std::string read_file(const std::string& path);

// FNV-1a 64-bit digest, hex-encoded. Used for provenance sidecars.
std::string fnv1a64_hex(std::string_view bytes);

// Collapses whitespace runs to single spaces and trims both ends.
std::string normalize_whitespace(std::string_view text);

// Splits on a single-character delimiter; keeps empty fields.
std::vector<std::string> split(std::string_view text, char delim);

// Deterministic float formatting for reports ("%.*g", no locale).
std::string format_double(double v, int precision = 9);

// Seed resolution: explicit value wins, then PROBE_FORGE_SEED, then fallback.
// Throws InputError if the env var is set but not a valid unsigned integer.
std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed,
                           std::uint64_t fallback);

// Levenshtein distance, used for CLI subcommand suggestions.
std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace probeforge::util
