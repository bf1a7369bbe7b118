#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "probeforge/errors.hpp"
#include "probeforge/tokenizer.hpp"
#include "probeforge/util.hpp"

using namespace probeforge;

TEST_CASE("byte tokenizer round-trips text") {
    const std::string text = "Is the city of Shijiazhuang in China?";
    const auto ids = tok::encode(text);
    CHECK(ids.size() == text.size());
    CHECK(tok::decode(ids) == text);
    CHECK(tok::encode("").empty());
}

TEST_CASE("special ids render as tags") {
    const std::vector<tok::TokenId> ids{static_cast<tok::TokenId>('a'), tok::kPad, tok::kBos,
                                        tok::kAnswerMark};
    CHECK(tok::decode(ids) == "a<pad><bos><mark>");
}

TEST_CASE("whitespace normalization") {
    CHECK(util::normalize_whitespace("  a\t b\n\nc ") == "a b c");
    CHECK(util::normalize_whitespace("") == "");
    CHECK(util::normalize_whitespace("   ") == "");
}

TEST_CASE("split keeps empty fields") {
    const auto parts = util::split("a,,b", ',');
    REQUIRE(parts.size() == 3);
    CHECK(parts[0] == "a");
    CHECK(parts[1] == "");
    CHECK(parts[2] == "b");
}

TEST_CASE("atomic write then read back") {
    const std::string path =
        (std::filesystem::temp_directory_path() / "pf_atomic_test.txt").string();
    util::atomic_write_file(path, "hello");
    CHECK(util::read_file(path) == "hello");
    util::atomic_write_file(path, "replaced");
    CHECK(util::read_file(path) == "replaced");
    std::filesystem::remove(path);
    CHECK_THROWS_AS(util::read_file(path), InputError);
}

TEST_CASE("fnv1a64 digest is stable") {
    CHECK(util::fnv1a64_hex("") == "cbf29ce484222325");
    CHECK(util::fnv1a64_hex("a") != util::fnv1a64_hex("b"));
    CHECK(util::fnv1a64_hex("abc") == util::fnv1a64_hex("abc"));
}

TEST_CASE("seed resolution: explicit beats env beats fallback") {
    unsetenv("PROBE_FORGE_SEED");
    CHECK(util::resolve_seed(std::nullopt, 5) == 5);
    CHECK(util::resolve_seed(17, 5) == 17);
    setenv("PROBE_FORGE_SEED", "99", 1);
    CHECK(util::resolve_seed(std::nullopt, 5) == 99);
    CHECK(util::resolve_seed(17, 5) == 17);
    setenv("PROBE_FORGE_SEED", "not-a-number", 1);
    CHECK_THROWS_AS(util::resolve_seed(std::nullopt, 5), InputError);
    unsetenv("PROBE_FORGE_SEED");
}

TEST_CASE("edit distance") {
    CHECK(util::edit_distance("retrieval", "retrival") == 1);
    CHECK(util::edit_distance("swap", "swap") == 0);
    CHECK(util::edit_distance("", "abc") == 3);
}
