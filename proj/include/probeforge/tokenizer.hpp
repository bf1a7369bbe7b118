#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace probeforge::tok {

// Byte-level tokenizer: ids 0..255 are raw bytes, followed by reserved
// special ids. Zero external assets, exactly reproducible.
using TokenId = std::int32_t;

inline constexpr TokenId kPad = 256;
inline constexpr TokenId kBos = 257;
inline constexpr TokenId kAnswerMark = 258;
inline constexpr TokenId kByteVocabSize = 259;

std::vector<TokenId> encode(std::string_view text);

// Bytes map back to chars; special ids render as <pad>/<bos>/<mark>,
// any other out-of-range id as <unk>.
std::string decode(std::span<const TokenId> ids);

}  // namespace probeforge::tok
