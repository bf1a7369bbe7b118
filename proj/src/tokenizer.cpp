#include "probeforge/tokenizer.hpp"

namespace probeforge::tok {

std::vector<TokenId> encode(std::string_view text) {
    std::vector<TokenId> ids;
    ids.reserve(text.size());
    for (unsigned char c : text) ids.push_back(static_cast<TokenId>(c));
    return ids;
}

std::string decode(std::span<const TokenId> ids) {
    std::string out;
    out.reserve(ids.size());
    for (TokenId id : ids) {
        if (id >= 0 && id < 256) {
            out.push_back(static_cast<char>(id));
        } else if (id == kPad) {
            out += "<pad>";
        } else if (id == kBos) {
            out += "<bos>";
        } else if (id == kAnswerMark) {
            out += "<mark>";
        } else {
            out += "<unk>";
        }
    }
    return out;
}

}  // namespace probeforge::tok
