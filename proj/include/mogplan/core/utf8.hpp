#pragma once

#include <string>
#include <string_view>

namespace mogplan::utf8 {

// Invalid sequences decode to U+FFFD.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
std::string encode(char32_t ch);

inline bool is_space(char32_t ch) { return ch == U' ' || ch == U'\t' || ch == U'\n' || ch == U'\r'; }

}  // namespace mogplan::utf8
