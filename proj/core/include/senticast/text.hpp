#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace senticast::text {

/// Decodes one UTF-8 codepoint starting at `i`, advancing `i` past it.
/// Invalid sequences decode as U+FFFD and consume one byte.
uint32_t next_codepoint(std::string_view s, size_t& i);

void append_codepoint(std::string& out, uint32_t cp);

bool is_whitespace(uint32_t cp);
/// Fixed emoji/pictograph set stripped at load time: U+1F000-1FFFF,
/// U+2600-27BF, U+2B00-2BFF, variation selectors U+FE00-FE0F, ZWJ U+200D,
/// keycap combiner U+20E3.
bool is_emoji(uint32_t cp);
bool is_separator_punct(uint32_t cp);

/// Post-text cleanup applied at load time: drops `#...#` topic spans and
/// emoji, collapses whitespace runs to a single space, trims ends.
/// Idempotent: clean_text(clean_text(s)) == clean_text(s).
std::string clean_text(std::string_view s);

}  // namespace senticast::text
