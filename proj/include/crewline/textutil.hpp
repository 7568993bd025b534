#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace crewline::text {

/// Decodes one UTF-8 code point starting at `pos`, advancing `pos` past it.
/// Invalid byte sequences decode as U+FFFD and advance by one byte.
char32_t decode_utf8(std::string_view s, std::size_t& pos);

/// Maps an accented Latin code point to its ASCII base letters (lowercase),
/// e.g. é→"e", Œ→"oe". Returns an empty string for code points with no
/// ASCII equivalent.
std::string fold_to_ascii(char32_t cp);

/// Lowercases ASCII and folds accented Latin letters to lowercase ASCII.
/// Code points without an ASCII mapping are dropped when `drop_unmapped`
/// is set, otherwise kept as-is.
std::string fold_lower(std::string_view s, bool drop_unmapped = false);

std::string to_upper_ascii(std::string_view s);

std::string trim(std::string_view s);

/// Squeezes runs of whitespace to single spaces and trims the ends.
std::string collapse_ws(std::string_view s);

bool is_ascii_alnum(char32_t cp);

std::vector<std::string> split_lines(std::string_view s);

}  // namespace crewline::text
