#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace postedit {

// Whitespace is ASCII space, tab, CR, LF, VT and FF. Punctuation stays
// attached to its word.
bool is_space(char c);

std::vector<std::string> split_words(std::string_view text);

// Joins with single spaces, skipping empty pieces.
std::string join_words(std::span<const std::string> words);

std::string_view trim(std::string_view s);

// UTF-8 <-> UTF-32. Malformed bytes decode to U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

// Simple lowercase mapping for ASCII, Latin-1, Latin Extended-A, Greek and
// Cyrillic. Enough for the English and French material this tool targets.
char32_t fold_char(char32_t c);
std::string fold_case(std::string_view s);

std::string read_text_file(const std::filesystem::path& path);
// Writes bytes verbatim (callers supply LF line endings).
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace postedit
