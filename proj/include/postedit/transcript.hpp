#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace postedit {

// A recognized transcript: the raw text plus its whitespace-split words.
struct Transcript {
  std::string raw_text;
  std::vector<std::string> words;
  std::string language;  // informational, e.g. "en" or "fr"

  static Transcript from_text(std::string text, std::string language = {});
  static Transcript load(const std::filesystem::path& path, std::string language = {});

  // Words joined by single spaces.
  std::string normalized() const;
  std::size_t word_count() const { return words.size(); }
};

// One block of consecutive words submitted as a single suggestion query.
struct TokenWindow {
  std::size_t index = 0;
  std::vector<std::string> words;
  std::string text;

  friend bool operator==(const TokenWindow&, const TokenWindow&) = default;
};

inline constexpr std::size_t kDefaultWindow = 6;

// Splits into disjoint blocks of `window` words; only the last block may be
// shorter. Throws std::invalid_argument when window == 0.
std::vector<TokenWindow> tokenize(std::string_view text, std::size_t window);
std::vector<TokenWindow> tokenize(std::span<const std::string> words, std::size_t window);

// Number of windows tokenize() produces for `word_count` words.
constexpr std::size_t window_count(std::size_t word_count, std::size_t window) {
  return window == 0 ? 0 : (word_count + window - 1) / window;
}

std::string concatenate(std::span<const std::string> pieces);

}  // namespace postedit
