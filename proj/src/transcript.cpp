#include "postedit/transcript.hpp"

#include <stdexcept>

#include "postedit/text.hpp"

namespace postedit {

Transcript Transcript::from_text(std::string text, std::string language) {
  Transcript t;
  t.words = split_words(text);
  t.raw_text = std::move(text);
  t.language = std::move(language);
  return t;
}

Transcript Transcript::load(const std::filesystem::path& path, std::string language) {
  return from_text(read_text_file(path), std::move(language));
}

std::string Transcript::normalized() const { return join_words(words); }

std::vector<TokenWindow> tokenize(std::span<const std::string> words, std::size_t window) {
  if (window == 0) throw std::invalid_argument("tokenize: window width must be >= 1");
  std::vector<TokenWindow> out;
  out.reserve(window_count(words.size(), window));
  for (std::size_t start = 0; start < words.size(); start += window) {
    const std::size_t len = std::min(window, words.size() - start);
    TokenWindow tw;
    tw.index = out.size();
    tw.words.assign(words.begin() + static_cast<std::ptrdiff_t>(start),
                    words.begin() + static_cast<std::ptrdiff_t>(start + len));
    tw.text = join_words(tw.words);
    out.push_back(std::move(tw));
  }
  return out;
}

std::vector<TokenWindow> tokenize(std::string_view text, std::size_t window) {
  if (window == 0) throw std::invalid_argument("tokenize: window width must be >= 1");
  const auto words = split_words(text);
  return tokenize(std::span<const std::string>(words), window);
}

std::string concatenate(std::span<const std::string> pieces) { return join_words(pieces); }

}  // namespace postedit
