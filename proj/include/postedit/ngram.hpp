#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "postedit/suggest.hpp"

namespace postedit {

using WordId = std::uint32_t;
inline constexpr WordId kUnknownWord = static_cast<WordId>(-1);

// Levenshtein distance over Unicode code points.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

// Counts of every 1..order word n-gram of a case-folded corpus, plus the
// most frequent surface spelling of each word.
//
// Persisted as UTF-8 text:
//   NGRAMIDX v1 order=<n> vocab=<v> total=<t>
//   <count>\t<w_1> ... <w_n>          one line per n-gram, bytewise sorted
//   @case\t<folded>\t<surface>        one line per word whose surface form
//                                     differs from its folded key, sorted
class NGramIndex {
 public:
  static constexpr std::size_t kDefaultOrder = 3;

  NGramIndex() = default;

  // Throws std::invalid_argument for an empty corpus or order == 0.
  static NGramIndex train(std::string_view corpus, std::size_t order = kDefaultOrder);

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  // Throws std::runtime_error on malformed input or violated invariants.
  static NGramIndex load(std::istream& in);
  static NGramIndex load(const std::filesystem::path& path);

  bool empty() const { return total_ == 0; }
  std::size_t order() const { return order_; }
  std::size_t vocabulary_size() const { return vocab_.size(); }
  std::uint64_t total_unigrams() const { return total_; }
  std::size_t ngram_count() const { return counts_.size(); }

  // Folded vocabulary in bytewise order; a word's position is its WordId.
  const std::vector<std::string>& vocabulary() const { return vocab_; }
  WordId word_id(std::string_view folded) const;
  const std::string& word(WordId id) const { return vocab_.at(id); }
  const std::string& surface(WordId id) const { return surface_.at(id); }

  // Words are folded before lookup. Zero for n-grams longer than order().
  std::uint64_t count(std::span<const std::string> words) const;
  std::uint64_t count(std::string_view phrase) const;
  // Any kUnknownWord in `ids` yields zero.
  std::uint64_t count_ids(std::span<const WordId> ids) const;

  // Vocabulary ids within `max_distance` edits of `folded`, ascending.
  std::vector<WordId> within_distance(std::u32string_view folded, std::size_t max_distance) const;

  friend bool operator==(const NGramIndex& a, const NGramIndex& b);

 private:
  struct BkNode {
    WordId word;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> children;  // (distance, node)
  };

  static std::string pack(std::span<const WordId> ids);
  void rebuild_lookup();
  void check_invariants() const;

  std::size_t order_ = kDefaultOrder;
  std::uint64_t total_ = 0;
  std::vector<std::string> vocab_;
  std::vector<std::string> surface_;
  std::unordered_map<std::string, std::uint64_t> counts_;  // packed ids -> count

  std::unordered_map<std::string, WordId> ids_;
  std::vector<std::u32string> wide_;
  std::vector<BkNode> bk_;
};

// Folded vocabulary words within `max_edit_distance` of the folded `word`,
// in bytewise order. Includes the word itself when it is in the vocabulary.
std::vector<std::string> candidates(std::string_view word, const NGramIndex& index,
                                    std::size_t max_edit_distance);

// Backoff-smoothed phrase score: the product, over positions, of the
// conditional relative frequency at the highest order whose n-gram was seen,
// times backoff_alpha for every order dropped on the way. A word never seen
// at all contributes alpha^(dropped) / (total_unigrams * vocabulary_size).
double score(std::span<const std::string> phrase_words, const NGramIndex& index, double backoff_alpha);
double score_ids(std::span<const WordId> ids, const NGramIndex& index, double backoff_alpha);
// Factor contributed by position `pos`, looking back at most order-1 words.
// score_ids() is the left-to-right product of these starting from 1.0.
double position_score(std::span<const WordId> ids, std::size_t pos, const NGramIndex& index,
                      double backoff_alpha);

// Count used by the exact-phrase acceptance test. Phrases longer than the
// index order use the smallest count among their order-length sub-phrases.
std::uint64_t phrase_count(std::span<const WordId> ids, const NGramIndex& index);

struct SuggesterConfig {
  std::size_t max_edit_distance = 2;
  double backoff_alpha = 0.4;
  std::uint64_t min_exact_count = 1;
  double score_margin = 1.5;
  bool case_fold = true;

  void validate() const;
};

inline constexpr std::uint64_t kExhaustiveSearchLimit = 1'000'000;
inline constexpr std::size_t kBeamWidth = 8;

// Local stand-in for a search engine's did-you-mean: accepts phrases it has
// seen, otherwise rewrites each word to a nearby vocabulary word and keeps
// the rewrite that the n-gram statistics prefer by at least score_margin.
class NGramSuggester final : public SuggestionProvider {
 public:
  NGramSuggester(std::shared_ptr<const NGramIndex> index, SuggesterConfig config = {});

  std::string_view id() const override { return "ngram"; }
  bool concurrent_safe() const override { return true; }

  const SuggesterConfig& config() const { return config_; }
  const NGramIndex& index() const { return *index_; }

 protected:
  std::optional<Suggestion> do_suggest(std::string_view query) override;

 private:
  std::shared_ptr<const NGramIndex> index_;
  SuggesterConfig config_;
};

}  // namespace postedit
