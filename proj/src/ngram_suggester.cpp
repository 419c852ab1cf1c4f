#include <algorithm>
#include <stdexcept>

#include "postedit/ngram.hpp"
#include "postedit/text.hpp"

namespace postedit {

namespace {

// One choice at a lattice position. kUnknownWord stands for the query word
// itself when nothing in the vocabulary is close enough.
struct Option {
  WordId id;
  std::string folded;
};

struct Path {
  double score = 1.0;
  std::vector<std::size_t> picks;
  std::string phrase;  // folded words joined by spaces; tie-break key
};

bool better(double score, const std::string& phrase, const Path& than) {
  if (score != than.score) return score > than.score;
  return phrase < than.phrase;
}

std::string phrase_of(const std::vector<std::vector<Option>>& lattice, const std::vector<std::size_t>& picks) {
  std::string out;
  for (std::size_t i = 0; i < picks.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += lattice[i][picks[i]].folded;
  }
  return out;
}

class LatticeSearch {
 public:
  LatticeSearch(const std::vector<std::vector<Option>>& lattice, const NGramIndex& index, double alpha)
      : lattice_(lattice), index_(index), alpha_(alpha), prune_(alpha <= 1.0) {}

  // Visits every path. With alpha <= 1 every factor is <= 1, so a prefix
  // already below the best complete score cannot win and is cut.
  Path exhaustive() {
    best_ = Path{-1.0, {}, {}};
    picks_.assign(lattice_.size(), 0);
    ids_.assign(lattice_.size(), kUnknownWord);
    descend(0, 1.0);
    return best_;
  }

  // Keeps the `width` best prefixes after each position.
  Path beam(std::size_t width) {
    std::vector<Path> beams = {Path{}};
    for (std::size_t pos = 0; pos < lattice_.size(); ++pos) {
      std::vector<Path> next;
      for (const auto& b : beams) {
        std::vector<WordId> ids;
        for (std::size_t i = 0; i < b.picks.size(); ++i) ids.push_back(lattice_[i][b.picks[i]].id);
        ids.push_back(kUnknownWord);
        for (std::size_t k = 0; k < lattice_[pos].size(); ++k) {
          ids.back() = lattice_[pos][k].id;
          Path p = b;
          p.picks.push_back(k);
          p.score = b.score * position_score(ids, pos, index_, alpha_);
          if (!p.phrase.empty()) p.phrase.push_back(' ');
          p.phrase += lattice_[pos][k].folded;
          next.push_back(std::move(p));
        }
      }
      std::sort(next.begin(), next.end(),
                [](const Path& a, const Path& b) { return better(a.score, a.phrase, b); });
      if (next.size() > width) next.resize(width);
      beams = std::move(next);
    }
    return beams.front();
  }

 private:
  void descend(std::size_t pos, double prefix) {
    if (prune_ && prefix < best_.score) return;
    if (pos == lattice_.size()) {
      auto phrase = phrase_of(lattice_, picks_);
      if (better(prefix, phrase, best_)) best_ = Path{prefix, picks_, std::move(phrase)};
      return;
    }
    for (std::size_t k = 0; k < lattice_[pos].size(); ++k) {
      picks_[pos] = k;
      ids_[pos] = lattice_[pos][k].id;
      descend(pos + 1, prefix * position_score(std::span<const WordId>(ids_).first(pos + 1), pos, index_, alpha_));
    }
  }

  const std::vector<std::vector<Option>>& lattice_;
  const NGramIndex& index_;
  double alpha_;
  bool prune_;
  Path best_;
  std::vector<std::size_t> picks_;
  std::vector<WordId> ids_;
};

}  // namespace

void SuggesterConfig::validate() const {
  if (max_edit_distance == 0) throw std::invalid_argument("max_edit_distance must be > 0");
  if (!(backoff_alpha > 0.0)) throw std::invalid_argument("backoff_alpha must be > 0");
  if (min_exact_count == 0) throw std::invalid_argument("min_exact_count must be > 0");
  if (!(score_margin > 0.0)) throw std::invalid_argument("score_margin must be > 0");
}

NGramSuggester::NGramSuggester(std::shared_ptr<const NGramIndex> index, SuggesterConfig config)
    : index_(std::move(index)), config_(config) {
  if (!index_) throw std::invalid_argument("NGramSuggester: index is null");
  config_.validate();
}

std::optional<Suggestion> NGramSuggester::do_suggest(std::string_view query) {
  const NGramIndex& index = *index_;
  if (index.empty()) throw std::logic_error("ngram suggester: index is untrained");

  const auto words = split_words(query);
  std::vector<std::string> folded;
  std::vector<WordId> query_ids;
  for (const auto& w : words) {
    folded.push_back(fold_case(w));
    query_ids.push_back(index.word_id(folded.back()));
  }

  if (phrase_count(query_ids, index) >= config_.min_exact_count) return std::nullopt;

  std::vector<std::vector<Option>> lattice(words.size());
  std::uint64_t paths = 1;
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (WordId id : index.within_distance(decode_utf8(folded[i]), config_.max_edit_distance)) {
      lattice[i].push_back({id, index.word(id)});
    }
    if (lattice[i].empty()) lattice[i].push_back({kUnknownWord, folded[i]});
    paths = paths > kExhaustiveSearchLimit ? paths : paths * lattice[i].size();
  }

  LatticeSearch search(lattice, index, config_.backoff_alpha);
  const Path best = paths <= kExhaustiveSearchLimit ? search.exhaustive() : search.beam(kBeamWidth);

  const double baseline = score_ids(query_ids, index, config_.backoff_alpha);
  if (best.score < config_.score_margin * baseline) return std::nullopt;

  std::vector<std::string> out_words;
  out_words.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    const Option& choice = lattice[i][best.picks[i]];
    if (choice.id == kUnknownWord || choice.folded == folded[i]) {
      out_words.push_back(words[i]);
    } else {
      out_words.push_back(index.surface(choice.id));
    }
  }
  auto corrected = join_words(out_words);
  const bool differs = config_.case_fold ? best.phrase != join_words(folded)
                                         : corrected != join_words(words);
  if (!differs) return std::nullopt;
  return Suggestion{std::string(query), std::move(corrected), "ngram"};
}

}  // namespace postedit
