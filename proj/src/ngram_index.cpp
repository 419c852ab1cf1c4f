#include "postedit/ngram.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "postedit/text.hpp"

namespace postedit {

namespace {

constexpr std::string_view kMagic = "NGRAMIDX";
constexpr std::string_view kVersion = "v1";
constexpr std::string_view kCasePrefix = "@case\t";

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw std::runtime_error("ngram index: bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t parse_field(std::string_view token, std::string_view key) {
  if (!token.starts_with(key) || token.size() <= key.size() || token[key.size()] != '=') {
    throw std::runtime_error("ngram index: expected header field '" + std::string(key) + "='");
  }
  return parse_u64(token.substr(key.size() + 1), key);
}

}  // namespace

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0u : 1u)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string NGramIndex::pack(std::span<const WordId> ids) {
  std::string key(ids.size() * sizeof(WordId), '\0');
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const WordId id = ids[i];
    for (std::size_t b = 0; b < sizeof(WordId); ++b) {
      key[i * sizeof(WordId) + b] = static_cast<char>((id >> (8 * b)) & 0xFF);
    }
  }
  return key;
}

NGramIndex NGramIndex::train(std::string_view corpus, std::size_t order) {
  if (order == 0) throw std::invalid_argument("ngram order must be >= 1");
  const auto surface_words = split_words(corpus);
  if (surface_words.empty()) throw std::invalid_argument("cannot train on an empty corpus");

  std::vector<std::string> folded;
  folded.reserve(surface_words.size());
  std::unordered_map<std::string, std::map<std::string, std::uint64_t>> spellings;
  for (const auto& w : surface_words) {
    folded.push_back(fold_case(w));
    ++spellings[folded.back()][w];
  }

  NGramIndex idx;
  idx.order_ = order;
  idx.total_ = folded.size();
  idx.vocab_.reserve(spellings.size());
  for (const auto& [key, _] : spellings) idx.vocab_.push_back(key);
  std::sort(idx.vocab_.begin(), idx.vocab_.end());
  idx.surface_.reserve(idx.vocab_.size());
  for (const auto& key : idx.vocab_) {
    const auto& forms = spellings.at(key);
    auto best = forms.begin();
    for (auto it = forms.begin(); it != forms.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    idx.surface_.push_back(best->first);
  }
  idx.rebuild_lookup();

  std::vector<WordId> ids;
  ids.reserve(folded.size());
  for (const auto& f : folded) ids.push_back(idx.ids_.at(f));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t n = 1; n <= order && i + n <= ids.size(); ++n) {
      ++idx.counts_[pack(std::span<const WordId>(ids).subspan(i, n))];
    }
  }
  return idx;
}

void NGramIndex::rebuild_lookup() {
  ids_.clear();
  ids_.reserve(vocab_.size());
  wide_.clear();
  wide_.reserve(vocab_.size());
  for (WordId id = 0; id < vocab_.size(); ++id) {
    ids_.emplace(vocab_[id], id);
    wide_.push_back(decode_utf8(vocab_[id]));
  }
  bk_.clear();
  bk_.reserve(vocab_.size());
  for (WordId id = 0; id < vocab_.size(); ++id) {
    if (bk_.empty()) {
      bk_.push_back({id, {}});
      continue;
    }
    std::uint32_t node = 0;
    for (;;) {
      const auto d = static_cast<std::uint32_t>(levenshtein(wide_[bk_[node].word], wide_[id]));
      auto& children = bk_[node].children;
      auto it = std::find_if(children.begin(), children.end(), [d](const auto& c) { return c.first == d; });
      if (it == children.end()) {
        children.emplace_back(d, static_cast<std::uint32_t>(bk_.size()));
        bk_.push_back({id, {}});
        break;
      }
      node = it->second;
    }
  }
}

WordId NGramIndex::word_id(std::string_view folded) const {
  auto it = ids_.find(std::string(folded));
  return it == ids_.end() ? kUnknownWord : it->second;
}

std::uint64_t NGramIndex::count_ids(std::span<const WordId> ids) const {
  if (ids.empty() || ids.size() > order_) return 0;
  for (WordId id : ids) {
    if (id == kUnknownWord) return 0;
  }
  auto it = counts_.find(pack(ids));
  return it == counts_.end() ? 0 : it->second;
}

std::uint64_t NGramIndex::count(std::span<const std::string> words) const {
  std::vector<WordId> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(word_id(fold_case(w)));
  return count_ids(ids);
}

std::uint64_t NGramIndex::count(std::string_view phrase) const {
  const auto words = split_words(phrase);
  return count(std::span<const std::string>(words));
}

std::vector<WordId> NGramIndex::within_distance(std::u32string_view folded, std::size_t max_distance) const {
  std::vector<WordId> out;
  if (bk_.empty()) return out;
  std::vector<std::uint32_t> stack = {0};
  while (!stack.empty()) {
    const auto& node = bk_[stack.back()];
    stack.pop_back();
    const std::size_t d = levenshtein(folded, wide_[node.word]);
    if (d <= max_distance) out.push_back(node.word);
    const std::size_t lo = d > max_distance ? d - max_distance : 0;
    const std::size_t hi = d + max_distance;
    for (const auto& [dist, child] : node.children) {
      if (dist >= lo && dist <= hi) stack.push_back(child);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void NGramIndex::save(std::ostream& out) const {
  out << kMagic << ' ' << kVersion << " order=" << order_ << " vocab=" << vocab_.size()
      << " total=" << total_ << '\n';
  std::vector<std::pair<std::string, std::uint64_t>> lines;
  lines.reserve(counts_.size());
  for (const auto& [key, c] : counts_) {
    std::string text;
    for (std::size_t i = 0; i < key.size(); i += sizeof(WordId)) {
      WordId id = 0;
      for (std::size_t b = 0; b < sizeof(WordId); ++b) {
        id |= static_cast<WordId>(static_cast<unsigned char>(key[i + b])) << (8 * b);
      }
      if (!text.empty()) text.push_back(' ');
      text += vocab_[id];
    }
    lines.emplace_back(std::move(text), c);
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [text, c] : lines) out << c << '\t' << text << '\n';
  for (WordId id = 0; id < vocab_.size(); ++id) {
    if (surface_[id] != vocab_[id]) out << kCasePrefix << vocab_[id] << '\t' << surface_[id] << '\n';
  }
}

void NGramIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  save(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

NGramIndex NGramIndex::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("ngram index: missing header");
  std::istringstream header(line);
  std::string magic, version, f_order, f_vocab, f_total, extra;
  header >> magic >> version >> f_order >> f_vocab >> f_total;
  if (magic != kMagic || version != kVersion || f_total.empty() || (header >> extra)) {
    throw std::runtime_error("ngram index: bad header '" + line + "'");
  }
  NGramIndex idx;
  idx.order_ = parse_field(f_order, "order");
  const auto vocab_size = parse_field(f_vocab, "vocab");
  const auto total = parse_field(f_total, "total");
  if (idx.order_ == 0) throw std::runtime_error("ngram index: order must be >= 1");

  std::vector<std::pair<std::vector<std::string>, std::uint64_t>> grams;
  std::vector<std::pair<std::string, std::string>> casing;
  std::string prev_text;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.starts_with(kCasePrefix)) {
      const std::string_view rest = std::string_view(line).substr(kCasePrefix.size());
      const auto tab = rest.find('\t');
      if (tab == std::string_view::npos) {
        throw std::runtime_error("ngram index line " + std::to_string(line_no) + ": bad casing entry");
      }
      casing.emplace_back(std::string(rest.substr(0, tab)), std::string(rest.substr(tab + 1)));
      continue;
    }
    if (!casing.empty()) {
      throw std::runtime_error("ngram index line " + std::to_string(line_no) + ": n-gram after casing block");
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("ngram index line " + std::to_string(line_no) + ": missing tab");
    }
    const auto c = parse_u64(std::string_view(line).substr(0, tab), "count");
    std::string text = line.substr(tab + 1);
    if (!grams.empty() && text <= prev_text) {
      throw std::runtime_error("ngram index line " + std::to_string(line_no) + ": entries not sorted");
    }
    auto words = split_words(text);
    if (words.empty() || words.size() > idx.order_ || join_words(words) != text || c == 0) {
      throw std::runtime_error("ngram index line " + std::to_string(line_no) + ": bad n-gram");
    }
    prev_text = std::move(text);
    grams.emplace_back(std::move(words), c);
  }

  for (const auto& [words, c] : grams) {
    if (words.size() == 1) {
      idx.vocab_.push_back(words[0]);
      idx.total_ += c;
    }
  }
  std::sort(idx.vocab_.begin(), idx.vocab_.end());
  if (idx.vocab_.size() != vocab_size) throw std::runtime_error("ngram index: vocab size does not match header");
  if (idx.total_ != total) throw std::runtime_error("ngram index: unigram total does not match header");
  idx.surface_ = idx.vocab_;
  idx.rebuild_lookup();

  for (const auto& [folded, surface] : casing) {
    const WordId id = idx.word_id(folded);
    if (id == kUnknownWord || surface == folded) throw std::runtime_error("ngram index: bad casing entry for '" + folded + "'");
    idx.surface_[id] = surface;
  }
  for (const auto& [words, c] : grams) {
    std::vector<WordId> ids;
    for (const auto& w : words) {
      const WordId id = idx.word_id(w);
      if (id == kUnknownWord) throw std::runtime_error("ngram index: n-gram word '" + w + "' not in vocabulary");
      ids.push_back(id);
    }
    idx.counts_.emplace(pack(ids), c);
  }
  idx.check_invariants();
  return idx;
}

NGramIndex NGramIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open ngram index: " + path.string());
  return load(in);
}

void NGramIndex::check_invariants() const {
  for (const auto& [key, c] : counts_) {
    const std::size_t n = key.size() / sizeof(WordId);
    if (n < 2) continue;
    auto prefix = counts_.find(key.substr(0, key.size() - sizeof(WordId)));
    if (prefix == counts_.end() || prefix->second < c) {
      throw std::runtime_error("ngram index: n-gram count exceeds its prefix count");
    }
  }
}

bool operator==(const NGramIndex& a, const NGramIndex& b) {
  return a.order_ == b.order_ && a.total_ == b.total_ && a.vocab_ == b.vocab_ && a.surface_ == b.surface_ &&
         a.counts_ == b.counts_;
}

std::vector<std::string> candidates(std::string_view word, const NGramIndex& index, std::size_t max_edit_distance) {
  if (trim(word).empty()) throw std::invalid_argument("candidates: word must be non-empty");
  std::vector<std::string> out;
  for (WordId id : index.within_distance(decode_utf8(fold_case(word)), max_edit_distance)) {
    out.push_back(index.word(id));
  }
  return out;
}

double position_score(std::span<const WordId> ids, std::size_t pos, const NGramIndex& index,
                      double backoff_alpha) {
  const std::size_t top = std::min(index.order(), pos + 1);
  double discount = 1.0;
  for (std::size_t n = top; n >= 1; --n) {
    const auto gram = ids.subspan(pos + 1 - n, n);
    const std::uint64_t num = index.count_ids(gram);
    if (num > 0) {
      const std::uint64_t den = n == 1 ? index.total_unigrams() : index.count_ids(gram.first(n - 1));
      return (static_cast<double>(num) / static_cast<double>(den)) * discount;
    }
    if (n > 1) discount *= backoff_alpha;
  }
  const double floor_score =
      1.0 / (static_cast<double>(index.total_unigrams()) * static_cast<double>(index.vocabulary_size()));
  return floor_score * discount;
}

double score_ids(std::span<const WordId> ids, const NGramIndex& index, double backoff_alpha) {
  if (index.empty()) throw std::logic_error("score: index is untrained");
  double total = 1.0;
  for (std::size_t i = 0; i < ids.size(); ++i) total *= position_score(ids, i, index, backoff_alpha);
  return total;
}

double score(std::span<const std::string> phrase_words, const NGramIndex& index, double backoff_alpha) {
  std::vector<WordId> ids;
  ids.reserve(phrase_words.size());
  for (const auto& w : phrase_words) ids.push_back(index.word_id(fold_case(w)));
  return score_ids(ids, index, backoff_alpha);
}

std::uint64_t phrase_count(std::span<const WordId> ids, const NGramIndex& index) {
  if (ids.size() <= index.order()) return index.count_ids(ids);
  std::uint64_t lowest = UINT64_MAX;
  for (std::size_t i = 0; i + index.order() <= ids.size(); ++i) {
    lowest = std::min(lowest, index.count_ids(ids.subspan(i, index.order())));
  }
  return lowest;
}

}  // namespace postedit
