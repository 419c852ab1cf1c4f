#include "postedit/suggest.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"
#include "postedit/eval.hpp"
#include "postedit/text.hpp"
#include "postedit/transcript.hpp"

namespace postedit {

namespace {

using json = nlohmann::json;

constexpr int kCassetteVersion = 1;

}  // namespace

std::optional<Suggestion> SuggestionProvider::suggest(std::string_view query) {
  if (trim(query).empty()) throw std::invalid_argument("suggest: query must be non-empty");
  return do_suggest(query);
}

void Cassette::add(std::string query, std::optional<std::string> suggestion) {
  if (auto it = index_.find(query); it != index_.end()) {
    if (entries_[it->second].second != suggestion) {
      throw std::invalid_argument("cassette already records a different answer for \"" + query + "\"");
    }
    return;
  }
  index_.emplace(query, entries_.size());
  entries_.emplace_back(std::move(query), std::move(suggestion));
}

bool Cassette::contains(std::string_view query) const { return find(query) != nullptr; }

const std::optional<std::string>* Cassette::find(std::string_view query) const {
  auto it = index_.find(std::string(query));
  return it == index_.end() ? nullptr : &entries_[it->second].second;
}

void Cassette::save(std::ostream& out) const {
  json header = {{"cassette", kCassetteVersion},
                 {"provider_id", metadata_.provider_id},
                 {"created", metadata_.created}};
  out << header.dump() << '\n';
  for (const auto& [q, s] : entries_) {
    json rec = {{"q", q}, {"s", s ? json(*s) : json(nullptr)}};
    out << rec.dump() << '\n';
  }
}

void Cassette::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  save(out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Cassette Cassette::load(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    return std::runtime_error("cassette line " + std::to_string(line_no) + ": " + what);
  };
  if (!std::getline(in, line)) throw std::runtime_error("cassette: missing header line");
  ++line_no;
  Cassette c;
  try {
    const auto header = json::parse(line);
    if (header.at("cassette").get<int>() != kCassetteVersion) throw fail("unsupported cassette version");
    c.metadata_.provider_id = header.at("provider_id").get<std::string>();
    c.metadata_.created = header.at("created").get<std::string>();
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const auto rec = json::parse(line);
      auto query = rec.at("q").get<std::string>();
      const auto& s = rec.at("s");
      std::optional<std::string> suggestion;
      if (!s.is_null()) suggestion = s.get<std::string>();
      if (c.contains(query)) throw fail("duplicate query \"" + query + "\"");
      c.add(std::move(query), std::move(suggestion));
    }
  } catch (const json::exception& e) {
    throw fail(e.what());
  }
  return c;
}

Cassette Cassette::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open cassette: " + path.string());
  return load(in);
}

std::optional<Suggestion> cassette_lookup(const Cassette& cassette, std::string_view query) {
  const auto* hit = cassette.find(query);
  if (hit == nullptr) throw CassetteMissError(std::string(query));
  if (!*hit) return std::nullopt;
  return Suggestion{std::string(query), **hit, "replay"};
}

Cassette cassette_record(SuggestionProvider& provider, std::span<const std::string> queries,
                         std::string created) {
  Cassette c({std::string(provider.id()), std::move(created)});
  for (const auto& q : queries) {
    if (c.contains(q)) continue;
    auto s = provider.suggest(q);
    c.add(q, s ? std::optional<std::string>(std::move(s->corrected)) : std::nullopt);
  }
  return c;
}

ReplayProvider::ReplayProvider(std::shared_ptr<const Cassette> cassette, bool strict)
    : cassette_(std::move(cassette)), strict_(strict) {
  if (!cassette_) throw std::invalid_argument("ReplayProvider: cassette is null");
}

std::optional<Suggestion> ReplayProvider::do_suggest(std::string_view query) {
  if (!strict_ && !cassette_->contains(query)) return std::nullopt;
  return cassette_lookup(*cassette_, query);
}

RecordingProvider::RecordingProvider(SuggestionProvider& inner, std::string created)
    : inner_(inner), cassette_({std::string(inner.id()), std::move(created)}) {}

Cassette RecordingProvider::cassette() const {
  std::lock_guard lock(mutex_);
  return cassette_;
}

std::optional<Suggestion> RecordingProvider::do_suggest(std::string_view query) {
  auto s = inner_.suggest(query);
  std::lock_guard lock(mutex_);
  cassette_.add(std::string(query), s ? std::optional<std::string>(s->corrected) : std::nullopt);
  return s;
}

Cassette derive_cassette(std::string_view before, std::string_view after, std::size_t window,
                         CassetteMetadata metadata) {
  const auto src = split_words(before);
  const auto tgt = split_words(after);
  const auto spans = project_alignment(src, tgt);
  Cassette c(std::move(metadata));
  for (const auto& w : tokenize(std::span<const std::string>(src), window)) {
    std::vector<std::string> slice;
    const std::size_t first = w.index * window;
    for (std::size_t k = first; k < first + w.words.size(); ++k) {
      slice.insert(slice.end(), spans[k].begin(), spans[k].end());
    }
    auto rewritten = join_words(slice);
    if (rewritten == w.text || rewritten.empty()) {
      c.add(w.text, std::nullopt);
    } else {
      c.add(w.text, std::move(rewritten));
    }
  }
  return c;
}

}  // namespace postedit
