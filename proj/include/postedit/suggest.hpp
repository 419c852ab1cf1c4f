#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace postedit {

// A provider's proposed rewrite of a query token.
struct Suggestion {
  std::string query;
  std::string corrected;
  std::string provider_id;

  friend bool operator==(const Suggestion&, const Suggestion&) = default;
};

// Base for provider failures. "No suggestion" is never an error.
class ProviderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Network or HTTP failure in the web backend.
class TransportError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

// Strict replay of a query the cassette never recorded.
class CassetteMissError : public ProviderError {
 public:
  explicit CassetteMissError(std::string query)
      : ProviderError("query not recorded in cassette: \"" + query + "\""), query_(std::move(query)) {}
  const std::string& query() const { return query_; }

 private:
  std::string query_;
};

// The contract every suggestion backend implements.
//
// suggest() returns a Suggestion when the backend considers the query
// misspelled and std::nullopt when it considers it correct. Failures are
// reported by throwing ProviderError. Implementations that return true from
// concurrent_safe() may be called from several threads at once.
class SuggestionProvider {
 public:
  virtual ~SuggestionProvider() = default;

  virtual std::string_view id() const = 0;
  virtual bool concurrent_safe() const { return false; }

  // Throws std::invalid_argument for an empty or all-whitespace query.
  std::optional<Suggestion> suggest(std::string_view query);

 protected:
  virtual std::optional<Suggestion> do_suggest(std::string_view query) = 0;
};

struct CassetteMetadata {
  std::string provider_id;
  std::string created;  // ISO-8601 UTC

  friend bool operator==(const CassetteMetadata&, const CassetteMetadata&) = default;
};

// Recorded query -> optional suggestion mapping, kept in recording order.
//
// On disk this is JSON Lines: a header object carrying the metadata, then one
// {"q": ..., "s": ...} object per recorded query, with "s" null when the
// provider had no suggestion.
class Cassette {
 public:
  using Entry = std::pair<std::string, std::optional<std::string>>;

  Cassette() = default;
  explicit Cassette(CassetteMetadata metadata) : metadata_(std::move(metadata)) {}

  // Re-adding a query with the same answer is a no-op; with a different
  // answer it throws std::invalid_argument.
  void add(std::string query, std::optional<std::string> suggestion);

  bool contains(std::string_view query) const;
  // nullptr when the query was never recorded.
  const std::optional<std::string>* find(std::string_view query) const;

  const CassetteMetadata& metadata() const { return metadata_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static Cassette load(std::istream& in);
  static Cassette load(const std::filesystem::path& path);

  friend bool operator==(const Cassette& a, const Cassette& b) {
    return a.metadata_ == b.metadata_ && a.entries_ == b.entries_;
  }

 private:
  CassetteMetadata metadata_;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Throws CassetteMissError when the query is absent.
std::optional<Suggestion> cassette_lookup(const Cassette& cassette, std::string_view query);

// Queries `provider` once per distinct query, in order.
Cassette cassette_record(SuggestionProvider& provider, std::span<const std::string> queries,
                         std::string created);

// Answers from a cassette. Strict mode throws on unrecorded queries;
// otherwise they get no suggestion.
class ReplayProvider final : public SuggestionProvider {
 public:
  explicit ReplayProvider(std::shared_ptr<const Cassette> cassette, bool strict = true);

  std::string_view id() const override { return "replay"; }
  bool concurrent_safe() const override { return true; }

 protected:
  std::optional<Suggestion> do_suggest(std::string_view query) override;

 private:
  std::shared_ptr<const Cassette> cassette_;
  bool strict_;
};

// Forwards to another provider and records every answer it gives.
class RecordingProvider final : public SuggestionProvider {
 public:
  RecordingProvider(SuggestionProvider& inner, std::string created);

  std::string_view id() const override { return inner_.id(); }
  bool concurrent_safe() const override { return inner_.concurrent_safe(); }

  Cassette cassette() const;

 protected:
  std::optional<Suggestion> do_suggest(std::string_view query) override;

 private:
  SuggestionProvider& inner_;
  mutable std::mutex mutex_;
  Cassette cassette_;
};

// Builds a replay cassette from a before/after transcript pair: `before` is
// split into windows of `window` words, the two word sequences are aligned,
// and each window maps to the slice of `after` aligned with it. Windows
// whose slice is unchanged record no suggestion. Words inserted in `after`
// go with the window of the following `before` word.
Cassette derive_cassette(std::string_view before, std::string_view after, std::size_t window,
                         CassetteMetadata metadata);

}  // namespace postedit
