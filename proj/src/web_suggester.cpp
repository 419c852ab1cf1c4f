#include "postedit/web_suggester.hpp"

#include <httplib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "postedit/text.hpp"

namespace postedit {

namespace {

constexpr std::string_view kPlaceholder = "{}";

constexpr std::array<std::string_view, 38> kBlockTags = {
    "address", "article", "aside", "blockquote", "body", "br",     "dd",     "div",
    "dl",      "dt",      "fieldset", "figcaption", "figure", "footer", "form", "h1",
    "h2",      "h3",      "h4",   "h5",         "h6",   "head",   "header", "hr",
    "html",    "li",      "main", "nav",        "ol",   "p",      "pre",    "script",
    "section", "style",   "table", "td",        "tr",   "ul",
};

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

bool is_block_tag(std::string_view tag) {
  if (!tag.empty() && tag.front() == '/') tag.remove_prefix(1);
  std::size_t end = 0;
  while (end < tag.size() && (std::isalnum(static_cast<unsigned char>(tag[end])) != 0)) ++end;
  const auto name = fold_case(tag.substr(0, end));
  return std::find(kBlockTags.begin(), kBlockTags.end(), name) != kBlockTags.end();
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    const auto name = s.substr(i + 1, semi - i - 1);
    std::optional<char32_t> cp;
    if (name == "amp") cp = U'&';
    else if (name == "lt") cp = U'<';
    else if (name == "gt") cp = U'>';
    else if (name == "quot") cp = U'"';
    else if (name == "apos") cp = U'\'';
    else if (name == "nbsp") cp = U' ';
    else if (name.size() > 1 && name[0] == '#') {
      const bool hex = name[1] == 'x' || name[1] == 'X';
      const std::string digits(name.substr(hex ? 2 : 1));
      char* end = nullptr;
      const auto v = std::strtoul(digits.c_str(), &end, hex ? 16 : 10);
      if (!digits.empty() && end != nullptr && *end == '\0' && v > 0 && v <= 0x10FFFF) {
        cp = static_cast<char32_t>(v);
      }
    }
    if (!cp) {
      out.push_back('&');
      continue;
    }
    out += encode_utf8(std::u32string(1, *cp));
    i = semi;
  }
  return out;
}

std::string clean_suggestion(std::string_view raw) {
  auto text = join_words(split_words(decode_entities(raw)));
  std::string_view v = text;
  if (!v.empty() && v.front() == ':') v.remove_prefix(1);
  v = trim(v);
  // Quote characters wrapping the whole suggestion.
  for (std::string_view q : {"\"", "'", "\xE2\x80\x9C", "\xE2\x80\x9D"}) {
    if (v.size() >= 2 * q.size() && v.starts_with(q)) v.remove_prefix(q.size());
  }
  for (std::string_view q : {"\"", "'", "\xE2\x80\x9C", "\xE2\x80\x9D"}) {
    if (v.size() >= q.size() && v.ends_with(q)) v.remove_suffix(q.size());
  }
  return std::string(trim(v));
}

// Extracts text after position `start` up to a block boundary or newline.
std::string extract_inline(std::string_view body, std::size_t start) {
  std::string out;
  std::size_t i = start;
  while (i < body.size()) {
    const char c = body[i];
    if (c == '\n' || c == '\r') break;
    if (c == '<') {
      const auto close = body.find('>', i);
      if (close == std::string_view::npos) break;
      const auto tag = body.substr(i + 1, close - i - 1);
      if (is_block_tag(tag)) break;
      i = close + 1;
      continue;
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

struct SplitUrl {
  std::string scheme_host_port;
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw TransportError("URL has no scheme: " + url);
  const auto path_start = url.find_first_of("/?#", scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  std::string path = url.substr(path_start);
  if (path.front() != '/') path.insert(path.begin(), '/');
  return {url.substr(0, path_start), std::move(path)};
}

}  // namespace

void WebProviderConfig::validate() const {
  if (count_occurrences(endpoint_template, kPlaceholder) != 1) {
    throw std::invalid_argument("endpoint template must contain exactly one '{}' placeholder");
  }
  if (marker_text.empty()) throw std::invalid_argument("marker text must be non-empty");
  if (request_delay.count() < 0) throw std::invalid_argument("request delay must be >= 0");
  if (timeout.count() <= 0) throw std::invalid_argument("timeout must be > 0");
}

WebProviderConfig WebProviderConfig::with_environment() const {
  WebProviderConfig c = *this;
  if (const char* env = std::getenv(std::string(kEndpointEnvVar).c_str()); env != nullptr && *env != '\0') {
    c.endpoint_template = env;
  }
  return c;
}

std::string percent_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(text.size() * 3);
  for (char ch : text) {
    const auto b = static_cast<unsigned char>(ch);
    if (std::isalnum(b) != 0 && b < 0x80) {
      out.push_back(ch);
    } else if (ch == '-' || ch == '.' || ch == '_' || ch == '~') {
      out.push_back(ch);
    } else {
      out.push_back('%');
      out.push_back(kHex[b >> 4]);
      out.push_back(kHex[b & 0x0F]);
    }
  }
  return out;
}

std::string build_query(std::string_view endpoint_template, std::string_view token_text) {
  if (token_text.empty()) throw std::invalid_argument("build_query: token text must be non-empty");
  if (count_occurrences(endpoint_template, kPlaceholder) != 1) {
    throw std::invalid_argument("endpoint template must contain exactly one '{}' placeholder");
  }
  const auto pos = endpoint_template.find(kPlaceholder);
  std::string url(endpoint_template.substr(0, pos));
  url += percent_encode(token_text);
  url += endpoint_template.substr(pos + kPlaceholder.size());
  return url;
}

std::optional<std::string> parse_suggestion(std::string_view body, std::string_view marker) {
  if (marker.empty()) return std::nullopt;
  for (auto pos = body.find(marker); pos != std::string_view::npos;
       pos = body.find(marker, pos + marker.size())) {
    auto s = clean_suggestion(extract_inline(body, pos + marker.size()));
    if (!s.empty()) return s;
  }
  return std::nullopt;
}

std::string HttplibTransport::get(const std::string& url, std::chrono::milliseconds timeout) {
  const auto parts = split_url(url);
  httplib::Client client(parts.scheme_host_port);
  if (!client.is_valid()) throw TransportError("invalid endpoint: " + parts.scheme_host_port);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  client.set_follow_location(true);
  const httplib::Headers headers = {{"User-Agent", "postedit/1.0"}, {"Accept-Language", "en,fr;q=0.8"}};
  auto res = client.Get(parts.path, headers);
  if (!res) throw TransportError("request failed (" + httplib::to_string(res.error()) + "): " + url);
  if (res->status != 200) {
    throw TransportError("HTTP " + std::to_string(res->status) + " from " + url);
  }
  return std::move(res->body);
}

Clock::time_point SteadyClock::now() { return std::chrono::steady_clock::now(); }

void SteadyClock::sleep_until(time_point t) { std::this_thread::sleep_until(t); }

RateLimiter::RateLimiter(std::chrono::milliseconds delay, std::shared_ptr<Clock> clock)
    : delay_(delay), clock_(std::move(clock)) {
  if (delay_.count() < 0) throw std::invalid_argument("rate limiter delay must be >= 0");
  if (!clock_) throw std::invalid_argument("rate limiter clock is null");
}

Clock::time_point RateLimiter::acquire() {
  if (last_) {
    const auto earliest = *last_ + delay_;
    if (clock_->now() < earliest) clock_->sleep_until(earliest);
  }
  last_ = clock_->now();
  return *last_;
}

WebSuggester::WebSuggester(WebProviderConfig config, std::unique_ptr<HttpTransport> transport,
                           std::shared_ptr<Clock> clock)
    : config_(std::move(config)), transport_(std::move(transport)), limiter_(config_.request_delay, std::move(clock)) {
  config_.validate();
  if (!transport_) throw std::invalid_argument("WebSuggester: transport is null");
}

std::optional<Suggestion> WebSuggester::do_suggest(std::string_view query) {
  const auto url = build_query(config_.endpoint_template, query);
  std::string body;
  {
    std::lock_guard lock(mutex_);
    limiter_.acquire();
    body = transport_->get(url, config_.timeout);
  }
  auto parsed = parse_suggestion(body, config_.marker_text);
  if (!parsed) return std::nullopt;
  if (fold_case(*parsed) == fold_case(join_words(split_words(query)))) return std::nullopt;
  return Suggestion{std::string(query), std::move(*parsed), "web"};
}

}  // namespace postedit
