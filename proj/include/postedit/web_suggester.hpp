#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "postedit/suggest.hpp"

namespace postedit {

inline constexpr std::string_view kEndpointEnvVar = "POSTEDIT_WEB_ENDPOINT";
inline constexpr std::string_view kDefaultMarker = "Including results for";

struct WebProviderConfig {
  // "{}" marks where the percent-encoded token goes; exactly one is allowed.
  std::string endpoint_template = "https://www.bing.com/search?q={}";
  std::string marker_text = std::string(kDefaultMarker);
  std::chrono::milliseconds request_delay{1000};
  std::chrono::milliseconds timeout{10000};

  // Throws std::invalid_argument.
  void validate() const;

  // Applies POSTEDIT_WEB_ENDPOINT when it is set and non-empty.
  WebProviderConfig with_environment() const;
};

// RFC 3986: every byte outside the unreserved set becomes %XX.
std::string percent_encode(std::string_view text);

std::string build_query(std::string_view endpoint_template, std::string_view token_text);

// Text following the first occurrence of `marker` that yields a non-empty
// suggestion. Inline markup is stripped and entities decoded; extraction
// stops at a block-level tag or a line break.
std::optional<std::string> parse_suggestion(std::string_view body, std::string_view marker);

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  // Returns the body of a 200 response. Throws TransportError otherwise.
  virtual std::string get(const std::string& url, std::chrono::milliseconds timeout) = 0;
};

// cpp-httplib backed transport; handles http:// and https:// URLs.
class HttplibTransport final : public HttpTransport {
 public:
  std::string get(const std::string& url, std::chrono::milliseconds timeout) override;
};

class Clock {
 public:
  using time_point = std::chrono::steady_clock::time_point;
  virtual ~Clock() = default;
  virtual time_point now() = 0;
  virtual void sleep_until(time_point t) = 0;
};

class SteadyClock final : public Clock {
 public:
  time_point now() override;
  void sleep_until(time_point t) override;
};

// Spaces request initiations at least `delay` apart. Not thread-safe; the
// owner serializes calls.
class RateLimiter {
 public:
  RateLimiter(std::chrono::milliseconds delay, std::shared_ptr<Clock> clock);

  // Blocks until the next request may start; returns its start time.
  Clock::time_point acquire();

 private:
  std::chrono::milliseconds delay_;
  std::shared_ptr<Clock> clock_;
  std::optional<Clock::time_point> last_;
};

// Submits each token as a search query and reads the spelling-suggestion
// marker off the result page. One request is in flight per instance.
class WebSuggester final : public SuggestionProvider {
 public:
  explicit WebSuggester(WebProviderConfig config,
                        std::unique_ptr<HttpTransport> transport = std::make_unique<HttplibTransport>(),
                        std::shared_ptr<Clock> clock = std::make_shared<SteadyClock>());

  std::string_view id() const override { return "web"; }
  bool concurrent_safe() const override { return true; }

  const WebProviderConfig& config() const { return config_; }

 protected:
  std::optional<Suggestion> do_suggest(std::string_view query) override;

 private:
  WebProviderConfig config_;
  std::unique_ptr<HttpTransport> transport_;
  std::mutex mutex_;
  RateLimiter limiter_;
};

}  // namespace postedit
