#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "postedit/suggest.hpp"
#include "postedit/transcript.hpp"

namespace postedit {

enum class CorrectionAction { kept, replaced, errored };

std::string_view to_string(CorrectionAction action);

// What happened to one token window.
struct CorrectionRecord {
  std::size_t token_index = 0;
  std::string original_text;
  std::optional<std::string> replacement_text;  // set iff action == replaced
  CorrectionAction action = CorrectionAction::kept;
  std::string error;  // provider message when action == errored

  // Text this token contributes to the corrected transcript.
  const std::string& output_text() const { return replacement_text ? *replacement_text : original_text; }

  friend bool operator==(const CorrectionRecord&, const CorrectionRecord&) = default;
};

struct PipelineConfig {
  std::size_t window = kDefaultWindow;
  std::size_t workers = 1;
  // Strict aborts on the first provider failure; lenient keeps the token and
  // marks it errored.
  bool strict_provider_errors = true;

  void validate() const;
};

struct PostEditResult {
  std::string corrected_text;
  std::vector<CorrectionRecord> records;
  std::size_t provider_calls = 0;
};

// Strict-mode abort. records() holds the trail for every token before the
// failing one.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::size_t token_index, const std::string& message, std::vector<CorrectionRecord> records);

  std::size_t token_index() const { return token_index_; }
  const std::vector<CorrectionRecord>& records() const { return records_; }

 private:
  std::size_t token_index_;
  std::vector<CorrectionRecord> records_;
};

// Single pass over the windows of `text`: one provider call per window, the
// whole window replaced by the suggestion when there is one.
PostEditResult post_edit(std::string_view text, SuggestionProvider& provider, const PipelineConfig& config);

// Same result as post_edit() with the windows split into config.workers
// contiguous blocks processed concurrently. The provider must be
// concurrent_safe(). When several tokens fail, the lowest token_index wins.
PostEditResult post_edit_parallel(std::string_view text, SuggestionProvider& provider,
                                  const PipelineConfig& config);

// Variant giving each worker its own provider instance from `factory`.
using ProviderFactory = std::function<std::unique_ptr<SuggestionProvider>()>;
PostEditResult post_edit_parallel(std::string_view text, const ProviderFactory& factory,
                                  const PipelineConfig& config);

// Dispatches on config.workers.
PostEditResult run_post_edit(std::string_view text, SuggestionProvider& provider, const PipelineConfig& config);

// Contiguous [begin, end) token ranges for each worker; sizes differ by at
// most one. Never returns empty ranges.
std::vector<std::pair<std::size_t, std::size_t>> partition_tokens(std::size_t tokens, std::size_t workers);

std::string to_json_line(const CorrectionRecord& record);
void write_audit(std::ostream& out, std::span<const CorrectionRecord> records);
CorrectionRecord record_from_json_line(std::string_view line);

}  // namespace postedit
