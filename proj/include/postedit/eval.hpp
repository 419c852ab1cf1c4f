#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace postedit {

// How rates and ratios are rounded. `truncated` floors rates to 3 decimals
// and improvement ratios to 2, as the reference results were printed;
// `full` keeps full precision.
enum class Rounding { truncated, full };

std::string_view to_string(Rounding mode);
Rounding parse_rounding(std::string_view name);

struct AnnotatedError {
  std::size_t word_index = 0;
  std::string surface;
  // Expected form; empty means the word should disappear. May contain
  // several words (a dropped word is annotated on its successor).
  std::optional<std::string> correct;

  friend bool operator==(const AnnotatedError&, const AnnotatedError&) = default;
};

// Marked misspellings of one transcript.
struct ErrorAnnotation {
  std::string transcript_id;
  std::size_t total_words = 0;
  std::vector<AnnotatedError> errors;

  static ErrorAnnotation from_json(std::string_view json_text);
  static ErrorAnnotation load(const std::filesystem::path& path);

  // Throws std::invalid_argument if indices are out of range, not strictly
  // increasing, or name a different surface form than `words` holds.
  void validate(std::span<const std::string> words) const;
};

std::size_t count_errors_annotated(const ErrorAnnotation& annotation);

// Substitutions + insertions + deletions of a minimal, case-sensitive
// word-level alignment. Throws std::invalid_argument if either side is empty.
std::size_t count_errors_aligned(std::string_view hypothesis, std::string_view reference);
std::size_t count_errors_aligned(std::span<const std::string> hypothesis,
                                 std::span<const std::string> reference);

enum class EditOp { match, substitute, insert, erase };

struct AlignmentStep {
  EditOp op;
  std::optional<std::size_t> source;  // absent for insert
  std::optional<std::size_t> target;  // absent for erase
};

// Minimal word edit script from `source` to `target`. Among scripts with the
// fewest edits, prefers the one with the smallest total character edit cost
// so that "Micro soft" -> "Microsoft" substitutes the closer word.
std::vector<AlignmentStep> align_words(std::span<const std::string> source,
                                       std::span<const std::string> target);

// Target span per source word: the target word aligned to it (if any),
// preceded by target words inserted right before it. Trailing insertions go
// to the last source word.
std::vector<std::vector<std::string>> project_alignment(std::span<const std::string> source,
                                                        std::span<const std::string> target);

// Annotated errors whose projected span in `after` equals the expected form.
std::size_t count_fixed_errors(const ErrorAnnotation& annotation,
                               std::span<const std::string> before,
                               std::span<const std::string> after);

double truncate_decimals(double value, int decimals);

// Throws std::invalid_argument when total_words == 0.
double error_rate(std::size_t errors, std::size_t total_words, Rounding mode);

// std::nullopt is the "all errors corrected" sentinel for e_after == 0.
std::optional<double> improvement(double e_before, double e_after, Rounding mode);

struct ErrorReport {
  std::string label;
  std::size_t total_words = 0;
  std::size_t errors_before = 0;
  std::size_t errors_after = 0;
  double e_before = 0.0;
  double e_after = 0.0;
  std::optional<double> improvement;
  Rounding rounding = Rounding::truncated;
};

ErrorReport make_report(std::string label, std::size_t total_words, std::size_t errors_before,
                        std::size_t errors_after, Rounding mode);

struct ReportTable {
  std::vector<ErrorReport> rows;
  std::optional<double> average_improvement;  // mean of rows with a ratio
  Rounding rounding = Rounding::truncated;
};

struct DocumentCounts {
  std::string label;
  std::size_t total_words = 0;
  std::size_t errors_before = 0;
  std::size_t errors_after = 0;
};

ReportTable build_report(std::span<const DocumentCounts> documents, Rounding mode);

// Cell formatting: "14.2%", "4.58 (458%)", "497%".
std::string format_rate(double rate, Rounding mode);
std::string format_ratio(const std::optional<double>& ratio, Rounding mode);
std::string format_percent(double ratio);

std::string render_text(const ReportTable& table);
std::string render_csv(const ReportTable& table);

}  // namespace postedit
