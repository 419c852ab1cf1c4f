#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "postedit/eval.hpp"
#include "postedit/ngram.hpp"
#include "postedit/pipeline.hpp"
#include "postedit/suggest.hpp"
#include "postedit/web_suggester.hpp"

namespace postedit::cli {

enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kInputError = 2,
  kProviderFailure = 3,
};

struct ProviderOptions {
  std::string provider = "ngram";  // ngram | replay | web
  std::optional<std::filesystem::path> index;
  std::optional<std::filesystem::path> cassette;
  SuggesterConfig suggester;
  WebProviderConfig web;
};

struct TrainOptions {
  std::filesystem::path corpus;
  std::filesystem::path index;
  std::size_t order = NGramIndex::kDefaultOrder;
};

struct CorrectOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  std::optional<std::filesystem::path> audit;  // default: <output>.audit.jsonl
  std::optional<std::filesystem::path> record_cassette;
  ProviderOptions provider;
  PipelineConfig pipeline;
};

struct EvaluateDocument {
  std::string label;
  std::filesystem::path before;
  std::filesystem::path after;
  std::optional<std::filesystem::path> annotations_before;
  std::optional<std::filesystem::path> annotations_after;
  std::optional<std::filesystem::path> reference;
};

enum class Counting { automatic, annotated, aligned };

struct EvaluateOptions {
  std::vector<EvaluateDocument> documents;
  Counting counting = Counting::automatic;
  Rounding rounding = Rounding::truncated;
  std::optional<std::filesystem::path> csv;
};

struct RecordOptions {
  std::filesystem::path input;
  std::filesystem::path cassette;
  std::size_t window = kDefaultWindow;
  // Derive answers by aligning input with this corrected transcript instead
  // of asking a provider.
  std::optional<std::filesystem::path> derive_from;
  ProviderOptions provider;
  std::optional<std::string> created;
};

int run_train(const TrainOptions& options, std::ostream& out, std::ostream& err);
int run_correct(const CorrectOptions& options, std::ostream& out, std::ostream& err);
int run_evaluate(const EvaluateOptions& options, std::ostream& out, std::ostream& err);
int run_record(const RecordOptions& options, std::ostream& out, std::ostream& err);

// Reads a manifest of documents; relative paths resolve against its folder.
std::vector<EvaluateDocument> load_manifest(const std::filesystem::path& path);

// Provider for an id: "ngram" needs an index, "replay" a cassette.
std::unique_ptr<SuggestionProvider> make_provider(const ProviderOptions& options);

// UTC ISO-8601; honours SOURCE_DATE_EPOCH for reproducible output.
std::string timestamp_now();

// Parses argv-style arguments (args[0] is the program name) and runs the
// chosen subcommand.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);
int main(int argc, char** argv);

}  // namespace postedit::cli
