#include "postedit/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "postedit/text.hpp"
#include "postedit/transcript.hpp"

namespace postedit::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::filesystem::path default_audit_path(const fs::path& output) {
  return fs::path(output.string() + ".audit.jsonl");
}

void write_audit_file(const fs::path& path, std::span<const CorrectionRecord> records) {
  std::ostringstream buf;
  write_audit(buf, records);
  write_text_file(path, buf.str());
}

// Shared provider flags for `correct` and `record`.
void add_provider_options(CLI::App& cmd, ProviderOptions& p) {
  cmd.add_option("--provider", p.provider, "Suggestion backend")
      ->check(CLI::IsMember({"ngram", "replay", "web"}))
      ->capture_default_str();
  cmd.add_option("--index", p.index, "N-gram index file (ngram provider)");
  cmd.add_option("--cassette", p.cassette, "Cassette file (replay provider)");
  cmd.add_option("--margin", p.suggester.score_margin, "Factor a rewrite must beat the original by")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--min-exact-count", p.suggester.min_exact_count, "Phrase count that accepts a query as-is")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--max-edit-distance", p.suggester.max_edit_distance, "Per-word edit bound for candidates")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--alpha", p.suggester.backoff_alpha, "Backoff discount per dropped order")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_flag("!--no-case-fold", p.suggester.case_fold, "Compare suggestions case-sensitively");
  cmd.add_option("--endpoint", p.web.endpoint_template, "Search URL template with one {} placeholder")
      ->capture_default_str();
  cmd.add_option("--marker", p.web.marker_text, "Spelling-suggestion marker text")->capture_default_str();
  cmd.add_option_function<long long>(
         "--delay-ms", [&p](long long v) { p.web.request_delay = std::chrono::milliseconds(v); },
         "Minimum gap between web requests")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option_function<long long>(
         "--timeout-ms", [&p](long long v) { p.web.timeout = std::chrono::milliseconds(v); },
         "Web request timeout")
      ->check(CLI::PositiveNumber);
}

struct Counts {
  std::size_t total = 0;
  std::size_t before = 0;
  std::size_t after = 0;
  std::optional<std::size_t> fixed;
  std::size_t annotated = 0;
};

Counts count_document(const EvaluateDocument& doc, Counting counting) {
  const auto before = Transcript::load(doc.before);
  const auto after = Transcript::load(doc.after);
  const bool have_annotations = doc.annotations_before && doc.annotations_after;
  if (counting == Counting::automatic) {
    if (have_annotations) {
      counting = Counting::annotated;
    } else if (doc.reference) {
      counting = Counting::aligned;
    } else {
      throw std::invalid_argument("document '" + doc.label + "' has neither annotations nor a reference");
    }
  }
  Counts c;
  if (counting == Counting::annotated) {
    if (!have_annotations) throw std::invalid_argument("document '" + doc.label + "' lacks annotation files");
    const auto ann_before = ErrorAnnotation::load(*doc.annotations_before);
    const auto ann_after = ErrorAnnotation::load(*doc.annotations_after);
    ann_before.validate(before.words);
    ann_after.validate(after.words);
    c.total = ann_before.total_words;
    c.before = count_errors_annotated(ann_before);
    c.after = count_errors_annotated(ann_after);
    c.annotated = c.before;
    c.fixed = count_fixed_errors(ann_before, before.words, after.words);
  } else {
    if (!doc.reference) throw std::invalid_argument("document '" + doc.label + "' lacks a reference transcript");
    const auto reference = Transcript::load(*doc.reference);
    c.total = reference.word_count();
    c.before = count_errors_aligned(std::span<const std::string>(before.words), reference.words);
    c.after = count_errors_aligned(std::span<const std::string>(after.words), reference.words);
  }
  return c;
}

std::optional<fs::path> optional_path(const json& j, std::string_view key, const fs::path& base) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return base / it->get<std::string>();
}

}  // namespace

std::string timestamp_now() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::unique_ptr<SuggestionProvider> make_provider(const ProviderOptions& options) {
  if (options.provider == "ngram") {
    if (!options.index) throw std::invalid_argument("provider 'ngram' needs --index");
    auto index = std::make_shared<const NGramIndex>(NGramIndex::load(*options.index));
    return std::make_unique<NGramSuggester>(std::move(index), options.suggester);
  }
  if (options.provider == "replay") {
    if (!options.cassette) throw std::invalid_argument("provider 'replay' needs --cassette");
    auto cassette = std::make_shared<const Cassette>(Cassette::load(*options.cassette));
    return std::make_unique<ReplayProvider>(std::move(cassette), true);
  }
  if (options.provider == "web") {
    return std::make_unique<WebSuggester>(options.web.with_environment());
  }
  throw std::invalid_argument("unknown provider '" + options.provider + "'");
}

std::vector<EvaluateDocument> load_manifest(const fs::path& path) {
  const auto doc = json::parse(read_text_file(path));
  const fs::path base = path.parent_path();
  std::vector<EvaluateDocument> out;
  for (const auto& d : doc.at("documents")) {
    EvaluateDocument e;
    e.label = d.at("label").get<std::string>();
    e.before = base / d.at("before").get<std::string>();
    e.after = base / d.at("after").get<std::string>();
    e.annotations_before = optional_path(d, "annotations_before", base);
    e.annotations_after = optional_path(d, "annotations_after", base);
    e.reference = optional_path(d, "reference", base);
    out.push_back(std::move(e));
  }
  return out;
}

int run_train(const TrainOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const auto corpus = read_text_file(options.corpus);
    const auto index = NGramIndex::train(corpus, options.order);
    index.save(options.index);
    out << fmt::format("trained order={} vocab={} ngrams={} total={} -> {}\n", index.order(),
                       index.vocabulary_size(), index.ngram_count(), index.total_unigrams(),
                       options.index.string());
    return kOk;
  } catch (const std::exception& e) {
    err << "train: " << e.what() << '\n';
    return kInputError;
  }
}

int run_correct(const CorrectOptions& options, std::ostream& out, std::ostream& err) {
  const fs::path audit_path = options.audit.value_or(default_audit_path(options.output));
  std::unique_ptr<SuggestionProvider> provider;
  std::string text;
  try {
    options.pipeline.validate();
    text = read_text_file(options.input);
    provider = make_provider(options.provider);
  } catch (const std::exception& e) {
    err << "correct: " << e.what() << '\n';
    return kInputError;
  }

  std::unique_ptr<RecordingProvider> recorder;
  SuggestionProvider* active = provider.get();
  if (options.record_cassette) {
    recorder = std::make_unique<RecordingProvider>(*provider, timestamp_now());
    active = recorder.get();
  }
  const auto save_recording = [&] {
    if (recorder) recorder->cassette().save(*options.record_cassette);
  };

  try {
    const auto result = run_post_edit(text, *active, options.pipeline);
    write_text_file(options.output, result.corrected_text + "\n");
    write_audit_file(audit_path, result.records);
    save_recording();
    std::size_t replaced = 0, errored = 0;
    for (const auto& r : result.records) {
      replaced += r.action == CorrectionAction::replaced ? 1 : 0;
      errored += r.action == CorrectionAction::errored ? 1 : 0;
    }
    out << fmt::format("tokens={} replaced={} kept={} errored={} provider={} -> {}\n", result.records.size(),
                       replaced, result.records.size() - replaced - errored, errored, provider->id(),
                       options.output.string());
    return kOk;
  } catch (const PipelineError& e) {
    err << "correct: " << e.what() << '\n';
    try {
      write_audit_file(audit_path, e.records());
      save_recording();
    } catch (const std::exception& inner) {
      err << "correct: " << inner.what() << '\n';
    }
    return kProviderFailure;
  } catch (const std::exception& e) {
    err << "correct: " << e.what() << '\n';
    return kInputError;
  }
}

int run_evaluate(const EvaluateOptions& options, std::ostream& out, std::ostream& err) {
  try {
    if (options.documents.empty()) throw std::invalid_argument("no documents to evaluate");
    std::vector<DocumentCounts> docs;
    std::vector<Counts> counts;
    for (const auto& d : options.documents) {
      counts.push_back(count_document(d, options.counting));
      docs.push_back({d.label, counts.back().total, counts.back().before, counts.back().after});
    }
    const auto table = build_report(docs, options.rounding);
    out << render_text(table);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (counts[i].fixed) {
        out << fmt::format("{}: annotated errors fixed {}/{}\n", docs[i].label, *counts[i].fixed,
                           counts[i].annotated);
      }
    }
    if (options.csv) write_text_file(*options.csv, render_csv(table));
    return kOk;
  } catch (const std::exception& e) {
    err << "evaluate: " << e.what() << '\n';
    return kInputError;
  }
}

int run_record(const RecordOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const auto text = read_text_file(options.input);
    const std::string created = options.created.value_or(timestamp_now());
    Cassette cassette;
    if (options.derive_from) {
      cassette = derive_cassette(text, read_text_file(*options.derive_from), options.window,
                                 {"aligned-pair", created});
    } else {
      auto provider = make_provider(options.provider);
      std::vector<std::string> queries;
      for (auto& w : tokenize(text, options.window)) queries.push_back(std::move(w.text));
      cassette = cassette_record(*provider, queries, created);
    }
    cassette.save(options.cassette);
    std::size_t with_suggestion = 0;
    for (const auto& [q, s] : cassette.entries()) with_suggestion += s ? 1 : 0;
    out << fmt::format("recorded {} queries ({} with suggestions) -> {}\n", cassette.size(), with_suggestion,
                       options.cassette.string());
    return kOk;
  } catch (const ProviderError& e) {
    err << "record: " << e.what() << '\n';
    return kProviderFailure;
  } catch (const std::exception& e) {
    err << "record: " << e.what() << '\n';
    return kInputError;
  }
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ASR transcript post-editing with spelling-suggestion providers", "postedit"};
  app.require_subcommand(1);

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Build an n-gram index from a text corpus");
  train_cmd->add_option("--corpus", train.corpus, "Corpus text file")->required();
  train_cmd->add_option("--index,-o", train.index, "Output index file")->required();
  train_cmd->add_option("--order", train.order, "Maximum n-gram order")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  CorrectOptions correct;
  auto* correct_cmd = app.add_subcommand("correct", "Post-edit a transcript");
  correct_cmd->add_option("--input,-i", correct.input, "Transcript to correct")->required();
  correct_cmd->add_option("--output,-o", correct.output, "Corrected transcript")->required();
  correct_cmd->add_option("--audit", correct.audit, "Audit trail (JSON Lines)");
  correct_cmd->add_option("--record-cassette", correct.record_cassette, "Record provider answers here");
  correct_cmd->add_option("--window", correct.pipeline.window, "Words per token")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  correct_cmd->add_option("--workers", correct.pipeline.workers, "Parallel workers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  correct_cmd->add_flag("--strict,!--lenient", correct.pipeline.strict_provider_errors,
                        "Abort on provider failure (default) or keep the token");
  add_provider_options(*correct_cmd, correct.provider);

  EvaluateOptions evaluate;
  EvaluateDocument single;
  std::optional<fs::path> manifest;
  std::string counting = "auto";
  std::string rounding = "truncated";
  auto* eval_cmd = app.add_subcommand("evaluate", "Error rates and improvement ratio");
  eval_cmd->add_option("--manifest", manifest, "JSON list of documents");
  eval_cmd->add_option("--before", single.before, "Transcript before post-editing");
  eval_cmd->add_option("--after", single.after, "Transcript after post-editing");
  eval_cmd->add_option("--annotations-before", single.annotations_before, "Error annotation for --before");
  eval_cmd->add_option("--annotations-after", single.annotations_after, "Error annotation for --after");
  eval_cmd->add_option("--reference", single.reference, "Reference transcript for aligned counting");
  eval_cmd->add_option("--label", single.label, "Column label")->default_val("document");
  eval_cmd->add_option("--counting", counting, "auto | annotated | aligned")
      ->check(CLI::IsMember({"auto", "annotated", "aligned"}))
      ->capture_default_str();
  eval_cmd->add_option("--rounding", rounding, "truncated | full")
      ->check(CLI::IsMember({"truncated", "full"}))
      ->capture_default_str();
  eval_cmd->add_option("--csv", evaluate.csv, "Also write the table as CSV");

  RecordOptions record;
  auto* record_cmd = app.add_subcommand("record", "Record a replay cassette for a transcript");
  record_cmd->add_option("--input,-i", record.input, "Transcript whose tokens are queried")->required();
  record_cmd->add_option("--cassette-out,-o", record.cassette, "Cassette to write")->required();
  record_cmd->add_option("--window", record.window, "Words per token")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  record_cmd->add_option("--derive-from", record.derive_from, "Corrected transcript to align against");
  record_cmd->add_option("--created", record.created, "Timestamp stored in the cassette header");
  add_provider_options(*record_cmd, record.provider);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsageError;
  }

  if (*train_cmd) return run_train(train, out, err);
  if (*correct_cmd) return run_correct(correct, out, err);
  if (*record_cmd) return run_record(record, out, err);

  evaluate.rounding = parse_rounding(rounding);
  evaluate.counting = counting == "annotated" ? Counting::annotated
                      : counting == "aligned" ? Counting::aligned
                                              : Counting::automatic;
  try {
    if (manifest) {
      evaluate.documents = load_manifest(*manifest);
    } else {
      if (single.before.empty() || single.after.empty()) {
        err << "evaluate: give --manifest or both --before and --after\n";
        return kUsageError;
      }
      if (!(single.annotations_before && single.annotations_after) && !single.reference) {
        err << "evaluate: need --annotations-before/--annotations-after or --reference\n";
        return kUsageError;
      }
      evaluate.documents.push_back(single);
    }
  } catch (const std::exception& e) {
    err << "evaluate: " << e.what() << '\n';
    return kInputError;
  }
  return run_evaluate(evaluate, out, err);
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace postedit::cli
