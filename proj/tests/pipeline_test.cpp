#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "postedit/pipeline.hpp"
#include "postedit/text.hpp"
#include "support/test_support.hpp"

namespace postedit {
namespace {

std::string words(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += "w" + std::to_string(i) + " ";
  return s;
}

PipelineConfig config(std::size_t window, std::size_t workers = 1, bool strict = true) {
  PipelineConfig c;
  c.window = window;
  c.workers = workers;
  c.strict_provider_errors = strict;
  return c;
}

// Not safe for concurrent use.
class SerialProvider final : public SuggestionProvider {
 public:
  std::string_view id() const override { return "serial"; }

 protected:
  std::optional<Suggestion> do_suggest(std::string_view) override { return std::nullopt; }
};

TEST(PostEdit, IdentityProviderNormalizesWhitespace) {
  testing::CountingProvider p;
  const auto r = post_edit("  a  b\tc\n\nd ", p, config(2));
  EXPECT_EQ(r.corrected_text, "a b c d");
  EXPECT_EQ(r.provider_calls, 2u);
  for (const auto& rec : r.records) EXPECT_EQ(rec.action, CorrectionAction::kept);
}

TEST(PostEdit, OneCallPerWindow) {
  testing::CountingProvider p;
  const auto r = post_edit(words(13), p, config(6));
  EXPECT_EQ(p.calls(), 3u);
  EXPECT_EQ(r.records.size(), 3u);
  EXPECT_EQ(p.queries().back(), "w12");
  testing::CountingProvider empty;
  EXPECT_EQ(post_edit("", empty, config(6)).corrected_text, "");
  EXPECT_EQ(empty.calls(), 0u);
}

TEST(PostEdit, CallCountLaw) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 200; ++i) {
    const auto n = std::uniform_int_distribution<std::size_t>(0, 300)(rng);
    const auto w = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    testing::CountingProvider p;
    post_edit(testing::random_text(rng, n), p, config(w));
    EXPECT_EQ(p.calls(), (n + w - 1) / w) << n << " " << w;
  }
}

TEST(PostEdit, ReplacesWholeWindow) {
  testing::PoisonProvider p("nothing-matches");
  const auto r = post_edit("a b c d e", p, config(2));
  EXPECT_EQ(r.corrected_text, "ok ok ok");
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_EQ(r.records[2].original_text, "e");
  EXPECT_EQ(r.records[2].replacement_text, std::optional<std::string>("ok"));
  EXPECT_EQ(r.records[2].action, CorrectionAction::replaced);
}

TEST(PostEdit, RecordsPartitionTheInput) {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 50; ++i) {
    const auto text = testing::random_text(rng, 1 + static_cast<std::size_t>(i * 3));
    testing::HashProvider p(static_cast<std::uint64_t>(i));
    const auto r = post_edit(text, p, config(1 + static_cast<std::size_t>(i % 7)));
    std::vector<std::string> originals, outputs;
    for (std::size_t k = 0; k < r.records.size(); ++k) {
      EXPECT_EQ(r.records[k].token_index, k);
      EXPECT_EQ(r.records[k].replacement_text.has_value(), r.records[k].action == CorrectionAction::replaced);
      originals.push_back(r.records[k].original_text);
      outputs.push_back(r.records[k].output_text());
    }
    EXPECT_EQ(concatenate(originals), join_words(split_words(text)));
    EXPECT_EQ(concatenate(outputs), r.corrected_text);
  }
}

TEST(PostEdit, StrictModeStopsAtFirstFailure) {
  testing::PoisonProvider p("w7");
  try {
    post_edit(words(20), p, config(3));
    FAIL() << "expected PipelineError";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.token_index(), 2u);
    EXPECT_EQ(e.records().size(), 2u);
    EXPECT_NE(std::string(e.what()).find("token_index 2"), std::string::npos);
  }
}

TEST(PostEdit, LenientModeKeepsFailedTokens) {
  testing::PoisonProvider p("w7");
  const auto r = post_edit(words(9), p, config(3, 1, false));
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_EQ(r.records[2].action, CorrectionAction::errored);
  EXPECT_EQ(r.records[2].output_text(), "w6 w7 w8");
  EXPECT_EQ(r.records[2].error, "unreachable");
  EXPECT_EQ(r.corrected_text, "ok ok w6 w7 w8");
}

TEST(PostEdit, IdempotentUnderIdentity) {
  std::mt19937_64 rng(47);
  for (int i = 0; i < 20; ++i) {
    const auto text = testing::random_text(rng, static_cast<std::size_t>(i * 5));
    testing::CountingProvider p;
    const auto once = post_edit(text, p, config(4)).corrected_text;
    EXPECT_EQ(post_edit(once, p, config(4)).corrected_text, once);
  }
}

TEST(PostEdit, RejectsBadConfig) {
  testing::CountingProvider p;
  EXPECT_THROW(post_edit("a", p, config(0)), std::invalid_argument);
  EXPECT_THROW(post_edit_parallel("a", p, config(1, 0)), std::invalid_argument);
}

TEST(PartitionTokens, ContiguousAndBalanced) {
  for (std::size_t n = 0; n < 40; ++n) {
    for (std::size_t p = 1; p < 10; ++p) {
      const auto ranges = partition_tokens(n, p);
      EXPECT_EQ(ranges.size(), std::min(n, p));
      std::size_t next = 0, lo = n, hi = 0;
      for (const auto& [b, e] : ranges) {
        EXPECT_EQ(b, next);
        EXPECT_LT(b, e);
        lo = std::min(lo, e - b);
        hi = std::max(hi, e - b);
        next = e;
      }
      EXPECT_EQ(next, n);
      if (!ranges.empty()) EXPECT_LE(hi - lo, 1u);
    }
  }
  EXPECT_THROW(partition_tokens(3, 0), std::invalid_argument);
}

TEST(PostEditParallel, EvenSplitAcrossWorkers) {
  testing::CountingProvider p;
  post_edit_parallel(words(100), p, config(1, 4));
  const auto per_thread = p.calls_per_thread();
  ASSERT_EQ(per_thread.size(), 4u);
  for (const auto& [_, calls] : per_thread) EXPECT_EQ(calls, 25u);
}

TEST(PostEditParallel, MatchesSequential) {
  std::mt19937_64 rng(53);
  for (int i = 0; i < 60; ++i) {
    const auto text = testing::random_text(rng, std::uniform_int_distribution<std::size_t>(0, 200)(rng));
    const auto w = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    testing::HashProvider p(static_cast<std::uint64_t>(i));
    const auto seq = post_edit(text, p, config(w));
    for (std::size_t workers : {2u, 4u, 8u}) {
      const auto par = post_edit_parallel(text, p, config(w, workers));
      EXPECT_EQ(par.corrected_text, seq.corrected_text);
      EXPECT_EQ(par.records, seq.records);
    }
  }
}

TEST(PostEditParallel, LowestFailingTokenWins) {
  testing::HashProvider p(99, 150);
  std::mt19937_64 rng(59);
  int failures = 0;
  for (int i = 0; i < 30; ++i) {
    const auto text = testing::random_text(rng, 120);
    std::optional<std::size_t> seq_index, par_index;
    std::vector<CorrectionRecord> seq_trail, par_trail;
    try {
      post_edit(text, p, config(3));
    } catch (const PipelineError& e) {
      seq_index = e.token_index();
      seq_trail = e.records();
    }
    try {
      post_edit_parallel(text, p, config(3, 4));
    } catch (const PipelineError& e) {
      par_index = e.token_index();
      par_trail = e.records();
    }
    EXPECT_EQ(seq_index, par_index);
    EXPECT_EQ(seq_trail, par_trail);
    if (seq_index) ++failures;
    // Lenient mode agrees record-for-record.
    EXPECT_EQ(post_edit(text, p, config(3, 1, false)).records,
              post_edit_parallel(text, p, config(3, 4, false)).records);
  }
  EXPECT_GT(failures, 0);
}

TEST(PostEditParallel, RequiresConcurrentSafeProvider) {
  SerialProvider serial;
  EXPECT_THROW(post_edit_parallel(words(10), serial, config(2, 2)), std::invalid_argument);
  EXPECT_NO_THROW(post_edit_parallel(words(10), serial, config(2, 1)));
  // A factory gives every worker its own instance.
  const auto r = post_edit_parallel(
      words(10), [] { return std::make_unique<SerialProvider>(); }, config(2, 3));
  EXPECT_EQ(r.corrected_text, join_words(split_words(words(10))));
}

TEST(PostEditParallel, FrenchReplayWithFourWorkers) {
  auto cassette =
      std::make_shared<const Cassette>(Cassette::load(testing::data_path("fixtures/fr_asr.cassette.jsonl")));
  ReplayProvider replay(cassette);
  const auto asr = read_text_file(testing::data_path("fixtures/fr_asr.txt"));
  const auto corrected = read_text_file(testing::data_path("fixtures/fr_corrected.txt"));
  const auto r = run_post_edit(asr, replay, config(6, 4));
  EXPECT_EQ(r.corrected_text, join_words(split_words(corrected)));
  EXPECT_EQ(r.provider_calls, 19u);
}

TEST(Audit, JsonLinesRoundTrip) {
  testing::PoisonProvider p("w4");
  const auto r = post_edit(words(9) + " \"quoted\" élan", p, config(2, 1, false));
  std::ostringstream out;
  write_audit(out, r.records);
  std::istringstream in(out.str());
  std::string line;
  std::vector<CorrectionRecord> back;
  while (std::getline(in, line)) back.push_back(record_from_json_line(line));
  EXPECT_EQ(back, r.records);
  EXPECT_EQ(to_json_line(r.records[0]),
            R"({"action":"replaced","original_text":"w0 w1","replacement_text":"ok","token_index":0})");
  EXPECT_THROW(record_from_json_line(R"({"token_index":0,"original_text":"a","replacement_text":null,"action":"x"})"),
               std::invalid_argument);
}

}  // namespace
}  // namespace postedit
