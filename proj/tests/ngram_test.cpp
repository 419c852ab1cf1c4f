#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "postedit/ngram.hpp"
#include "postedit/text.hpp"
#include "support/test_support.hpp"

namespace postedit {
namespace {

std::shared_ptr<const NGramIndex> shared_index(std::string_view corpus, std::size_t order) {
  return std::make_shared<const NGramIndex>(NGramIndex::train(corpus, order));
}

std::string saved(const NGramIndex& index) {
  std::ostringstream out;
  index.save(out);
  return out.str();
}

TEST(Levenshtein, MatchesFullMatrixOracle) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const auto a = decode_utf8(testing::random_word(rng, "abcé", 0, 7));
    const auto b = decode_utf8(testing::random_word(rng, "abcé", 0, 7));
    EXPECT_EQ(levenshtein(a, b), testing::oracle_levenshtein(a, b));
  }
  EXPECT_EQ(levenshtein(U"hord", U"hard"), 1u);
  EXPECT_EQ(levenshtein(U"cenedy", U"kennedy"), 2u);
}

TEST(NGramIndex, TrainCountsBigrams) {
  const auto index = NGramIndex::train("the boy the boy scout", 2);
  EXPECT_EQ(index.count("the boy"), 2u);
  EXPECT_EQ(index.count("boy the"), 1u);
  EXPECT_EQ(index.count("boy scout"), 1u);
  EXPECT_EQ(index.count("scout the"), 0u);
  EXPECT_EQ(index.count("the"), 2u);
  EXPECT_EQ(index.count("the boy scout"), 0u);  // longer than the order
  EXPECT_EQ(index.total_unigrams(), 5u);
  EXPECT_EQ(index.vocabulary_size(), 3u);
}

TEST(NGramIndex, CountsAreCaseInsensitive) {
  const auto index = NGramIndex::train("The boy saw the boy and the dog", 2);
  EXPECT_EQ(index.count("the boy"), 2u);
  EXPECT_EQ(index.count("THE BOY"), 2u);
  EXPECT_EQ(index.vocabulary_size(), 5u);
  EXPECT_EQ(index.surface(index.word_id("the")), "the");
}

TEST(NGramIndex, SurfaceKeepsMostFrequentSpelling) {
  const auto index = NGramIndex::train("John met john and John left", 1);
  EXPECT_EQ(index.surface(index.word_id("john")), "John");
  EXPECT_EQ(index.word_id("nobody"), kUnknownWord);
}

TEST(NGramIndex, RejectsBadTraining) {
  EXPECT_THROW(NGramIndex::train("", 3), std::invalid_argument);
  EXPECT_THROW(NGramIndex::train(" \n\t ", 3), std::invalid_argument);
  EXPECT_THROW(NGramIndex::train("a b", 0), std::invalid_argument);
}

TEST(NGramIndex, CountsMatchBruteForceRecount) {
  std::mt19937_64 rng(3);
  std::vector<std::string> words;
  for (int i = 0; i < 1000; ++i) words.push_back(testing::random_word(rng, "abc", 1, 2));
  const auto index = NGramIndex::train(join_words(words), 3);

  std::map<std::vector<std::string>, std::uint64_t> oracle;
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::size_t i = 0; i + n <= words.size(); ++i) {
      ++oracle[std::vector<std::string>(words.begin() + static_cast<std::ptrdiff_t>(i),
                                        words.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
  }
  std::size_t seen = 0;
  for (const auto& [gram, count] : oracle) {
    EXPECT_EQ(index.count(gram), count);
    ++seen;
    // Extending an n-gram can never increase its count.
    if (gram.size() > 1) {
      const std::vector<std::string> prefix(gram.begin(), gram.end() - 1);
      EXPECT_LE(count, index.count(prefix));
    }
  }
  EXPECT_EQ(index.ngram_count(), seen);
}

TEST(NGramIndex, SaveLoadRoundTrip) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    const auto corpus = testing::random_text(rng, 1 + i * 7) + " Élan élan ÉLAN";
    const auto index = NGramIndex::train(corpus, 1 + static_cast<std::size_t>(i % 4));
    const auto bytes = saved(index);
    std::istringstream in(bytes);
    const auto back = NGramIndex::load(in);
    EXPECT_EQ(back, index);
    EXPECT_EQ(saved(back), bytes);
  }
}

TEST(NGramIndex, LoadRejectsCorruptFiles) {
  const auto good = saved(NGramIndex::train("a b a", 2));
  auto load = [](const std::string& s) {
    std::istringstream in(s);
    return NGramIndex::load(in);
  };
  EXPECT_NO_THROW(load(good));
  EXPECT_THROW(load(""), std::runtime_error);
  EXPECT_THROW(load("NGRAMIDX v2 order=2 vocab=2 total=3\n"), std::runtime_error);
  // A bigram more frequent than its prefix.
  EXPECT_THROW(load("NGRAMIDX v1 order=2 vocab=2 total=3\n2\ta\n5\ta b\n1\tb\n"), std::runtime_error);
  // Declared totals disagree with the unigram lines.
  EXPECT_THROW(load("NGRAMIDX v1 order=1 vocab=2 total=9\n2\ta\n1\tb\n"), std::runtime_error);
  // Unsorted.
  EXPECT_THROW(load("NGRAMIDX v1 order=1 vocab=2 total=3\n1\tb\n2\ta\n"), std::runtime_error);
}

TEST(Candidates, WithinEditDistance) {
  const auto index = NGramIndex::train("hard hold word horse", 1);
  EXPECT_EQ(candidates("hord", index, 1), (std::vector<std::string>{"hard", "hold", "word"}));
  EXPECT_EQ(candidates("hord", index, 2), (std::vector<std::string>{"hard", "hold", "horse", "word"}));
  EXPECT_TRUE(candidates("zzzz", index, 2).empty());
  EXPECT_EQ(candidates("HARD", index, 0), (std::vector<std::string>{"hard"}));
}

TEST(Candidates, MatchBruteForce) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    std::string corpus;
    for (int w = 0; w < 60; ++w) corpus += testing::random_word(rng, "abcdé", 1, 6) + " ";
    const auto index = NGramIndex::train(corpus, 1);
    const auto word = testing::random_word(rng, "abcdéz", 1, 6);
    const std::size_t d = static_cast<std::size_t>(i % 4);
    EXPECT_EQ(candidates(word, index, d), testing::oracle_candidates(word, index.vocabulary(), d)) << word;
  }
}

TEST(Score, HandComputed) {
  const auto index = NGramIndex::train("the boy the boy scout the boy", 2);
  const std::vector<std::string> the_boy = {"the", "boy"}, boy_the = {"boy", "the"};
  // P(the) * P(boy | the) = 3/7 * 3/3 ; P(boy) * P(the | boy) = 3/7 * 1/3
  EXPECT_DOUBLE_EQ(score(the_boy, index, 0.4), 3.0 / 7.0);
  EXPECT_DOUBLE_EQ(score(boy_the, index, 0.4), 1.0 / 7.0);
  EXPECT_GT(score(the_boy, index, 0.4), score(boy_the, index, 0.4));
  // "scout boy" was never seen: back off once to P(boy).
  const std::vector<std::string> scout_boy = {"scout", "boy"};
  EXPECT_DOUBLE_EQ(score(scout_boy, index, 0.4), (1.0 / 7.0) * 0.4 * (3.0 / 7.0));
  // Unknown word: floor 1/(total * V), discounted for the dropped order.
  const std::vector<std::string> boy_zebra = {"boy", "zebra"};
  EXPECT_DOUBLE_EQ(score(boy_zebra, index, 0.4), (3.0 / 7.0) * 0.4 / 21.0);
  EXPECT_GT(score(boy_zebra, index, 0.4), 0.0);
}

TEST(Score, MatchesOracleExactly) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 200; ++i) {
    auto world = testing::make_small_world(rng);
    for (const auto& q : world.queries) {
      std::vector<std::string> folded;
      for (const auto& w : split_words(q)) folded.push_back(fold_case(w));
      EXPECT_EQ(score(folded, *world.index, world.config.backoff_alpha),
                testing::oracle_score(folded, *world.index, world.config.backoff_alpha));
    }
  }
}

TEST(SuggesterConfig, Validation) {
  SuggesterConfig c;
  EXPECT_NO_THROW(c.validate());
  c.max_edit_distance = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.backoff_alpha = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.min_exact_count = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.score_margin = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_THROW(NGramSuggester(nullptr), std::invalid_argument);
}

constexpr std::string_view kDiskCorpus =
    "the hard disk is full . the hard disk spins . hold the line . a word of advice . "
    "the horse ran . the hard disk failed again . hold on to the hard disk .";

TEST(NGramSuggester, CorrectsMisheardWord) {
  NGramSuggester s(shared_index(kDiskCorpus, 3));
  const auto out = s.suggest("the hord disk");
  ASSERT_TRUE(out);
  EXPECT_EQ(out->corrected, "the hard disk");
  EXPECT_EQ(out->provider_id, "ngram");
  EXPECT_EQ(testing::oracle_suggest("the hord disk", s.index(), s.config()), out->corrected);
}

TEST(NGramSuggester, SeenPhraseIsLeftAlone) {
  NGramSuggester s(shared_index(kDiskCorpus, 3));
  EXPECT_FALSE(s.suggest("the hard disk"));
  EXPECT_FALSE(s.suggest("The Hard Disk"));
  EXPECT_FALSE(s.suggest("the hard disk is full"));
}

TEST(NGramSuggester, OutOfVocabularyIsLeftAlone) {
  NGramSuggester s(shared_index(kDiskCorpus, 3));
  EXPECT_FALSE(s.suggest("qqqqqq xxxxxxx"));
}

TEST(NGramSuggester, RestoresCorpusCasing) {
  NGramSuggester s(shared_index("John Kennedy was president . John Kennedy spoke . people listened to John Kennedy", 2));
  const auto out = s.suggest("jahn cenedy");
  ASSERT_TRUE(out);
  EXPECT_EQ(out->corrected, "John Kennedy");
}

TEST(NGramSuggester, KeepsSurfaceOfUnchangedWords) {
  NGramSuggester s(shared_index(kDiskCorpus, 3));
  const auto out = s.suggest("THE hord disk");
  ASSERT_TRUE(out);
  EXPECT_EQ(out->corrected, "THE hard disk");
}

TEST(NGramSuggester, UntrainedIndexIsAnError) {
  NGramSuggester s(std::make_shared<const NGramIndex>());
  EXPECT_THROW(s.suggest("anything"), std::logic_error);
}

TEST(NGramSuggester, AgreesWithExhaustiveOracle) {
  std::mt19937_64 rng(29);
  int suggested = 0;
  for (int i = 0; i < 150; ++i) {
    const auto world = testing::make_small_world(rng);
    NGramSuggester s(world.index, world.config);
    for (const auto& q : world.queries) {
      const auto got = s.suggest(q);
      const auto want = testing::oracle_suggest(q, *world.index, world.config);
      ASSERT_EQ(got.has_value(), want.has_value()) << q;
      if (got) {
        EXPECT_EQ(got->corrected, *want) << q;
        ++suggested;
      }
    }
  }
  EXPECT_GT(suggested, 20);  // the property must not hold vacuously
}

TEST(NGramSuggester, CorpusPhrasesAreStable) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 50; ++i) {
    std::vector<std::string> words;
    for (int w = 0; w < 80; ++w) words.push_back(testing::random_word(rng, "abcd", 1, 4));
    const auto index = shared_index(join_words(words), 1 + static_cast<std::size_t>(i % 3));
    NGramSuggester s(index);
    for (int k = 0; k < 10; ++k) {
      const auto start = std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng);
      const auto len = std::min<std::size_t>(words.size() - start, 1 + static_cast<std::size_t>(k % 6));
      const std::vector<std::string> slice(words.begin() + static_cast<std::ptrdiff_t>(start),
                                           words.begin() + static_cast<std::ptrdiff_t>(start + len));
      EXPECT_FALSE(s.suggest(join_words(slice))) << join_words(slice);
    }
  }
}

// Re-suggesting a suggestion is not always a no-op: candidates are drawn
// around the new words, which can reach a better path. What does hold is that
// every further rewrite beats the previous phrase by score_margin, so
// repeated application climbs strictly and stops.
TEST(NGramSuggester, RepeatedSuggestionClimbsAndStops) {
  std::mt19937_64 rng(37);
  int chains = 0, longer = 0;
  for (int i = 0; i < 300; ++i) {
    auto world = testing::make_small_world(rng);
    if (world.config.score_margin <= 1.0) continue;
    NGramSuggester s(world.index, world.config);
    const double alpha = world.config.backoff_alpha;
    for (const auto& q : world.queries) {
      std::string current = q;
      int steps = 0;
      while (auto next = s.suggest(current)) {
        std::vector<std::string> before, after;
        for (const auto& w : split_words(current)) before.push_back(fold_case(w));
        for (const auto& w : split_words(next->corrected)) after.push_back(fold_case(w));
        ASSERT_GE(score(after, *world.index, alpha), world.config.score_margin * score(before, *world.index, alpha));
        current = next->corrected;
        ASSERT_LT(++steps, 1000) << q;
      }
      chains += steps > 0 ? 1 : 0;
      longer += steps > 1 ? 1 : 0;
    }
  }
  EXPECT_GT(chains, 50);
  EXPECT_GT(longer, 0);  // second rewrites do occur
}

TEST(NGramSuggester, SecondRewriteCounterexample) {
  SuggesterConfig c;
  c.max_edit_distance = 1;
  c.min_exact_count = 2;
  NGramSuggester s(shared_index("xx xy xy", 1), c);
  EXPECT_EQ(s.suggest("zx")->corrected, "xx");
  EXPECT_EQ(s.suggest("xx")->corrected, "xy");
  EXPECT_FALSE(s.suggest("xy"));
}

TEST(NGramSuggester, LongQueriesUseBeamSearch) {
  // 40 candidate-rich positions exceed the exhaustive limit; the search must
  // still finish and return a phrase of the same length.
  std::string corpus;
  for (int i = 0; i < 50; ++i) corpus += "ab ac ad ae ba ca da ea ";
  NGramSuggester s(shared_index(corpus, 2));
  std::vector<std::string> q(40, "az");
  const auto out = s.suggest(join_words(q));
  if (out) EXPECT_EQ(split_words(out->corrected).size(), q.size());
}

}  // namespace
}  // namespace postedit
