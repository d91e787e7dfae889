#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "teamviab/error.hpp"
#include "teamviab/lexicon.hpp"

using namespace teamviab;

TEST_CASE("tokenize normalizes and splits sentences") {
  const auto a = tokenize("Héllo, WORLD!");
  CHECK(a.tokens == std::vector<std::string>{"hello", "world"});
  CHECK(a.sentence_count() == 1);

  CHECK(tokenize("").empty());
  CHECK(tokenize("").sentence_count() == 0);

  const auto b = tokenize("don't stop. go!");
  CHECK(b.tokens == std::vector<std::string>{"don't", "stop", "go"});
  CHECK(b.sentence_count() == 2);

  CHECK(tokenize("Wait... what?!").sentence_count() == 2);
  CHECK(tokenize("no punctuation here").sentence_count() == 1);
  CHECK(tokenize("'quoted' words").tokens == std::vector<std::string>{"quoted", "words"});
  CHECK(tokenize("CAFÉ naïve").tokens == std::vector<std::string>{"cafe", "naive"});
  CHECK(tokenize("don’t").tokens == std::vector<std::string>{"don't"});
  CHECK(tokenize("room 42b, 7").tokens == std::vector<std::string>{"room", "42b", "7"});
}

TEST_CASE("count_category examples") {
  const auto& lex = testutil::lexicons();
  CHECK(count_category(tokenize("we can, but not that, except this"), lex.at("exclusive")) == 2);
  CHECK(count_category(tokenize(""), lex.at("exclusive")) == 0);

  CategoryLexicon c("certainty");
  c.add("certain*");
  CHECK(count_category(tokenize("certainly"), c) == 1);
  CHECK(count_category(tokenize("uncertain"), c) == 0);
}

TEST_CASE("literal entries win and the longest prefix wins") {
  CategoryLexicon s("sentiment", LexiconKind::sentiment);
  s.add("good", SentimentScore{0.7, 0.6});
  s.add("go*", SentimentScore{0.1, 0.1});
  s.add("goo*", SentimentScore{0.2, 0.2});
  CHECK(s.lookup("good")->polarity == 0.7);
  CHECK(s.lookup("goody")->polarity == 0.2);
  CHECK(s.lookup("gone")->polarity == 0.1);
  CHECK(s.lookup("g") == nullptr);
}

TEST_CASE("malformed entries are rejected") {
  CategoryLexicon c("x");
  CHECK_THROWS_AS(c.add("two words"), std::invalid_argument);
  CHECK_THROWS_AS(c.add(""), std::invalid_argument);
  CHECK_THROWS_AS(c.add("a**"), std::invalid_argument);
  CHECK_THROWS_AS(c.add("a*b"), std::invalid_argument);
  CategoryLexicon s("s", LexiconKind::sentiment);
  CHECK_THROWS_AS(s.add("x", SentimentScore{1.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(s.add("x", SentimentScore{0.5, -0.1}), std::invalid_argument);
}

TEST_CASE("bundled directory has the 22 standard lexicons") {
  const auto& lex = testutil::lexicons();
  CHECK(lex.size() == 22);
  for (auto name : kWordCategories) CHECK(lex.contains(name));
  CHECK(lex.contains(kArgueLexicon));
  CHECK(lex.at(kArgueLexicon).size() == 17);
  CHECK(lex.at(kSentimentLexicon).kind() == LexiconKind::sentiment);
  CHECK(lex.contains(kEasyWordsLexicon));
}

TEST_CASE("lexicon directory errors") {
  testutil::TempDir dir("lexicon_dir");
  for (const auto& entry : std::filesystem::directory_iterator(default_lexicon_dir())) {
    if (entry.path().filename() != "exclusive.txt") std::filesystem::copy(entry.path(), dir.path());
  }
  try {
    load_lexicon_dir(dir.path());
    FAIL("expected a missing-category error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("exclusive") != std::string::npos);
  }

  testutil::write_file(dir / "exclusive.txt", "#name: exclusive\nbut\ntwo words\n");
  try {
    load_lexicon_dir(dir.path());
    FAIL("expected a parse error");
  } catch (const ValidationError& e) {
    CHECK(e.line() == 3);
    CHECK(e.file().find("exclusive.txt") != std::string::npos);
  }

  testutil::write_file(dir / "exclusive.txt", "#name: exclusive\nbut\n");
  testutil::write_file(dir / "exclusive2.txt", "#name: exclusive\nor\n");
  CHECK_THROWS_AS(load_lexicon_dir(dir.path()), ValidationError);
}

TEST_CASE("counting properties on random token streams") {
  const auto& lex = testutil::lexicons();
  std::vector<std::string> vocab = {"but", "we", "you", "not", "sad", "certainly", "the", "of", "and",
                                    "rope", "maybe", "never", "always", "i", "our", "they", "very", "angry"};
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto make = [&] {
      std::string text;
      const int n = static_cast<int>(gen() % 30);
      for (int i = 0; i < n; ++i) {
        text += vocab[gen() % vocab.size()];
        text += (gen() % 5 == 0) ? ". " : " ";
      }
      return tokenize(text);
    };
    const auto a = make();
    const auto b = make();
    auto ab = a;
    ab.append(b);
    for (auto name : kWordCategories) {
      const auto& c = lex.at(name);
      CHECK(count_category(a, c) <= a.size());
      CHECK(count_category(ab, c) == count_category(a, c) + count_category(b, c));
    }
    CHECK(ab.sentence_count() == a.sentence_count() + b.sentence_count());
    // Idempotent on its own detokenized output.
    CHECK(tokenize(detokenize(a)).tokens == a.tokens);
    CHECK(tokenize(detokenize(a)).sentence_count() == a.sentence_count());
  }
}
