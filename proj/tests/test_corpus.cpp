#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "longmt/corpus.hpp"

using namespace longmt;
using corpus::extract_sentences;
using corpus::filter_by_length;
using corpus::RawSentence;

namespace {

std::vector<std::string> texts(const std::vector<RawSentence>& v) {
  std::vector<std::string> out;
  for (const auto& s : v) out.push_back(s.text);
  return out;
}

RawSentence sentence_with_words(int n) {
  std::string text;
  for (int i = 0; i < n; ++i) {
    if (i) text += ' ';
    text += "w" + std::to_string(i);
  }
  return corpus::make_sentence("b", 0, text);
}

}  // namespace

TEST_CASE("two terminal periods split") {
  CHECK(texts(extract_sentences("b1", "It rained. He left.")) ==
        std::vector<std::string>{"It rained.", "He left."});
}

TEST_CASE("abbreviation stop-list keeps Mr. intact") {
  CHECK(texts(extract_sentences("b1", "Mr. Smith came. He sat.")) ==
        std::vector<std::string>{"Mr. Smith came.", "He sat."});
}

TEST_CASE("empty input yields empty sequence") {
  CHECK(extract_sentences("b1", "").empty());
}

TEST_CASE("exclamation and question marks split") {
  CHECK(texts(extract_sentences("b", "Really! Indeed? Yes.")) ==
        std::vector<std::string>{"Really!", "Indeed?", "Yes."});
}

TEST_CASE("quote after terminal punctuation stays with its sentence") {
  CHECK(texts(extract_sentences("b", "\"Stop here.\" He nodded.")) ==
        std::vector<std::string>{"\"Stop here.\"", "He nodded."});
}

TEST_CASE("lowercase continuation does not split") {
  CHECK(texts(extract_sentences("b", "He arrived at 3 p.m. and slept. Then dawn.")) ==
        std::vector<std::string>{"He arrived at 3 p.m. and slept.", "Then dawn."});
}

TEST_CASE("single initials do not split") {
  CHECK(texts(extract_sentences("b", "J. Smith wrote it. True story.")) ==
        std::vector<std::string>{"J. Smith wrote it.", "True story."});
}

TEST_CASE("line breaks inside a sentence are normalized") {
  const auto v = extract_sentences("b", "The rain\nfell   softly. It stopped.");
  REQUIRE(v.size() == 2);
  CHECK(v[0].text == "The rain fell softly.");
  CHECK(v[0].word_count == 4);
}

TEST_CASE("trailing fragment without punctuation is kept") {
  CHECK(texts(extract_sentences("b", "Done. and then silence")) ==
        std::vector<std::string>{"Done. and then silence"});
  CHECK(texts(extract_sentences("b", "Done. And then")) ==
        std::vector<std::string>{"Done.", "And then"});
}

TEST_CASE("sentences are in document order with stable ids") {
  const auto v = extract_sentences("book", "One two. Three four. Five six.");
  REQUIRE(v.size() == 3);
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(v[i].index == i);
    CHECK(v[i].book_id == "book");
    CHECK(v[i].id == corpus::make_sentence_id("book", i, v[i].text));
    CHECK(v[i].word_count == 2);
  }
  // Same inputs, same ids; different book, different ids.
  CHECK(corpus::make_sentence_id("book", 0, "One two.") ==
        corpus::make_sentence_id("book", 0, "One two."));
  CHECK(corpus::make_sentence_id("book", 0, "One two.") !=
        corpus::make_sentence_id("other", 0, "One two."));
}

TEST_CASE("segmentation loses no content") {
  // Concatenating the extracted sentences must reproduce the normalized
  // source text.
  auto check_lossless = [](const std::string& content) {
    std::string joined;
    for (const auto& s : extract_sentences("b", content)) {
      if (!joined.empty()) joined += ' ';
      joined += s.text;
    }
    CHECK(joined == text::normalize_whitespace(content));
  };
  check_lossless("It rained. He left. Then what? \"Nothing!\" she said.");
  check_lossless("Mr. Brown met Dr. Grey at St. Pauls. They spoke.");
  check_lossless("One\nline\nbroken   badly. Another one here.");

  std::mt19937_64 rng(7);
  const std::vector<std::string> words{"the", "river",  "was", "Grey",
                                       "and", "silent", "Mr.", "it"};
  const std::vector<std::string> punct{".", "!", "?"};
  for (int trial = 0; trial < 50; ++trial) {
    std::string content;
    const int sentences = 1 + static_cast<int>(rng() % 5);
    for (int s = 0; s < sentences; ++s) {
      const int len = 1 + static_cast<int>(rng() % 6);
      for (int w = 0; w < len; ++w) {
        content += words[rng() % words.size()];
        content += (rng() % 7 == 0) ? "\n" : " ";
      }
      content += "end" + punct[rng() % punct.size()] + " ";
    }
    check_lossless(content);
  }
}

TEST_CASE("length filter boundaries") {
  CHECK(filter_by_length({sentence_with_words(9)}).empty());
  CHECK(filter_by_length({sentence_with_words(10)}).size() == 1);
  CHECK(filter_by_length({sentence_with_words(100)}).size() == 1);
  CHECK(filter_by_length({sentence_with_words(101)}).empty());
}

TEST_CASE("length filter is idempotent and order preserving") {
  std::vector<RawSentence> v;
  for (int n : {5, 10, 50, 100, 101, 12}) v.push_back(sentence_with_words(n));
  const auto once = filter_by_length(v);
  CHECK(filter_by_length(once) == once);
  REQUIRE(once.size() == 4);
  CHECK(once[0].word_count == 10);
  CHECK(once[1].word_count == 50);
  CHECK(once[2].word_count == 100);
  CHECK(once[3].word_count == 12);
  for (const auto& s : once) {
    CHECK(s.word_count >= 10);
    CHECK(s.word_count <= 100);
  }
}

TEST_CASE("length filter rejects invalid bounds") {
  CHECK_THROWS_AS(filter_by_length({}, 20, 10), ConfigError);
  CHECK_THROWS_AS(filter_by_length({}, -1, 10), ConfigError);
}

TEST_CASE("dedup keeps first occurrence per book") {
  auto v = extract_sentences("b", "Same line here. Other line now. Same line here.");
  REQUIRE(v.size() == 3);
  const auto deduped = corpus::dedup_exact(v);
  REQUIRE(deduped.size() == 2);
  CHECK(deduped[0].text == "Same line here.");
  CHECK(deduped[0].index == 0);
  CHECK(deduped[1].text == "Other line now.");
}

TEST_CASE("sentence json round trip") {
  const auto s = corpus::make_sentence("bk", 3, "A small test sentence.");
  CHECK(corpus::sentence_from_json(corpus::to_json(s)) == s);
}
