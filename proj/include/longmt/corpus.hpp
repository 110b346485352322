#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "longmt/errors.hpp"
#include "longmt/text.hpp"

namespace longmt::corpus {

// A mined source sentence with book/position provenance. `index` is the
// extraction position within the book; `id` is a content hash that is
// stable given (book_id, index, text).
struct RawSentence {
  std::string id;
  std::string book_id;
  std::uint64_t index = 0;
  std::string text;
  int word_count = 0;

  bool operator==(const RawSentence&) const = default;
};

inline std::string make_sentence_id(std::string_view book_id,
                                    std::uint64_t index,
                                    std::string_view text) {
  std::string key;
  key.reserve(book_id.size() + text.size() + 24);
  key.append(book_id);
  key.push_back('\x1f');
  key.append(std::to_string(index));
  key.push_back('\x1f');
  key.append(text);
  return text::hex64(text::fnv1a64(key));
}

inline RawSentence make_sentence(std::string book_id, std::uint64_t index,
                                 std::string sentence_text) {
  RawSentence s;
  s.book_id = std::move(book_id);
  s.index = index;
  s.text = std::move(sentence_text);
  s.word_count = text::count_words(s.text);
  s.id = make_sentence_id(s.book_id, s.index, s.text);
  return s;
}

namespace detail {

// Tokens that end with '.' without ending a sentence. Matched
// case-insensitively against the word preceding a period.
inline const std::unordered_set<std::string>& abbreviation_stoplist() {
  static const std::unordered_set<std::string> kList = {
      "mr.",  "mrs.",  "ms.",   "dr.",   "st.",   "prof.", "rev.",
      "hon.", "capt.", "col.",  "gen.",  "lt.",   "sgt.",  "maj.",
      "jr.",  "sr.",   "messrs.", "mme.", "mlle.", "vs.",  "etc.",
      "e.g.", "i.e.",  "viz.",  "no.",   "vol.",  "ch.",   "pp.",
      "cf.",  "al.",   "esq.",  "fig.",  "sec.",  "mt.",   "ft.",
      "co.",  "inc.",  "ltd."};
  return kList;
}

inline bool is_upper_letter(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return true;
  // Latin-1 uppercase range, minus the multiplication sign.
  return cp >= 0xC0 && cp <= 0xDE && cp != 0xD7;
}

inline bool is_opening_quote(char32_t cp) {
  return cp == U'"' || cp == U'\'' || cp == 0x201C || cp == 0x2018 ||
         cp == 0x00AB;
}

inline bool is_closing_quote(char32_t cp) {
  return cp == U'"' || cp == U'\'' || cp == 0x201D || cp == 0x2019 ||
         cp == 0x00BB || cp == U')' || cp == U']';
}

// The whitespace-delimited token ending at position `end` (exclusive),
// lowercased; leading quotes/brackets stripped.
inline std::string token_before(const std::vector<char32_t>& cps,
                                std::size_t end) {
  std::size_t b = end;
  while (b > 0 && !text::is_space(cps[b - 1])) --b;
  while (b < end && (is_opening_quote(cps[b]) || cps[b] == U'(' || cps[b] == U'[')) ++b;
  std::string token;
  for (std::size_t i = b; i < end; ++i) text::append_utf8(token, cps[i]);
  return text::lowercase_ascii(token);
}

inline bool is_abbreviation_token(const std::string& token) {
  if (token.empty() || token.back() != '.') return false;
  if (abbreviation_stoplist().count(token) > 0) return true;
  // Single initials such as "J." (and dotted runs such as "J.R.").
  bool dotted_initials = true;
  bool expect_letter = true;
  for (char c : token) {
    if (expect_letter) {
      if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'))) {
        dotted_initials = false;
        break;
      }
    } else if (c != '.') {
      dotted_initials = false;
      break;
    }
    expect_letter = !expect_letter;
  }
  return dotted_initials && token.size() <= 6;
}

}  // namespace detail

// Splits a book into sentences in document order. A boundary is terminal
// punctuation (. ! ?), optionally followed by closing quotes, followed by
// whitespace and an uppercase letter or a quote. Periods ending a token in
// the abbreviation stop-list do not split. Whitespace inside a sentence
// (including line breaks) is normalized to single spaces. Trailing text
// without terminal punctuation is still emitted; nothing is dropped.
inline std::vector<RawSentence> extract_sentences(const std::string& book_id,
                                                  const std::string& book_text) {
  const std::vector<char32_t> cps = text::to_codepoints(book_text);
  std::vector<RawSentence> out;
  std::uint64_t next_index = 0;
  std::vector<char32_t> current;

  auto flush = [&]() {
    if (current.empty()) return;
    std::string s = text::normalize_whitespace(text::from_codepoints(current));
    current.clear();
    if (s.empty()) return;
    out.push_back(make_sentence(book_id, next_index++, std::move(s)));
  };

  std::size_t i = 0;
  const std::size_t n = cps.size();
  while (i < n) {
    const char32_t c = cps[i];
    current.push_back(c);
    if (c == U'.' || c == U'!' || c == U'?') {
      const std::size_t punct_pos = i;
      std::size_t j = i + 1;
      while (j < n && detail::is_closing_quote(cps[j])) {
        current.push_back(cps[j]);
        ++j;
      }
      if (j >= n) {
        i = j;
        flush();
        continue;
      }
      if (text::is_space(cps[j])) {
        std::size_t k = j;
        while (k < n && text::is_space(cps[k])) ++k;
        const bool next_starts_sentence =
            k >= n || detail::is_upper_letter(cps[k]) ||
            detail::is_opening_quote(cps[k]);
        bool boundary = next_starts_sentence;
        if (boundary && c == U'.') {
          const std::string token = detail::token_before(cps, punct_pos + 1);
          if (detail::is_abbreviation_token(token)) boundary = false;
        }
        if (boundary) {
          i = j;
          flush();
          continue;
        }
      }
      i = j;
      continue;
    }
    ++i;
  }
  flush();
  return out;
}

// Drops exact-text duplicates within one book, keeping the first
// occurrence. Repeated epigraphs and running heads would otherwise bias
// the corpus.
inline std::vector<RawSentence> dedup_exact(std::vector<RawSentence> sentences) {
  std::unordered_set<std::string> seen;
  std::vector<RawSentence> out;
  out.reserve(sentences.size());
  for (auto& s : sentences) {
    if (seen.insert(s.book_id + "\x1f" + s.text).second) {
      out.push_back(std::move(s));
    }
  }
  return out;
}

// Keeps sentences with min_words <= word_count <= max_words, in order.
inline std::vector<RawSentence> filter_by_length(
    const std::vector<RawSentence>& sentences, int min_words = 10,
    int max_words = 100) {
  if (min_words < 0 || max_words < 0 || min_words > max_words) {
    throw ConfigError("filter_by_length: invalid bounds [" +
                      std::to_string(min_words) + ", " +
                      std::to_string(max_words) + "]");
  }
  std::vector<RawSentence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    if (s.word_count >= min_words && s.word_count <= max_words) out.push_back(s);
  }
  return out;
}

inline nlohmann::json to_json(const RawSentence& s) {
  return nlohmann::json{{"id", s.id},
                        {"book_id", s.book_id},
                        {"index", s.index},
                        {"text", s.text},
                        {"word_count", s.word_count}};
}

inline RawSentence sentence_from_json(const nlohmann::json& j) {
  RawSentence s;
  try {
    s.id = j.at("id").get<std::string>();
    s.book_id = j.at("book_id").get<std::string>();
    s.index = j.at("index").get<std::uint64_t>();
    s.text = j.at("text").get<std::string>();
    s.word_count = j.at("word_count").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad sentence record: ") + e.what());
  }
  return s;
}

}  // namespace longmt::corpus
