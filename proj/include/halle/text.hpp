#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace halle {

// Byte range [start, end) into a UTF-8 string.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool contains(const Span& other) const {
    return start <= other.start && other.end <= end;
  }
  bool overlaps(const Span& other) const {
    return start < other.end && other.start < end;
  }
  friend bool operator==(const Span&, const Span&) = default;
};

struct WordToken {
  std::string_view text;
  Span span;
  int sentence = 0;
};

// Unicode simple lowercase for ASCII, Latin-1, Latin Extended-A, Greek and
// Cyrillic. Every mapping keeps the UTF-8 byte length, so offsets into the
// folded string are valid offsets into the input.
std::string fold_case(std::string_view text);

// Word tokens: runs of ASCII alphanumerics or non-ASCII bytes, with internal
// hyphens and apostrophes kept. When split_sentences is set, '.', '!' and '?'
// advance the sentence counter.
std::vector<WordToken> tokenize_words(std::string_view text,
                                      bool split_sentences = false);

// Number of sentence units tokenize_words would report (at least 1).
int count_sentences(std::string_view text);

std::size_t count_whitespace_words(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool is_word_byte(unsigned char c);

// Byte length of the word character starting at text[i], or 0 when the
// character separates words.
std::size_t word_char_length(std::string_view text, std::size_t i);

}  // namespace halle
