#include "halle/text.hpp"

#include <algorithm>
#include <cctype>

namespace halle {
namespace {

// Lowercase a code point when both forms encode to the same number of bytes.
char32_t simple_lower(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
  }
  // Latin-1: U+00C0..U+00DE except U+00D7.
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  // Latin Extended-A: alternating upper/lower pairs.
  if (cp == 0x130 || cp == 0x131) return cp;
  if (cp >= 0x100 && cp <= 0x137) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return (cp % 2 == 1) ? cp + 1 : cp;
  // Greek capitals.
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;
  if (cp == 0x386) return 0x3AC;
  if (cp >= 0x388 && cp <= 0x38A) return cp + 37;
  // Cyrillic.
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

void append_utf8(std::string& out, char32_t cp, std::size_t len) {
  switch (len) {
    case 1:
      out.push_back(static_cast<char>(cp));
      break;
    case 2:
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      break;
    default:
      break;
  }
}

}  // namespace

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

std::size_t word_char_length(std::string_view text, std::size_t i) {
  auto c = static_cast<unsigned char>(text[i]);
  if (c < 0x80) return std::isalnum(c) ? 1 : 0;
  // A continuation byte never starts a character.
  if ((c & 0xC0) == 0x80) return 0;
  std::size_t len = 1;
  if ((c & 0xE0) == 0xC0) {
    len = 2;
  } else if ((c & 0xF0) == 0xE0) {
    len = 3;
  } else if ((c & 0xF8) == 0xF0) {
    len = 4;
  }
  len = std::min(len, text.size() - i);
  // General punctuation block (quotes, dashes, ellipsis) separates words.
  if (len == 3 && c == 0xE2 &&
      (static_cast<unsigned char>(text[i + 1]) == 0x80 ||
       static_cast<unsigned char>(text[i + 1]) == 0x81)) {
    return 0;
  }
  // No-break space.
  if (len == 2 && c == 0xC2 && static_cast<unsigned char>(text[i + 1]) == 0xA0) {
    return 0;
  }
  return len;
}

std::string fold_case(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    if (c < 0x80) {
      out.push_back(static_cast<char>(simple_lower(c)));
      ++i;
      continue;
    }
    if ((c & 0xE0) == 0xC0 && i + 1 < text.size()) {
      auto c1 = static_cast<unsigned char>(text[i + 1]);
      char32_t cp = ((c & 0x1F) << 6) | (c1 & 0x3F);
      char32_t lower = simple_lower(cp);
      if (lower < 0x800 && lower >= 0x80) {
        append_utf8(out, lower, 2);
      } else {
        out.append(text.substr(i, 2));
      }
      i += 2;
      continue;
    }
    out.push_back(static_cast<char>(c));
    ++i;
  }
  return out;
}

std::vector<WordToken> tokenize_words(std::string_view text,
                                      bool split_sentences) {
  std::vector<WordToken> tokens;
  int sentence = 0;
  bool sentence_has_words = false;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (std::size_t len = word_char_length(text, i); len > 0) {
      std::size_t start = i;
      i += len;
      while (i < n) {
        auto d = static_cast<unsigned char>(text[i]);
        if (std::size_t more = word_char_length(text, i); more > 0) {
          i += more;
        } else if ((d == '-' || d == '\'') && i + 1 < n &&
                   word_char_length(text, i + 1) > 0) {
          ++i;
        } else if (d == '.' && i + 1 < n &&
                   std::isdigit(static_cast<unsigned char>(text[i + 1])) &&
                   std::isdigit(static_cast<unsigned char>(text[i - 1]))) {
          ++i;  // decimal point
        } else {
          break;
        }
      }
      tokens.push_back({text.substr(start, i - start), {start, i}, sentence});
      sentence_has_words = true;
      continue;
    }
    char c = text[i];
    if (split_sentences && (c == '.' || c == '!' || c == '?') &&
        sentence_has_words) {
      ++sentence;
      sentence_has_words = false;
    }
    ++i;
  }
  return tokens;
}

int count_sentences(std::string_view text) {
  auto tokens = tokenize_words(text, true);
  if (tokens.empty()) return 1;
  return tokens.back().sentence + 1;
}

std::size_t count_whitespace_words(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (char ch : text) {
    bool space = std::isspace(static_cast<unsigned char>(ch)) != 0;
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

std::string_view trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return text.substr(b, e - b);
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      break;
    }
    parts.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

}  // namespace halle
