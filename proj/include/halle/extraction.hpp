#pragma once

#include <optional>
#include <string>
#include <vector>

#include "halle/io.hpp"
#include "halle/lexicon.hpp"
#include "halle/text.hpp"

namespace halle {

class ChatClient;

struct Caption {
  std::string id;
  std::string image_id;
  std::string text;
  // When false, square brackets are ordinary punctuation and no mention is
  // indicated.
  bool indicated_markup = true;
};

// Throws kInputParse on missing fields or empty text.
Caption caption_from_json(const json& record);
json caption_to_json(const Caption& caption);
std::vector<Caption> read_captions(const std::filesystem::path& path);

struct IndicatedSpan {
  std::string inner;
  Span span;  // offsets into the cleaned text
};

struct BracketParse {
  std::string clean_text;
  std::vector<IndicatedSpan> spans;
};

// Removes "[x]" markup, keeping x. Throws kMalformedBrackets on nested,
// unclosed, stray or empty brackets.
BracketParse parse_brackets(std::string_view text);

struct ObjectMention {
  std::string surface;
  std::string canonical;
  bool indicated = false;
  // First occurrence in the cleaned caption text; absent for LLM-extracted
  // names that do not occur verbatim.
  std::optional<Span> span;
  // Sentence units in which the object occurs (always {0} when the whole
  // caption is the unit).
  std::vector<int> sentences{0};
};

json mention_to_json(const ObjectMention& mention);
ObjectMention mention_from_json(const json& record);

struct ExtractionOptions {
  // Split captions into sentence units on '.', '!' and '?'.
  bool per_sentence = false;
};

// Longest-match lexicon extraction over the bracket-cleaned caption.
// Mentions are de-duplicated by canonical form and listed in order of first
// occurrence. A canonical object is indicated only when every occurrence
// sits inside brackets. Matches that would straddle a bracket boundary are
// discarded.
std::vector<ObjectMention> extract_lexicon(const Caption& caption,
                                           const ObjectLexicon& lexicon,
                                           const ExtractionOptions& options = {});

// Asks the chat client for the object list, then re-attaches bracketed
// objects from the caption as indicated mentions.
std::vector<ObjectMention> extract_llm(const Caption& caption, ChatClient& client,
                                       const ObjectLexicon& lexicon,
                                       const ExtractionOptions& options = {});

// Number of sentence units of the cleaned caption under the given options.
int sentence_units(std::string_view clean_text, const ExtractionOptions& options);

// Bracket-cleaned text, or the raw text when markup is disabled or malformed.
std::string clean_caption_text(const Caption& caption);

json extraction_record(const Caption& caption,
                       const std::vector<ObjectMention>& mentions);

}  // namespace halle
