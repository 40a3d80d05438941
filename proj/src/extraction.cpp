#include "halle/extraction.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "halle/error.hpp"
#include "halle/llm_client.hpp"

namespace halle {

Caption caption_from_json(const json& record) {
  try {
    Caption caption;
    caption.id = record.at("id").is_string() ? record.at("id").get<std::string>()
                                             : record.at("id").dump();
    caption.image_id = record.at("image_id").is_string()
                           ? record.at("image_id").get<std::string>()
                           : record.at("image_id").dump();
    caption.text = record.at("text").get<std::string>();
    caption.indicated_markup = record.value("indicated_markup", true);
    if (trim(caption.text).empty()) {
      throw Error(ErrorCode::kInputParse, "caption '" + caption.id + "' has empty text");
    }
    return caption;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInputParse, std::string("bad caption record: ") + e.what());
  }
}

json caption_to_json(const Caption& caption) {
  json record = {{"id", caption.id}, {"image_id", caption.image_id}, {"text", caption.text}};
  if (!caption.indicated_markup) record["indicated_markup"] = false;
  return record;
}

std::vector<Caption> read_captions(const std::filesystem::path& path) {
  std::vector<Caption> captions;
  std::set<std::string> ids;
  for (const auto& record : read_jsonl_file(path)) {
    captions.push_back(caption_from_json(record));
    if (!ids.insert(captions.back().id).second) {
      throw Error(ErrorCode::kInputParse,
                  "duplicate caption id '" + captions.back().id + "' in " + path.string());
    }
  }
  return captions;
}

BracketParse parse_brackets(std::string_view text) {
  BracketParse out;
  out.clean_text.reserve(text.size());
  std::optional<std::size_t> open_at;
  std::size_t open_byte = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '[') {
      if (open_at) {
        throw Error(ErrorCode::kMalformedBrackets,
                    "nested '[' at byte " + std::to_string(i));
      }
      open_at = out.clean_text.size();
      open_byte = i;
    } else if (c == ']') {
      if (!open_at) {
        throw Error(ErrorCode::kMalformedBrackets,
                    "unmatched ']' at byte " + std::to_string(i));
      }
      Span span{*open_at, out.clean_text.size()};
      if (span.start == span.end) {
        throw Error(ErrorCode::kMalformedBrackets,
                    "empty brackets at byte " + std::to_string(open_byte));
      }
      out.spans.push_back({out.clean_text.substr(span.start, span.size()), span});
      open_at.reset();
    } else {
      out.clean_text.push_back(c);
    }
  }
  if (open_at) {
    throw Error(ErrorCode::kMalformedBrackets,
                "unclosed '[' at byte " + std::to_string(open_byte));
  }
  return out;
}

json mention_to_json(const ObjectMention& mention) {
  json record = {{"surface", mention.surface},
                 {"canonical", mention.canonical},
                 {"indicated", mention.indicated},
                 {"start", nullptr},
                 {"end", nullptr},
                 {"sentences", mention.sentences}};
  if (mention.span) {
    record["start"] = mention.span->start;
    record["end"] = mention.span->end;
  }
  return record;
}

ObjectMention mention_from_json(const json& record) {
  ObjectMention m;
  m.surface = record.value("surface", "");
  m.canonical = record.at("canonical").get<std::string>();
  m.indicated = record.value("indicated", false);
  if (record.contains("start") && !record["start"].is_null()) {
    m.span = Span{record["start"].get<std::size_t>(), record["end"].get<std::size_t>()};
  }
  if (record.contains("sentences")) {
    m.sentences = record["sentences"].get<std::vector<int>>();
  }
  return m;
}

int sentence_units(std::string_view clean_text, const ExtractionOptions& options) {
  return options.per_sentence ? count_sentences(clean_text) : 1;
}

std::string clean_caption_text(const Caption& caption) {
  if (!caption.indicated_markup) return caption.text;
  try {
    return parse_brackets(caption.text).clean_text;
  } catch (const Error&) {
    return caption.text;
  }
}

namespace {

constexpr int kOutside = -1;
constexpr int kStraddles = -2;

struct Occurrence {
  std::string canonical;
  Span span;
  int sentence;
  bool indicated;
};

// Bracket membership of each token: span index, kOutside, or kStraddles.
std::vector<int> bracket_ids(const std::vector<WordToken>& tokens,
                             const std::vector<IndicatedSpan>& spans) {
  std::vector<int> ids(tokens.size(), kOutside);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    for (std::size_t s = 0; s < spans.size(); ++s) {
      if (!tokens[t].span.overlaps(spans[s].span)) continue;
      ids[t] = spans[s].span.contains(tokens[t].span) ? static_cast<int>(s)
                                                      : kStraddles;
      break;
    }
  }
  return ids;
}

std::vector<ObjectMention> merge_occurrences(const std::vector<Occurrence>& occurrences,
                                             std::string_view clean_text) {
  std::vector<ObjectMention> mentions;
  std::map<std::string, std::size_t> index;
  for (const auto& occ : occurrences) {
    auto [it, inserted] = index.emplace(occ.canonical, mentions.size());
    if (inserted) {
      ObjectMention m;
      m.surface = std::string(clean_text.substr(occ.span.start, occ.span.size()));
      m.canonical = occ.canonical;
      m.indicated = occ.indicated;
      m.span = occ.span;
      m.sentences = {occ.sentence};
      mentions.push_back(std::move(m));
      continue;
    }
    ObjectMention& m = mentions[it->second];
    m.indicated = m.indicated && occ.indicated;
    if (std::find(m.sentences.begin(), m.sentences.end(), occ.sentence) ==
        m.sentences.end()) {
      m.sentences.push_back(occ.sentence);
    }
  }
  for (auto& m : mentions) std::sort(m.sentences.begin(), m.sentences.end());
  return mentions;
}

}  // namespace

std::vector<ObjectMention> extract_lexicon(const Caption& caption,
                                           const ObjectLexicon& lexicon,
                                           const ExtractionOptions& options) {
  BracketParse parsed;
  if (caption.indicated_markup) {
    parsed = parse_brackets(caption.text);
  } else {
    parsed.clean_text = caption.text;
  }
  const std::string folded = fold_case(parsed.clean_text);
  const auto tokens = tokenize_words(folded, true);
  const auto ids = bracket_ids(tokens, parsed.spans);
  const std::size_t max_words = lexicon.max_phrase_words();
  const Singularizer& singularizer = lexicon.canonicalizer.singularizer();

  std::vector<Occurrence> occurrences;
  std::size_t i = 0;
  while (i < tokens.size()) {
    bool consumed = false;
    std::size_t limit = std::min(max_words, tokens.size() - i);
    for (std::size_t len = limit; len >= 1 && !consumed; --len) {
      const std::size_t last = i + len - 1;
      bool coherent = true;
      for (std::size_t k = i; k <= last; ++k) {
        if (tokens[k].sentence != tokens[i].sentence || ids[k] != ids[i] ||
            ids[k] == kStraddles) {
          coherent = false;
          break;
        }
      }
      if (!coherent) continue;

      std::string prefix;
      for (std::size_t k = i; k < last; ++k) {
        prefix += tokens[k].text;
        prefix += ' ';
      }
      for (const auto& form : singularizer.candidates(tokens[last].text)) {
        std::string phrase = prefix + form;
        if (auto it = lexicon.object_terms.find(phrase);
            it != lexicon.object_terms.end()) {
          Span span{tokens[i].span.start, tokens[last].span.end};
          occurrences.push_back({it->second, span,
                                 options.per_sentence ? tokens[i].sentence : 0, ids[i] >= 0});
          consumed = true;
          break;
        }
        if (lexicon.is_stoplisted(phrase)) {
          consumed = true;
          break;
        }
      }
      if (consumed) i += len;
    }
    if (!consumed) ++i;
  }
  return merge_occurrences(occurrences, parsed.clean_text);
}

namespace {

// First word-aligned occurrence of a canonical name in the folded text,
// accepting plural forms of its last word.
std::optional<WordToken> locate(const std::vector<WordToken>& tokens,
                                const std::vector<int>& ids,
                                const std::string& canonical,
                                const Singularizer& singularizer,
                                std::size_t* length) {
  std::vector<std::string> words = split(canonical, ' ');
  if (words.empty() || tokens.size() < words.size()) return std::nullopt;
  for (std::size_t i = 0; i + words.size() <= tokens.size(); ++i) {
    bool ok = true;
    for (std::size_t k = 0; k < words.size() && ok; ++k) {
      ok = ids[i + k] == kOutside && tokens[i + k].sentence == tokens[i].sentence &&
           (k + 1 == words.size() || tokens[i + k].text == words[k]);
    }
    if (!ok) continue;
    const auto& last = tokens[i + words.size() - 1];
    auto forms = singularizer.candidates(last.text);
    if (std::find(forms.begin(), forms.end(), words.back()) != forms.end()) {
      *length = words.size();
      return tokens[i];
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<ObjectMention> extract_llm(const Caption& caption, ChatClient& client,
                                       const ObjectLexicon& lexicon,
                                       const ExtractionOptions& options) {
  BracketParse parsed;
  if (caption.indicated_markup) {
    parsed = parse_brackets(caption.text);
  } else {
    parsed.clean_text = caption.text;
  }
  // The prompt sees the caption with its markup, as in the worked examples.
  std::string raw = client.complete(make_extract_request(caption.text));
  std::vector<std::string> names = parse_list_literal(raw);

  const std::string folded = fold_case(parsed.clean_text);
  const auto tokens = tokenize_words(folded, true);
  const auto ids = bracket_ids(tokens, parsed.spans);
  const Canonicalizer& canon = lexicon.canonicalizer;
  std::set<std::string> bracketed;
  for (const auto& span : parsed.spans) bracketed.insert(canon.canonicalize(span.inner));

  std::vector<Occurrence> occurrences;
  std::vector<ObjectMention> unlocated;
  auto add_name = [&](const std::string& name, bool indicated,
                      std::optional<Span> known_span) {
    std::string canonical = canon.canonicalize(name);
    if (canonical.empty() || canonical.find_first_of("[]") != std::string::npos) {
      return;
    }
    if (known_span) {
      int sentence = 0;
      for (const auto& t : tokens) {
        if (t.span.overlaps(*known_span)) {
          sentence = t.sentence;
          break;
        }
      }
      occurrences.push_back(
          {canonical, *known_span, options.per_sentence ? sentence : 0, indicated});
      return;
    }
    std::size_t length = 0;
    if (auto first = locate(tokens, ids, canonical, canon.singularizer(), &length)) {
      auto it = std::find_if(tokens.begin(), tokens.end(), [&](const WordToken& t) {
        return t.span == first->span;
      });
      const auto& last = *(it + static_cast<long>(length) - 1);
      occurrences.push_back({canonical, Span{first->span.start, last.span.end},
                             options.per_sentence ? first->sentence : 0, false});
      return;
    }
    if (bracketed.contains(canonical)) return;
    ObjectMention m;
    m.surface = name;
    m.canonical = canonical;
    unlocated.push_back(std::move(m));
  };

  for (const auto& name : names) add_name(name, false, std::nullopt);
  for (const auto& span : parsed.spans) add_name(span.inner, true, span.span);

  // Occurrence order: model-listed objects first, bracketed objects after, so
  // a plain listing of an object wins over its bracketed mention.
  std::vector<ObjectMention> mentions = merge_occurrences(occurrences, parsed.clean_text);
  std::stable_sort(mentions.begin(), mentions.end(),
                   [](const ObjectMention& a, const ObjectMention& b) {
                     return a.span->start < b.span->start;
                   });
  for (auto& m : unlocated) {
    bool seen = std::any_of(mentions.begin(), mentions.end(), [&](const ObjectMention& x) {
      return x.canonical == m.canonical;
    });
    if (!seen) mentions.push_back(std::move(m));
  }
  return mentions;
}

json extraction_record(const Caption& caption,
                       const std::vector<ObjectMention>& mentions) {
  json list = json::array();
  for (const auto& m : mentions) list.push_back(mention_to_json(m));
  return {{"caption_id", caption.id}, {"mentions", list}};
}

}  // namespace halle
