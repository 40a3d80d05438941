#include "halle/lexicon.hpp"

#include <algorithm>
#include <sstream>

#include "halle/error.hpp"
#include "halle/io.hpp"
#include "halle/text.hpp"

namespace halle {
namespace {

constexpr std::string_view kDefaultSingularRules = R"(# Ordered suffix rules; the first applicable rule gives the preferred form.
rule ies -> y min_stem=2
rule sses -> ss
rule shes -> sh
rule ches -> ch
rule xes -> x
rule zzes -> zz
rule uses -> us min_stem=2
rule s -> unless=ss,us,is,ous
irregular people -> person
irregular men -> man
irregular women -> woman
irregular children -> child
irregular feet -> foot
irregular teeth -> tooth
irregular mice -> mouse
irregular geese -> goose
irregular knives -> knife
irregular wives -> wife
irregular lives -> life
irregular leaves -> leaf
irregular shelves -> shelf
irregular loaves -> loaf
irregular halves -> half
irregular wolves -> wolf
irregular scarves -> scarf
irregular calves -> calf
irregular hooves -> hoof
irregular thieves -> thief
irregular houses -> house
irregular horses -> horse
irregular vases -> vase
irregular cases -> case
irregular bases -> base
irregular shoes -> shoe
irregular toes -> toe
irregular potatoes -> potato
irregular tomatoes -> tomato
irregular cookies -> cookie
irregular ties -> tie
irregular pies -> pie
irregular movies -> movie
irregular brownies -> brownie
irregular blouses -> blouse
irregular oxen -> ox
irregular cacti -> cactus
invariant bus glass grass gas class dress cross compass lens series species
invariant news pants jeans shorts scissors glasses clothes sheep fish deer
invariant tennis is was this his its us as
)";

std::string normalize_phrase(std::string_view phrase) {
  std::vector<std::string> words;
  const std::string folded = fold_case(phrase);
  for (const auto& token : tokenize_words(folded)) {
    words.emplace_back(token.text);
  }
  return join(words, " ");
}

}  // namespace

Singularizer Singularizer::defaults() {
  std::vector<std::string> lines;
  for (const auto& line : split(kDefaultSingularRules, '\n')) {
    auto body = trim(line);
    if (!body.empty() && body.front() != '#') lines.emplace_back(body);
  }
  return parse(lines);
}

Singularizer Singularizer::parse(const std::vector<std::string>& lines) {
  Singularizer s;
  for (const auto& line : lines) {
    std::istringstream in(line);
    std::string directive;
    in >> directive;
    if (directive == "rule") {
      Rule rule;
      std::string arrow;
      in >> rule.suffix >> arrow;
      if (arrow != "->") {
        throw Error(ErrorCode::kInvalidConfig, "bad singularization rule: " + line);
      }
      std::string word;
      while (in >> word) {
        if (word.rfind("min_stem=", 0) == 0) {
          rule.min_stem = std::stoul(word.substr(9));
        } else if (word.rfind("unless=", 0) == 0) {
          rule.blocked_endings = split(word.substr(7), ',');
        } else {
          rule.replacement = word;
        }
      }
      s.rules_.push_back(std::move(rule));
    } else if (directive == "irregular") {
      std::string plural, arrow, singular;
      in >> plural >> arrow >> singular;
      if (arrow != "->" || singular.empty()) {
        throw Error(ErrorCode::kInvalidConfig, "bad irregular entry: " + line);
      }
      s.irregular_.emplace(plural, singular);
    } else if (directive == "invariant") {
      std::string word;
      while (in >> word) s.invariant_.insert(word);
    } else {
      throw Error(ErrorCode::kInvalidConfig, "unknown directive: " + line);
    }
  }
  return s;
}

std::optional<std::string> Singularizer::apply(const Rule& rule,
                                               std::string_view word) const {
  if (word.size() < rule.suffix.size() + rule.min_stem) return std::nullopt;
  if (!word.ends_with(rule.suffix)) return std::nullopt;
  for (const auto& ending : rule.blocked_endings) {
    if (word.ends_with(ending)) return std::nullopt;
  }
  std::string out(word.substr(0, word.size() - rule.suffix.size()));
  out += rule.replacement;
  return out;
}

std::string Singularizer::singularize(std::string_view word) const {
  if (auto it = irregular_.find(word); it != irregular_.end()) return it->second;
  if (invariant_.contains(word)) return std::string(word);
  for (const auto& rule : rules_) {
    if (auto out = apply(rule, word)) return *out;
  }
  return std::string(word);
}

std::vector<std::string> Singularizer::candidates(std::string_view word) const {
  std::vector<std::string> out{std::string(word)};
  auto push = [&out](std::string s) {
    if (std::find(out.begin(), out.end(), s) == out.end()) {
      out.push_back(std::move(s));
    }
  };
  if (auto it = irregular_.find(word); it != irregular_.end()) {
    push(it->second);
  }
  if (invariant_.contains(word)) return out;
  for (const auto& rule : rules_) {
    if (auto s = apply(rule, word)) push(*s);
  }
  return out;
}

Canonicalizer::Canonicalizer()
    : Canonicalizer(Singularizer::defaults(), default_quantifiers()) {}

Canonicalizer::Canonicalizer(Singularizer singularizer,
                             std::set<std::string> quantifiers)
    : singularizer_(std::move(singularizer)),
      quantifiers_(std::move(quantifiers)) {}

std::set<std::string> Canonicalizer::default_quantifiers() {
  return {"a",     "an",      "the",      "one",   "two",  "three",
          "four",  "five",    "six",      "seven", "eight", "nine",
          "ten",   "several", "multiple", "few",   "many"};
}

bool Canonicalizer::is_quantifier(std::string_view word) const {
  if (!word.empty() && std::all_of(word.begin(), word.end(), [](char c) {
        return c >= '0' && c <= '9';
      })) {
    return true;
  }
  return quantifiers_.contains(std::string(word));
}

std::string Canonicalizer::canonicalize(std::string_view name) const {
  std::string folded = fold_case(name);
  std::vector<std::string> words;
  for (const auto& token : tokenize_words(folded)) {
    words.emplace_back(token.text);
  }
  std::size_t first = 0;
  while (first + 1 < words.size() && is_quantifier(words[first])) ++first;
  words.erase(words.begin(), words.begin() + static_cast<long>(first));
  if (words.empty()) return {};
  words.back() = singularizer_.singularize(words.back());
  return join(words, " ");
}

void ObjectLexicon::add_term(std::string_view line) {
  auto arrow = line.find("=>");
  if (arrow == std::string_view::npos) {
    std::string phrase = normalize_phrase(line);
    if (!phrase.empty()) object_terms[phrase] = phrase;
    return;
  }
  std::string phrase = normalize_phrase(line.substr(0, arrow));
  std::string canonical = normalize_phrase(line.substr(arrow + 2));
  if (phrase.empty() || canonical.empty()) {
    throw Error(ErrorCode::kInvalidConfig,
                "bad alias line: " + std::string(line));
  }
  object_terms[phrase] = canonical;
}

ObjectLexicon ObjectLexicon::from_terms(const std::vector<std::string>& terms,
                                        const std::vector<std::string>& places,
                                        const std::vector<std::string>& positions) {
  ObjectLexicon lexicon;
  for (const auto& term : terms) lexicon.add_term(term);
  for (const auto& p : places) lexicon.place_stoplist.insert(normalize_phrase(p));
  for (const auto& p : positions) {
    lexicon.position_stoplist.insert(normalize_phrase(p));
  }
  lexicon.validate();
  return lexicon;
}

ObjectLexicon ObjectLexicon::load_dir(const std::filesystem::path& dir) {
  ObjectLexicon lexicon;
  for (const auto& line : read_lines(dir / "objects.txt")) lexicon.add_term(line);
  for (const auto& line : read_lines(dir / "places.txt")) {
    lexicon.place_stoplist.insert(normalize_phrase(line));
  }
  for (const auto& line : read_lines(dir / "positions.txt")) {
    lexicon.position_stoplist.insert(normalize_phrase(line));
  }
  Singularizer singularizer = Singularizer::defaults();
  if (std::filesystem::exists(dir / "singularize.txt")) {
    singularizer = Singularizer::parse(read_lines(dir / "singularize.txt"));
  }
  std::set<std::string> quantifiers = Canonicalizer::default_quantifiers();
  if (std::filesystem::exists(dir / "quantifiers.txt")) {
    quantifiers.clear();
    for (const auto& line : read_lines(dir / "quantifiers.txt")) {
      quantifiers.insert(normalize_phrase(line));
    }
  }
  lexicon.canonicalizer = Canonicalizer(std::move(singularizer), std::move(quantifiers));
  lexicon.validate();
  return lexicon;
}

void ObjectLexicon::validate() const {
  auto check_form = [](const std::string& term) {
    if (term.empty() || term != normalize_phrase(term)) {
      throw Error(ErrorCode::kInvalidConfig,
                  "lexicon entry is not lowercase and trimmed: '" + term + "'");
    }
  };
  for (const auto& [phrase, canonical] : object_terms) {
    check_form(phrase);
    check_form(canonical);
    if (place_stoplist.contains(phrase) || position_stoplist.contains(phrase) ||
        place_stoplist.contains(canonical) ||
        position_stoplist.contains(canonical)) {
      throw Error(ErrorCode::kInvalidConfig,
                  "object term is also stoplisted: '" + phrase + "'");
    }
  }
  for (const auto& p : place_stoplist) check_form(p);
  for (const auto& p : position_stoplist) check_form(p);
}

bool ObjectLexicon::is_stoplisted(std::string_view phrase) const {
  return place_stoplist.contains(phrase) || position_stoplist.contains(phrase);
}

std::size_t ObjectLexicon::max_phrase_words() const {
  std::size_t longest = 1;
  auto words = [](const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), ' ')) + 1;
  };
  for (const auto& [phrase, canonical] : object_terms) {
    longest = std::max(longest, words(phrase));
  }
  for (const auto& p : place_stoplist) longest = std::max(longest, words(p));
  for (const auto& p : position_stoplist) longest = std::max(longest, words(p));
  return longest;
}

}  // namespace halle
