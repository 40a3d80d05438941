#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace halle {

// Plural-to-singular rewriting by ordered suffix rules, an irregular-form map
// and a list of words that are never rewritten.
class Singularizer {
 public:
  struct Rule {
    std::string suffix;
    std::string replacement;
    std::size_t min_stem = 1;
    // Word endings that block the rule, e.g. "ss" blocks "s" -> "".
    std::vector<std::string> blocked_endings;
  };

  static Singularizer defaults();

  // Rules file syntax, one directive per line:
  //   rule <suffix> -> <replacement> [min_stem=N] [unless=a,b]
  //   irregular <plural> -> <singular>
  //   invariant <word> [<word> ...]
  static Singularizer parse(const std::vector<std::string>& lines);

  // The single preferred singular form.
  std::string singularize(std::string_view word) const;

  // The word itself followed by every rule rewrite, in rule order, without
  // duplicates. Used when a dictionary can pick the right reading.
  std::vector<std::string> candidates(std::string_view word) const;

  const std::vector<Rule>& rules() const { return rules_; }

 private:
  std::optional<std::string> apply(const Rule& rule,
                                   std::string_view word) const;

  std::vector<Rule> rules_;
  std::map<std::string, std::string, std::less<>> irregular_;
  std::set<std::string, std::less<>> invariant_;
};

// Turns free-form object names ("Two Cars") into canonical form ("car"):
// case folded, leading quantifiers removed, last word singularized.
class Canonicalizer {
 public:
  Canonicalizer();
  Canonicalizer(Singularizer singularizer, std::set<std::string> quantifiers);

  static std::set<std::string> default_quantifiers();

  std::string canonicalize(std::string_view name) const;
  bool is_quantifier(std::string_view word) const;

  const Singularizer& singularizer() const { return singularizer_; }
  const std::set<std::string>& quantifiers() const { return quantifiers_; }

 private:
  Singularizer singularizer_;
  std::set<std::string> quantifiers_;
};

struct ObjectLexicon {
  // Surface phrase (lowercase, single spaces) -> canonical object name. Most
  // entries map to themselves; alias lines ("bottle of water => water") map
  // a phrase onto another canonical name.
  std::map<std::string, std::string, std::less<>> object_terms;
  std::set<std::string, std::less<>> place_stoplist;
  std::set<std::string, std::less<>> position_stoplist;
  Canonicalizer canonicalizer;

  // Loads objects.txt, places.txt, positions.txt and, when present,
  // singularize.txt and quantifiers.txt from a directory.
  static ObjectLexicon load_dir(const std::filesystem::path& dir);

  static ObjectLexicon from_terms(const std::vector<std::string>& terms,
                                  const std::vector<std::string>& places = {},
                                  const std::vector<std::string>& positions = {});

  void add_term(std::string_view line);

  // Throws kInvalidConfig when a stoplist shares a term with object_terms or
  // an entry is not lowercase and trimmed.
  void validate() const;

  bool is_stoplisted(std::string_view phrase) const;
  std::size_t max_phrase_words() const;
};

}  // namespace halle
