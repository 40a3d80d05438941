#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "halle/extraction.hpp"
#include "halle/io.hpp"
#include "halle/lexicon.hpp"
#include "halle/llm_client.hpp"

namespace halle {

struct GroundTruthSet {
  std::string image_id;
  std::vector<std::string> objects;  // canonical names, first-seen order
  std::map<std::string, int> counts;
};

// Ground truth file: {image_id: {"objects": [...], "counts": {...}}}.
// Names are canonicalized and de-duplicated on load.
std::map<std::string, GroundTruthSet> read_ground_truth(
    const std::filesystem::path& path, const Canonicalizer& canonicalizer);
std::map<std::string, GroundTruthSet> ground_truth_from_json(
    const json& document, const Canonicalizer& canonicalizer);

// Configurable matching knowledge. File format (INI-like):
//   [options]      head_noun_rule = true|false
//   [equivalence]  one comma-separated group per line
//   [negative]     "a | b" pairs that never match
//   [meronym]      "whole: part, part, ..."
//   [transparent]  nouns whose "X of Y" phrases take Y's head
//   [head_stop]    trailing words skipped when finding the head noun
class SynonymTable {
 public:
  static SynonymTable load(const std::filesystem::path& path);
  static SynonymTable parse(std::string_view content);

  void add_group(const std::vector<std::string>& terms);
  void add_negative(const std::string& a, const std::string& b);
  void add_meronym(const std::string& whole, const std::vector<std::string>& parts);
  void add_transparent(const std::string& noun) { transparent_.insert(noun); }
  void add_head_stop(const std::string& word) { head_stop_.insert(word); }
  void set_head_noun_rule(bool on) { head_noun_rule_ = on; }

  bool equivalent(const std::string& a, const std::string& b) const;
  bool negative(const std::string& a, const std::string& b) const;
  std::string head(const std::string& term) const;

  // Pairwise match: equal, equivalent, or related by head noun; negative
  // pairs override everything but equality.
  bool terms_match(const std::string& a, const std::string& b) const;

  // True when `term` matches some element of `others`, either pairwise or as
  // a configured whole whose parts all match elements of `others`.
  bool matches_any(const std::string& term, const std::vector<std::string>& others) const;

  const std::map<std::string, std::vector<std::string>>& meronyms() const {
    return meronyms_;
  }
  bool head_noun_rule() const { return head_noun_rule_; }

 private:
  std::vector<std::set<std::string>> groups_;
  std::map<std::string, std::size_t> group_of_;
  std::set<std::pair<std::string, std::string>> negatives_;
  std::map<std::string, std::vector<std::string>> meronyms_;
  std::set<std::string> transparent_;
  std::set<std::string> head_stop_;
  bool head_noun_rule_ = true;
};

// Mentions with no counterpart in the ground truth, in mention order.
std::vector<std::string> match_hallucination(const GroundTruthSet& gt,
                                             const std::vector<std::string>& mentions,
                                             const SynonymTable& table);

// Ground-truth objects no mention accounts for, in ground-truth order.
std::vector<std::string> match_coverage(const std::vector<std::string>& mentions,
                                        const GroundTruthSet& gt,
                                        const SynonymTable& table);

// LLM-judged variant. The answer is canonicalized and restricted to the
// legal universe: mentions for hallucination, ground truth for coverage.
std::vector<std::string> match_llm(const GroundTruthSet& gt,
                                   const std::vector<std::string>& mentions,
                                   MatchDirection direction, ChatClient& client,
                                   const Canonicalizer& canonicalizer);

struct MentionVerdict {
  std::string canonical;
  bool indicated = false;
  bool hallucinated = false;
  std::vector<int> sentences{0};
};

struct MatchReport {
  std::string caption_id;
  std::string image_id;
  int sentence_units = 1;
  std::vector<MentionVerdict> mentions;
  std::vector<std::string> covered_gt;
  std::vector<std::string> uncovered_gt;

  std::vector<std::string> hallucinated() const;
  std::vector<std::string> matched() const;
};

// Combines extraction output with the two matcher results. Throws kInternal
// if the partition invariants do not hold.
MatchReport build_report(const std::string& caption_id, const GroundTruthSet& gt,
                         const std::vector<ObjectMention>& mentions,
                         const std::vector<std::string>& hallucinated,
                         const std::vector<std::string>& uncovered,
                         int sentence_units = 1);

void check_report(const MatchReport& report, const GroundTruthSet& gt);

json report_to_json(const MatchReport& report);
MatchReport report_from_json(const json& record);

}  // namespace halle
