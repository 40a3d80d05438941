#include "halle/matching.hpp"

#include <algorithm>

#include "halle/error.hpp"
#include "halle/llm_client.hpp"
#include "halle/text.hpp"

namespace halle {
namespace {

std::string normalize(std::string_view term) {
  std::vector<std::string> words;
  const std::string folded = fold_case(term);
  for (const auto& t : tokenize_words(folded)) words.emplace_back(t.text);
  return join(words, " ");
}

void push_unique(std::vector<std::string>& list, std::string item) {
  if (std::find(list.begin(), list.end(), item) == list.end()) {
    list.push_back(std::move(item));
  }
}

}  // namespace

std::map<std::string, GroundTruthSet> ground_truth_from_json(
    const json& document, const Canonicalizer& canonicalizer) {
  if (!document.is_object()) {
    throw Error(ErrorCode::kInputParse, "ground truth must be a JSON object");
  }
  std::map<std::string, GroundTruthSet> out;
  for (const auto& [image_id, entry] : document.items()) {
    GroundTruthSet gt;
    gt.image_id = image_id;
    try {
      for (const auto& name : entry.at("objects")) {
        std::string canonical = canonicalizer.canonicalize(name.get<std::string>());
        if (!canonical.empty()) push_unique(gt.objects, canonical);
      }
      if (entry.contains("counts")) {
        for (const auto& [name, n] : entry["counts"].items()) {
          int count = n.get<int>();
          if (count <= 0) {
            throw Error(ErrorCode::kInputParse,
                        "non-positive count for '" + name + "' in " + image_id);
          }
          gt.counts[canonicalizer.canonicalize(name)] += count;
        }
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInputParse,
                  "bad ground truth entry '" + image_id + "': " + e.what());
    }
    out.emplace(image_id, std::move(gt));
  }
  return out;
}

std::map<std::string, GroundTruthSet> read_ground_truth(
    const std::filesystem::path& path, const Canonicalizer& canonicalizer) {
  return ground_truth_from_json(read_json_file(path), canonicalizer);
}

SynonymTable SynonymTable::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

SynonymTable SynonymTable::parse(std::string_view content) {
  SynonymTable table;
  std::string section;
  std::size_t line_no = 0;
  for (const auto& raw : split(content, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::kInvalidConfig,
                  "synonym table line " + std::to_string(line_no) + ": " + why);
    };
    if (line.front() == '[' && line.back() == ']') {
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    auto items = [](std::string_view list) {
      std::vector<std::string> out;
      for (const auto& part : split(list, ',')) {
        std::string term = normalize(part);
        if (!term.empty()) out.push_back(term);
      }
      return out;
    };
    if (section == "options") {
      auto eq = line.find('=');
      if (eq == std::string_view::npos) fail("expected key = value");
      auto key = trim(line.substr(0, eq));
      auto value = trim(line.substr(eq + 1));
      if (key != "head_noun_rule") fail("unknown option");
      table.set_head_noun_rule(value == "true");
    } else if (section == "equivalence") {
      table.add_group(items(line));
    } else if (section == "negative") {
      auto bar = line.find('|');
      if (bar == std::string_view::npos) fail("expected 'a | b'");
      table.add_negative(normalize(line.substr(0, bar)), normalize(line.substr(bar + 1)));
    } else if (section == "meronym") {
      auto colon = line.find(':');
      if (colon == std::string_view::npos) fail("expected 'whole: parts'");
      table.add_meronym(normalize(line.substr(0, colon)), items(line.substr(colon + 1)));
    } else if (section == "transparent") {
      for (auto& t : items(line)) table.add_transparent(t);
    } else if (section == "head_stop") {
      for (auto& t : items(line)) table.add_head_stop(t);
    } else {
      fail("entry outside a known section");
    }
  }
  return table;
}

void SynonymTable::add_group(const std::vector<std::string>& terms) {
  std::set<std::string> group(terms.begin(), terms.end());
  for (const auto& t : group) {
    if (group_of_.contains(t)) {
      throw Error(ErrorCode::kInvalidConfig,
                  "term '" + t + "' appears in two equivalence groups");
    }
  }
  for (const auto& t : group) group_of_[t] = groups_.size();
  groups_.push_back(std::move(group));
}

void SynonymTable::add_negative(const std::string& a, const std::string& b) {
  negatives_.insert(std::minmax(a, b));
}

void SynonymTable::add_meronym(const std::string& whole,
                               const std::vector<std::string>& parts) {
  if (parts.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "meronym '" + whole + "' has no parts");
  }
  meronyms_[whole] = parts;
}

bool SynonymTable::equivalent(const std::string& a, const std::string& b) const {
  if (a == b) return true;
  auto ia = group_of_.find(a);
  auto ib = group_of_.find(b);
  return ia != group_of_.end() && ib != group_of_.end() && ia->second == ib->second;
}

bool SynonymTable::negative(const std::string& a, const std::string& b) const {
  return negatives_.contains(std::minmax(a, b));
}

std::string SynonymTable::head(const std::string& term) const {
  std::string phrase = term;
  // "view of office building" -> "office building" when "view" is transparent;
  // otherwise "reflection of light" -> "reflection".
  if (auto of = phrase.find(" of "); of != std::string::npos) {
    std::string left = phrase.substr(0, of);
    std::string right = phrase.substr(of + 4);
    auto left_words = split(left, ' ');
    phrase = transparent_.contains(left_words.back()) ? right : left;
  }
  auto words = split(phrase, ' ');
  while (words.size() > 1 && head_stop_.contains(words.back())) words.pop_back();
  return words.back();
}

bool SynonymTable::terms_match(const std::string& a, const std::string& b) const {
  if (a == b) return true;
  if (negative(a, b)) return false;
  if (equivalent(a, b)) return true;
  if (!head_noun_rule_) return false;
  const std::string ha = head(a);
  const std::string hb = head(b);
  return equivalent(ha, b) || equivalent(a, hb) || equivalent(ha, hb);
}

bool SynonymTable::matches_any(const std::string& term,
                               const std::vector<std::string>& others) const {
  for (const auto& other : others) {
    if (terms_match(term, other)) return true;
  }
  auto it = meronyms_.find(term);
  if (it == meronyms_.end()) return false;
  return std::all_of(it->second.begin(), it->second.end(), [&](const std::string& part) {
    return std::any_of(others.begin(), others.end(), [&](const std::string& other) {
      return terms_match(part, other);
    });
  });
}

std::vector<std::string> match_hallucination(const GroundTruthSet& gt,
                                             const std::vector<std::string>& mentions,
                                             const SynonymTable& table) {
  std::vector<std::string> out;
  for (const auto& m : mentions) {
    if (!table.matches_any(m, gt.objects)) push_unique(out, m);
  }
  return out;
}

std::vector<std::string> match_coverage(const std::vector<std::string>& mentions,
                                        const GroundTruthSet& gt,
                                        const SynonymTable& table) {
  std::vector<std::string> out;
  for (const auto& g : gt.objects) {
    if (!table.matches_any(g, mentions)) push_unique(out, g);
  }
  return out;
}

std::vector<std::string> match_llm(const GroundTruthSet& gt,
                                   const std::vector<std::string>& mentions,
                                   MatchDirection direction, ChatClient& client,
                                   const Canonicalizer& canonicalizer) {
  const auto& universe = direction == MatchDirection::kHallucination ? mentions : gt.objects;
  if (direction == MatchDirection::kHallucination && mentions.empty()) return {};
  if (direction == MatchDirection::kCoverage && mentions.empty()) return gt.objects;
  std::string raw = client.complete(make_match_request(direction, gt.objects, mentions));
  std::set<std::string> answered;
  for (const auto& item : parse_list_literal(raw)) {
    answered.insert(canonicalizer.canonicalize(item));
  }
  std::vector<std::string> out;
  for (const auto& item : universe) {
    if (answered.contains(item)) push_unique(out, item);
  }
  return out;
}

std::vector<std::string> MatchReport::hallucinated() const {
  std::vector<std::string> out;
  for (const auto& m : mentions) {
    if (m.hallucinated) out.push_back(m.canonical);
  }
  return out;
}

std::vector<std::string> MatchReport::matched() const {
  std::vector<std::string> out;
  for (const auto& m : mentions) {
    if (!m.hallucinated) out.push_back(m.canonical);
  }
  return out;
}

MatchReport build_report(const std::string& caption_id, const GroundTruthSet& gt,
                         const std::vector<ObjectMention>& mentions,
                         const std::vector<std::string>& hallucinated,
                         const std::vector<std::string>& uncovered,
                         int sentence_units) {
  MatchReport report;
  report.caption_id = caption_id;
  report.image_id = gt.image_id;
  report.sentence_units = std::max(1, sentence_units);
  std::set<std::string> bad(hallucinated.begin(), hallucinated.end());
  for (const auto& m : mentions) {
    report.mentions.push_back({m.canonical, m.indicated, bad.contains(m.canonical),
                               m.sentences});
  }
  std::set<std::string> missing(uncovered.begin(), uncovered.end());
  for (const auto& g : gt.objects) {
    (missing.contains(g) ? report.uncovered_gt : report.covered_gt).push_back(g);
  }
  check_report(report, gt);
  return report;
}

void check_report(const MatchReport& report, const GroundTruthSet& gt) {
  std::set<std::string> seen;
  for (const auto& m : report.mentions) {
    if (!seen.insert(m.canonical).second) {
      throw Error(ErrorCode::kInternal,
                  "duplicate mention '" + m.canonical + "' in " + report.caption_id);
    }
    for (int s : m.sentences) {
      if (s < 0 || s >= report.sentence_units) {
        throw Error(ErrorCode::kInternal, "mention sentence out of range in " +
                                              report.caption_id);
      }
    }
  }
  std::multiset<std::string> gt_parts(report.covered_gt.begin(), report.covered_gt.end());
  gt_parts.insert(report.uncovered_gt.begin(), report.uncovered_gt.end());
  std::multiset<std::string> gt_all(gt.objects.begin(), gt.objects.end());
  if (gt_parts != gt_all) {
    throw Error(ErrorCode::kInternal,
                "covered/uncovered do not partition ground truth for " +
                    report.caption_id);
  }
}

json report_to_json(const MatchReport& report) {
  json mentions = json::array();
  for (const auto& m : report.mentions) {
    mentions.push_back({{"canonical", m.canonical},
                        {"indicated", m.indicated},
                        {"hallucinated", m.hallucinated},
                        {"sentences", m.sentences}});
  }
  return {{"caption_id", report.caption_id},
          {"image_id", report.image_id},
          {"sentence_units", report.sentence_units},
          {"mentions", mentions},
          {"hallucinated", report.hallucinated()},
          {"matched", report.matched()},
          {"covered_gt", report.covered_gt},
          {"uncovered_gt", report.uncovered_gt}};
}

MatchReport report_from_json(const json& record) {
  try {
    MatchReport report;
    report.caption_id = record.at("caption_id").get<std::string>();
    report.image_id = record.value("image_id", "");
    report.sentence_units = record.value("sentence_units", 1);
    for (const auto& m : record.at("mentions")) {
      report.mentions.push_back({m.at("canonical").get<std::string>(),
                                 m.value("indicated", false),
                                 m.value("hallucinated", false),
                                 m.value("sentences", std::vector<int>{0})});
    }
    report.covered_gt = record.at("covered_gt").get<std::vector<std::string>>();
    report.uncovered_gt = record.at("uncovered_gt").get<std::vector<std::string>>();
    return report;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInputParse, std::string("bad match report: ") + e.what());
  }
}

}  // namespace halle
