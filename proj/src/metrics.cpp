#include "halle/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "halle/error.hpp"

namespace halle {

std::string_view mode_name(EvalMode mode) {
  switch (mode) {
    case EvalMode::kStandard: return "standard";
    case EvalMode::kOnlyIndicated: return "only-ind";
    case EvalMode::kExcludeIndicated: return "exclude-ind";
    case EvalMode::kIncludeIndicated: return "include-ind";
  }
  return "standard";
}

EvalMode mode_from_name(std::string_view name) {
  for (auto mode : {EvalMode::kStandard, EvalMode::kOnlyIndicated,
                    EvalMode::kExcludeIndicated, EvalMode::kIncludeIndicated}) {
    if (mode_name(mode) == name) return mode;
  }
  throw Error(ErrorCode::kUsage, "unknown evaluation mode '" + std::string(name) + "'");
}

double Ratio::value() const {
  if (denominator == 0) {
    throw Error(ErrorCode::kEmptyDenominator, "metric has an empty denominator");
  }
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

double Ratio::percent() const {
  if (denominator == 0) {
    throw Error(ErrorCode::kEmptyDenominator, "metric has an empty denominator");
  }
  return 100.0 * static_cast<double>(numerator) / static_cast<double>(denominator);
}

namespace {

// Mentions that count toward the CHAIR_i numerator under the mode.
bool counts_in_numerator(const MentionVerdict& m, EvalMode mode) {
  switch (mode) {
    case EvalMode::kStandard: return m.hallucinated;
    case EvalMode::kOnlyIndicated: return m.hallucinated && m.indicated;
    case EvalMode::kExcludeIndicated:
    case EvalMode::kIncludeIndicated: return m.hallucinated && !m.indicated;
  }
  return false;
}

// Mentions that count toward the CHAIR_i denominator and Avg. Object.
bool applicable(const MentionVerdict& m, EvalMode mode) {
  switch (mode) {
    case EvalMode::kStandard:
    case EvalMode::kIncludeIndicated: return true;
    case EvalMode::kOnlyIndicated: return m.indicated;
    case EvalMode::kExcludeIndicated: return !m.indicated;
  }
  return false;
}

bool has_indicated(const MatchReport& report) {
  return std::any_of(report.mentions.begin(), report.mentions.end(),
                     [](const MentionVerdict& m) { return m.indicated; });
}

}  // namespace

bool caption_eligible(const MatchReport& report, EvalMode mode,
                      const MetricOptions& options) {
  if (mode != EvalMode::kOnlyIndicated || options.only_indicated_all_units) {
    return true;
  }
  return has_indicated(report);
}

Ratio chair_i_ratio(std::span<const MatchReport> reports, EvalMode mode,
                    const MetricOptions& options) {
  Ratio r;
  for (const auto& report : reports) {
    if (!caption_eligible(report, mode, options)) continue;
    for (const auto& m : report.mentions) {
      if (counts_in_numerator(m, mode)) ++r.numerator;
      if (applicable(m, mode)) ++r.denominator;
    }
  }
  return r;
}

Ratio chair_s_ratio(std::span<const MatchReport> reports, EvalMode mode,
                    const MetricOptions& options) {
  Ratio r;
  for (const auto& report : reports) {
    if (!caption_eligible(report, mode, options)) continue;
    const int units = std::max(1, report.sentence_units);
    std::vector<bool> bad(static_cast<std::size_t>(units), false);
    std::vector<bool> indicated(static_cast<std::size_t>(units), false);
    for (const auto& m : report.mentions) {
      for (int s : m.sentences) {
        auto u = static_cast<std::size_t>(std::clamp(s, 0, units - 1));
        if (counts_in_numerator(m, mode)) bad[u] = true;
        if (m.indicated) indicated[u] = true;
      }
    }
    for (std::size_t u = 0; u < bad.size(); ++u) {
      // With sentence units, only-indicated mode also restricts the
      // denominator to sentences that carry an indicated object.
      if (mode == EvalMode::kOnlyIndicated && !options.only_indicated_all_units &&
          !indicated[u]) {
        continue;
      }
      ++r.denominator;
      if (bad[u]) ++r.numerator;
    }
  }
  return r;
}

Ratio coverage_ratio(std::span<const MatchReport> reports) {
  Ratio r;
  for (const auto& report : reports) {
    r.numerator += static_cast<std::int64_t>(report.covered_gt.size());
    r.denominator += static_cast<std::int64_t>(report.covered_gt.size() +
                                               report.uncovered_gt.size());
  }
  return r;
}

double chair_i(std::span<const MatchReport> reports, EvalMode mode,
               const MetricOptions& options) {
  return chair_i_ratio(reports, mode, options).percent();
}

double chair_s(std::span<const MatchReport> reports, EvalMode mode,
               const MetricOptions& options) {
  return chair_s_ratio(reports, mode, options).percent();
}

double coverage(std::span<const MatchReport> reports) {
  return coverage_ratio(reports).percent();
}

Averages averages(std::span<const Caption> captions,
                  std::span<const MatchReport> reports, EvalMode mode,
                  const MetricOptions& options) {
  std::map<std::string, const Caption*> by_id;
  for (const auto& c : captions) by_id[c.id] = &c;
  Averages out;
  for (const auto& report : reports) {
    if (!caption_eligible(report, mode, options)) continue;
    auto it = by_id.find(report.caption_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kInputParse,
                  "no caption for report '" + report.caption_id + "'");
    }
    out.words.numerator += static_cast<std::int64_t>(
        count_whitespace_words(clean_caption_text(*it->second)));
    ++out.words.denominator;
    for (const auto& m : report.mentions) {
      if (applicable(m, mode)) ++out.objects.numerator;
    }
    ++out.objects.denominator;
  }
  out.avg_objects = out.objects.value();
  if (mode != EvalMode::kOnlyIndicated) out.avg_length = out.words.value();
  return out;
}

EvalSummary summarize(std::span<const Caption> captions,
                      std::span<const MatchReport> reports, EvalMode mode,
                      const MetricOptions& options) {
  EvalSummary s;
  s.mode = mode;
  for (const auto& report : reports) {
    (caption_eligible(report, mode, options) ? s.n_captions : s.n_skipped)++;
  }
  s.chair_i_ratio = chair_i_ratio(reports, mode, options);
  s.chair_s_ratio = chair_s_ratio(reports, mode, options);
  s.coverage_ratio = coverage_ratio(reports);
  s.chair_i = s.chair_i_ratio.percent();
  s.chair_s = s.chair_s_ratio.percent();
  s.coverage = s.coverage_ratio.percent();
  Averages avg = averages(captions, reports, mode, options);
  s.avg_length = avg.avg_length;
  s.avg_objects = avg.avg_objects;
  return s;
}

namespace {

json ratio_json(const Ratio& r) {
  return {{"numerator", r.numerator}, {"denominator", r.denominator}};
}

Ratio ratio_from(const json& j) {
  return {j.at("numerator").get<std::int64_t>(), j.at("denominator").get<std::int64_t>()};
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

json summary_to_json(const EvalSummary& s) {
  json out = {{"schema_version", EvalSummary::kSchemaVersion},
              {"mode", mode_name(s.mode)},
              {"chair_s", s.chair_s},
              {"chair_i", s.chair_i},
              {"coverage", s.coverage},
              {"avg_length", nullptr},
              {"avg_objects", s.avg_objects},
              {"n_captions", s.n_captions},
              {"n_skipped", s.n_skipped},
              {"ratios",
               {{"chair_s", ratio_json(s.chair_s_ratio)},
                {"chair_i", ratio_json(s.chair_i_ratio)},
                {"coverage", ratio_json(s.coverage_ratio)}}},
              {"control_value", nullptr},
              {"label", s.label}};
  if (s.avg_length) out["avg_length"] = *s.avg_length;
  if (s.control_value) out["control_value"] = *s.control_value;
  return out;
}

EvalSummary summary_from_json(const json& record) {
  if (!record.is_object() || !record.contains("schema_version") ||
      record["schema_version"] != EvalSummary::kSchemaVersion) {
    throw Error(ErrorCode::kSchemaMismatch,
                "summary schema version differs from " +
                    std::to_string(EvalSummary::kSchemaVersion));
  }
  try {
    EvalSummary s;
    s.mode = mode_from_name(record.at("mode").get<std::string>());
    s.chair_s = record.at("chair_s").get<double>();
    s.chair_i = record.at("chair_i").get<double>();
    s.coverage = record.at("coverage").get<double>();
    if (!record.at("avg_length").is_null()) s.avg_length = record["avg_length"].get<double>();
    s.avg_objects = record.at("avg_objects").get<double>();
    s.n_captions = record.at("n_captions").get<std::int64_t>();
    s.n_skipped = record.at("n_skipped").get<std::int64_t>();
    if (record.contains("ratios")) {
      s.chair_s_ratio = ratio_from(record["ratios"].at("chair_s"));
      s.chair_i_ratio = ratio_from(record["ratios"].at("chair_i"));
      s.coverage_ratio = ratio_from(record["ratios"].at("coverage"));
    }
    if (record.contains("control_value") && !record["control_value"].is_null()) {
      s.control_value = record["control_value"].get<double>();
    }
    s.label = record.value("label", "");
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaMismatch, std::string("bad summary: ") + e.what());
  }
}

namespace {

struct TableLayout {
  bool label = false;
  bool control = false;
  bool mode = false;
};

TableLayout layout_for(const std::vector<EvalSummary>& rows) {
  TableLayout layout;
  std::set<EvalMode> modes;
  for (const auto& r : rows) {
    layout.label = layout.label || !r.label.empty();
    layout.control = layout.control || r.control_value.has_value();
    modes.insert(r.mode);
  }
  layout.mode = modes.size() > 1;
  return layout;
}

std::vector<std::string> row_cells(const EvalSummary& r, const TableLayout& layout) {
  std::vector<std::string> cells;
  if (layout.label) cells.push_back(r.label);
  if (layout.control) cells.push_back(r.control_value ? fixed2(*r.control_value) : "--");
  if (layout.mode) cells.emplace_back(mode_name(r.mode));
  cells.push_back(fixed2(r.chair_s));
  cells.push_back(fixed2(r.chair_i));
  cells.push_back(fixed2(r.coverage));
  cells.push_back(r.avg_length ? fixed2(*r.avg_length) : "--");
  cells.push_back(fixed2(r.avg_objects));
  return cells;
}

std::vector<std::string> header_cells(const TableLayout& layout, bool arrows) {
  std::vector<std::string> cells;
  if (layout.label) cells.emplace_back("Run");
  if (layout.control) cells.emplace_back("Control value");
  if (layout.mode) cells.emplace_back("Mode");
  if (arrows) {
    for (const char* h : {"CHAIR_s↓", "CHAIR_i↓", "Coverage↑", "Avg. Length↑", "Avg. Object↑"}) {
      cells.emplace_back(h);
    }
  } else {
    for (const char* h : {"chair_s", "chair_i", "coverage", "avg_length", "avg_objects"}) {
      cells.emplace_back(h);
    }
  }
  return cells;
}

}  // namespace

std::string render_markdown_table(const std::vector<EvalSummary>& rows) {
  TableLayout layout = layout_for(rows);
  std::ostringstream out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    out << '|';
    for (const auto& c : cells) out << ' ' << c << " |";
    out << '\n';
  };
  auto header = header_cells(layout, true);
  emit(header);
  out << '|';
  for (std::size_t i = 0; i < header.size(); ++i) out << " --- |";
  out << '\n';
  for (const auto& r : rows) emit(row_cells(r, layout));
  return out.str();
}

std::string render_csv_table(const std::vector<EvalSummary>& rows) {
  TableLayout layout = layout_for(rows);
  std::ostringstream out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      bool quote = cells[i].find_first_of(",\"") != std::string::npos;
      if (!quote) {
        out << cells[i];
        continue;
      }
      out << '"';
      for (char c : cells[i]) {
        if (c == '"') out << '"';
        out << c;
      }
      out << '"';
    }
    out << '\n';
  };
  emit(header_cells(layout, false));
  for (const auto& r : rows) emit(row_cells(r, layout));
  return out.str();
}

}  // namespace halle
