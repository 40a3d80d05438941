#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "halle/extraction.hpp"
#include "halle/io.hpp"
#include "halle/matching.hpp"

namespace halle {

enum class EvalMode { kStandard, kOnlyIndicated, kExcludeIndicated, kIncludeIndicated };

// "standard", "only-ind", "exclude-ind", "include-ind".
std::string_view mode_name(EvalMode mode);
EvalMode mode_from_name(std::string_view name);

// Exact integer fraction; shards merge by adding numerators and denominators.
struct Ratio {
  std::int64_t numerator = 0;
  std::int64_t denominator = 0;

  // 100 * numerator / denominator. Throws kEmptyDenominator when zero.
  double percent() const;
  // numerator / denominator. Throws kEmptyDenominator when zero.
  double value() const;
  Ratio& operator+=(const Ratio& other) {
    numerator += other.numerator;
    denominator += other.denominator;
    return *this;
  }
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

struct MetricOptions {
  // In only-indicated mode, count every caption in the CHAIR_s denominator
  // instead of just captions with an indicated object.
  bool only_indicated_all_units = false;
};

// Whether a caption takes part in the batch under the mode.
bool caption_eligible(const MatchReport& report, EvalMode mode,
                      const MetricOptions& options = {});

Ratio chair_i_ratio(std::span<const MatchReport> reports, EvalMode mode,
                    const MetricOptions& options = {});
Ratio chair_s_ratio(std::span<const MatchReport> reports, EvalMode mode,
                    const MetricOptions& options = {});
Ratio coverage_ratio(std::span<const MatchReport> reports);

double chair_i(std::span<const MatchReport> reports, EvalMode mode,
               const MetricOptions& options = {});
double chair_s(std::span<const MatchReport> reports, EvalMode mode,
               const MetricOptions& options = {});
double coverage(std::span<const MatchReport> reports);

struct Averages {
  std::optional<double> avg_length;  // absent in only-indicated mode
  double avg_objects = 0.0;
  Ratio words;    // total words / eligible captions
  Ratio objects;  // applicable mentions / eligible captions
};

// Captions and reports are aligned by caption id. Throws kEmptyDenominator
// for an empty (or fully skipped) batch.
Averages averages(std::span<const Caption> captions,
                  std::span<const MatchReport> reports, EvalMode mode,
                  const MetricOptions& options = {});

struct EvalSummary {
  static constexpr int kSchemaVersion = 1;

  EvalMode mode = EvalMode::kStandard;
  double chair_s = 0.0;
  double chair_i = 0.0;
  double coverage = 0.0;
  std::optional<double> avg_length;
  double avg_objects = 0.0;
  std::int64_t n_captions = 0;
  std::int64_t n_skipped = 0;
  Ratio chair_s_ratio;
  Ratio chair_i_ratio;
  Ratio coverage_ratio;
  // Presentation metadata carried into comparison tables.
  std::optional<double> control_value;
  std::string label;
};

EvalSummary summarize(std::span<const Caption> captions,
                      std::span<const MatchReport> reports, EvalMode mode,
                      const MetricOptions& options = {});

json summary_to_json(const EvalSummary& summary);
// Throws kSchemaMismatch on a missing or different schema version.
EvalSummary summary_from_json(const json& record);

// Markdown table with the CCEval column layout, one row per summary, values
// rounded to two decimals.
std::string render_markdown_table(const std::vector<EvalSummary>& rows);
std::string render_csv_table(const std::vector<EvalSummary>& rows);

}  // namespace halle
