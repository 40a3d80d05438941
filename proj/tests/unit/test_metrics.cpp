#include "doctest.h"
#include "halle/metrics.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace halle;

namespace {

constexpr EvalMode kModes[] = {EvalMode::kStandard, EvalMode::kOnlyIndicated,
                               EvalMode::kExcludeIndicated, EvalMode::kIncludeIndicated};

std::vector<MatchReport> reports_of(const std::vector<oracle::RawCaption>& batch) {
  std::vector<MatchReport> out;
  for (const auto& c : batch) out.push_back(oracle::to_report(c));
  return out;
}

std::vector<Caption> captions_of(const std::vector<oracle::RawCaption>& batch) {
  std::vector<Caption> out;
  for (const auto& c : batch) out.push_back(oracle::to_caption(c));
  return out;
}

void check_fraction(const Ratio& got, const oracle::Fraction& want) {
  CHECK(got.numerator == want.num);
  CHECK(got.denominator == want.den);
}

// n mentions of distinct objects, the first `bad` hallucinated, the first
// `ind` indicated.
MatchReport report(const std::string& id, int n, int bad, int ind = 0) {
  MatchReport r;
  r.caption_id = id;
  for (int i = 0; i < n; ++i) {
    MentionVerdict v;
    v.canonical = "obj" + std::to_string(i);
    v.hallucinated = i < bad;
    v.indicated = i < ind;
    r.mentions.push_back(v);
  }
  r.covered_gt = {"g"};
  return r;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("all metrics equal the brute-force recount on random batches") {
    std::mt19937_64 rng(20240601);
    for (int round = 0; round < 400; ++round) {
      auto batch = oracle::random_batch(rng);
      auto reports = reports_of(batch);
      auto captions = captions_of(batch);
      CAPTURE(round);
      for (EvalMode mode : kModes) {
        CAPTURE(mode_name(mode));
        auto want = oracle::recompute(batch, mode);
        check_fraction(chair_i_ratio(reports, mode), want.chair_i);
        check_fraction(chair_s_ratio(reports, mode), want.chair_s);
        check_fraction(coverage_ratio(reports), want.coverage);
        if (want.eligible == 0) {
          CHECK_ERROR_CODE(averages(captions, reports, mode), ErrorCode::kEmptyDenominator);
          continue;
        }
        auto avg = averages(captions, reports, mode);
        check_fraction(avg.words, want.words);
        check_fraction(avg.objects, want.objects);
        CHECK(avg.avg_length.has_value() == (mode != EvalMode::kOnlyIndicated));
        if (want.chair_i.den == 0 || want.coverage.den == 0) {
          CHECK_ERROR_CODE(summarize(captions, reports, mode), ErrorCode::kEmptyDenominator);
          continue;
        }
        auto s = summarize(captions, reports, mode);
        CHECK(s.n_captions == want.eligible);
        CHECK(s.n_skipped == want.skipped);
        CHECK(s.n_captions + s.n_skipped == static_cast<std::int64_t>(batch.size()));
        CHECK(s.chair_i == 100.0 * static_cast<double>(want.chair_i.num) /
                               static_cast<double>(want.chair_i.den));
        for (double v : {s.chair_i, s.chair_s, s.coverage}) {
          CHECK(v >= 0.0);
          CHECK(v <= 100.0);
        }
      }
    }
  }

  TEST_CASE("mode identities hold on every batch") {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 300; ++round) {
      auto reports = reports_of(oracle::random_batch(rng));
      auto std_i = chair_i_ratio(reports, EvalMode::kStandard);
      auto exc_i = chair_i_ratio(reports, EvalMode::kExcludeIndicated);
      auto inc_i = chair_i_ratio(reports, EvalMode::kIncludeIndicated);
      CHECK(inc_i.numerator == exc_i.numerator);
      CHECK(inc_i.denominator == std_i.denominator);
      auto std_s = chair_s_ratio(reports, EvalMode::kStandard);
      auto exc_s = chair_s_ratio(reports, EvalMode::kExcludeIndicated);
      CHECK(std_s.denominator == exc_s.denominator);
      CHECK(std_s.numerator >= exc_s.numerator);
    }
  }

  TEST_CASE("without indication three modes coincide") {
    std::vector<MatchReport> reports = {report("a", 4, 1), report("b", 3, 0), report("c", 5, 5)};
    auto s = chair_i_ratio(reports, EvalMode::kStandard);
    CHECK(chair_i_ratio(reports, EvalMode::kExcludeIndicated) == s);
    CHECK(chair_i_ratio(reports, EvalMode::kIncludeIndicated) == s);
    CHECK_ERROR_CODE(chair_i(reports, EvalMode::kOnlyIndicated), ErrorCode::kEmptyDenominator);
    CHECK_ERROR_CODE(chair_s(reports, EvalMode::kOnlyIndicated), ErrorCode::kEmptyDenominator);
  }

  TEST_CASE("worked values") {
    std::vector<MatchReport> hundred = {report("a", 100, 25)};
    CHECK(chair_i(hundred, EvalMode::kStandard) == 25.0);
    std::vector<MatchReport> ten;
    for (int i = 0; i < 10; ++i) ten.push_back(report("c" + std::to_string(i), 2, i < 3 ? 1 : 0));
    CHECK(chair_s(ten, EvalMode::kStandard) == 30.0);
    std::vector<MatchReport> clean = {report("a", 3, 0)};
    CHECK(chair_i(clean, EvalMode::kStandard) == 0.0);
    CHECK(chair_s(clean, EvalMode::kStandard) == 0.0);
    CHECK(coverage(clean) == 100.0);
    MatchReport none;
    none.caption_id = "n";
    none.uncovered_gt = {"x", "y"};
    CHECK(coverage(std::vector<MatchReport>{none}) == 0.0);
    MatchReport no_gt = report("z", 1, 0);
    no_gt.covered_gt.clear();
    CHECK_ERROR_CODE(coverage(std::vector<MatchReport>{no_gt}), ErrorCode::kEmptyDenominator);
  }

  TEST_CASE("averages of a single caption") {
    std::vector<Caption> captions = {{"a", "img", "one two three four five six seven eight nine [ten]"}};
    std::vector<MatchReport> reports = {report("a", 4, 1, 1)};
    auto avg = averages(captions, reports, EvalMode::kStandard);
    CHECK(avg.avg_length == 10.0);
    CHECK(avg.avg_objects == 4.0);
    auto only = averages(captions, reports, EvalMode::kOnlyIndicated);
    CHECK(!only.avg_length.has_value());
    CHECK(only.avg_objects == 1.0);
    CHECK_ERROR_CODE(averages({}, {}, EvalMode::kStandard), ErrorCode::kEmptyDenominator);
    CHECK_ERROR_CODE(averages({}, reports, EvalMode::kStandard), ErrorCode::kInputParse);
  }

  TEST_CASE("only-indicated eligibility and the all-units flag") {
    std::vector<MatchReport> reports = {report("a", 3, 1, 1), report("b", 3, 3, 0),
                                        report("c", 2, 0, 2)};
    CHECK(chair_s_ratio(reports, EvalMode::kOnlyIndicated) == Ratio{1, 2});
    MetricOptions all;
    all.only_indicated_all_units = true;
    CHECK(chair_s_ratio(reports, EvalMode::kOnlyIndicated, all) == Ratio{1, 3});
    CHECK(chair_i_ratio(reports, EvalMode::kOnlyIndicated) == Ratio{1, 3});
  }

  TEST_CASE("per-sentence units") {
    MatchReport r = report("a", 2, 1);
    r.sentence_units = 3;
    r.mentions[0].sentences = {0, 2};
    r.mentions[1].sentences = {1};
    CHECK(chair_s_ratio(std::vector<MatchReport>{r}, EvalMode::kStandard) == Ratio{2, 3});
  }

  TEST_CASE("summary json round trip and schema check") {
    std::vector<Caption> captions = {{"a", "img", "a b c"}};
    std::vector<MatchReport> reports = {report("a", 3, 1, 1)};
    auto s = summarize(captions, reports, EvalMode::kIncludeIndicated);
    s.label = "run";
    s.control_value = -1.0;
    auto j = summary_to_json(s);
    CHECK(j["mode"] == "include-ind");
    auto back = summary_from_json(j);
    CHECK(back.chair_i_ratio == s.chair_i_ratio);
    CHECK(back.chair_i == s.chair_i);
    CHECK(back.avg_length == s.avg_length);
    CHECK(back.control_value == s.control_value);
    CHECK(back.label == "run");
    auto wrong = j;
    wrong["schema_version"] = 99;
    CHECK_ERROR_CODE(summary_from_json(wrong), ErrorCode::kSchemaMismatch);
    wrong.erase("schema_version");
    CHECK_ERROR_CODE(summary_from_json(wrong), ErrorCode::kSchemaMismatch);
    auto only = summarize(captions, reports, EvalMode::kOnlyIndicated);
    CHECK(!summary_from_json(summary_to_json(only)).avg_length.has_value());
  }

  TEST_CASE("tables round only at presentation") {
    EvalSummary a;
    a.chair_s = 82.0;
    a.chair_i = 25.304;
    a.coverage = 33.335;
    a.avg_length = 100.5;
    a.avg_objects = 9.126;
    EvalSummary b = a;
    b.mode = EvalMode::kOnlyIndicated;
    b.avg_length.reset();
    auto md = render_markdown_table({a, b});
    CHECK(md.find("CHAIR_s↓ | CHAIR_i↓ | Coverage↑ | Avg. Length↑ | Avg. Object↑") != std::string::npos);
    CHECK(md.find("| standard | 82.00 | 25.30 |") != std::string::npos);
    CHECK(md.find("| only-ind | 82.00 | 25.30 | 33.34 | -- |") != std::string::npos);
    CHECK(a.chair_i == 25.304);
    auto csv = render_csv_table({a});
    CHECK(csv.rfind("chair_s,chair_i,coverage,avg_length,avg_objects\n", 0) == 0);
    CHECK(csv.find("82.00,25.30,33.34,100.50,9.13") != std::string::npos);
  }

  TEST_CASE("mode names") {
    for (EvalMode m : kModes) CHECK(mode_from_name(mode_name(m)) == m);
    CHECK_ERROR_CODE(mode_from_name("loose"), ErrorCode::kUsage);
  }
}
