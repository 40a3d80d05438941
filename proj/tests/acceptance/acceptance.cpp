// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace halle;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<std::string> names(const std::vector<ObjectMention>& ms, bool want_indicated) {
  std::vector<std::string> out;
  for (const auto& m : ms) {
    if (m.indicated == want_indicated) out.push_back(m.canonical);
  }
  return out;
}

GroundTruthSet gt_of(const std::vector<std::string>& raw, const Canonicalizer& canon) {
  GroundTruthSet gt;
  gt.image_id = "example";
  for (const auto& n : raw) {
    auto c = canon.canonicalize(n);
    if (std::find(gt.objects.begin(), gt.objects.end(), c) == gt.objects.end()) gt.objects.push_back(c);
  }
  return gt;
}

std::vector<std::string> canon_list(const json& raw, const Canonicalizer& canon) {
  return gt_of(raw.get<std::vector<std::string>>(), canon).objects;
}

// 1. Appendix prompt examples through both backends.
Outcome golden_prompts() {
  auto t0 = Clock::now();
  const auto& ex = testutil::prompt_examples();
  const auto& lex = testutil::lexicon();
  const auto& canon = lex.canonicalizer;
  int total = 0, ok = 0;
  auto tally = [&](bool good) {
    ++total;
    ok += good;
  };

  // Prime a disk cache with the appendix answers, then read it back through
  // a fresh client that may not touch the network.
  testutil::TempDir tmp;
  ClientConfig config;
  config.cache_dir = tmp / "cache";
  config.replay = true;
  {
    CachingChatClient primer(config, testutil::prompts());
    for (const auto& e : ex["extraction"]) {
      primer.prime(make_extract_request(e["caption"].get<std::string>()), e["response"].get<std::string>());
    }
    for (const auto& e : ex["hallucination"]) {
      primer.prime(make_match_request(MatchDirection::kHallucination, canon_list(e["list_a"], canon),
                                      canon_list(e["list_b"], canon)),
                   e["response"].get<std::string>());
    }
    for (const auto& e : ex["coverage"]) {
      primer.prime(make_match_request(MatchDirection::kCoverage, canon_list(e["list_b"], canon),
                                      canon_list(e["list_a"], canon)),
                   e["response"].get<std::string>());
    }
  }
  CachingChatClient client(config, testutil::prompts());

  for (const auto& e : ex["extraction"]) {
    Caption c{"ex", "example", e["caption"].get<std::string>()};
    auto want = e["expected"].get<std::vector<std::string>>();
    auto want_ind = e["indicated"].get<std::vector<std::string>>();
    auto lexicon_ms = extract_lexicon(c, lex);
    tally(names(lexicon_ms, false) == want && names(lexicon_ms, true) == want_ind);
    auto llm_ms = extract_llm(c, client, lex);
    tally(names(llm_ms, false) == want && names(llm_ms, true) == want_ind);
  }
  for (const auto& e : ex["hallucination"]) {
    auto gt = gt_of(e["list_a"].get<std::vector<std::string>>(), canon);
    auto mentions = canon_list(e["list_b"], canon);
    auto want = canon_list(e["expected"], canon);
    tally(match_hallucination(gt, mentions, testutil::synonyms()) == want);
    tally(match_llm(gt, mentions, MatchDirection::kHallucination, client, canon) == want);
  }
  for (const auto& e : ex["coverage"]) {
    auto gt = gt_of(e["list_b"].get<std::vector<std::string>>(), canon);
    auto mentions = canon_list(e["list_a"], canon);
    auto want = canon_list(e["expected"], canon);
    tally(match_coverage(mentions, gt, testutil::synonyms()) == want);
    tally(match_llm(gt, mentions, MatchDirection::kCoverage, client, canon) == want);
  }
  double secs = seconds_since(t0);
  bool network_free = client.network_calls() == 0;
  return {ok == total && secs < 1.0 && network_free,
          std::to_string(ok) + "/" + std::to_string(total) + " examples reproduced, " +
              fmt("%.3f s", secs) + (network_free ? "" : ", network used")};
}

bool same_fraction(const Ratio& r, const oracle::Fraction& f) {
  return r.numerator == f.num && r.denominator == f.den;
}

constexpr EvalMode kModes[] = {EvalMode::kStandard, EvalMode::kOnlyIndicated,
                               EvalMode::kExcludeIndicated, EvalMode::kIncludeIndicated};

// Every metric as an exact fraction, or nullopt where the system refuses.
struct Exact {
  std::optional<Ratio> chair_i, chair_s, coverage, words, objects;
};

Exact system_metrics(const std::vector<Caption>& captions, const std::vector<MatchReport>& reports,
                     EvalMode mode) {
  Exact e;
  auto guard = [](auto f) -> std::optional<Ratio> {
    Ratio r = f();
    try {
      (void)r.value();
      return r;
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  e.chair_i = guard([&] { return chair_i_ratio(reports, mode); });
  e.chair_s = guard([&] { return chair_s_ratio(reports, mode); });
  e.coverage = guard([&] { return coverage_ratio(reports); });
  try {
    auto avg = averages(captions, reports, mode);
    e.words = avg.words;
    e.objects = avg.objects;
    if ((mode == EvalMode::kOnlyIndicated) == avg.avg_length.has_value()) e.words.reset();
  } catch (const Error&) {
  }
  return e;
}

bool agrees(const std::optional<Ratio>& got, const oracle::Fraction& want) {
  if (want.den == 0) return !got.has_value();
  return got.has_value() && same_fraction(*got, want);
}

// 2. Brute-force recount.
Outcome oracle_equivalence() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int batches = 0, mismatches = 0;
  for (; batches < 1000; ++batches) {
    auto batch = oracle::random_batch(rng);
    std::vector<Caption> captions;
    std::vector<MatchReport> reports;
    for (const auto& c : batch) {
      captions.push_back(oracle::to_caption(c));
      reports.push_back(oracle::to_report(c));
    }
    for (EvalMode mode : kModes) {
      auto want = oracle::recompute(batch, mode);
      auto got = system_metrics(captions, reports, mode);
      bool ok = agrees(got.chair_i, want.chair_i) && agrees(got.chair_s, want.chair_s) &&
                agrees(got.coverage, want.coverage) && agrees(got.objects, want.objects) &&
                agrees(got.words, want.words);
      mismatches += !ok;
    }
  }
  double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0,
          std::to_string(batches) + " batches x 4 modes, " + std::to_string(mismatches) +
              " mismatches, " + fmt("%.2f s", secs)};
}

// 3. Formula identities between modes.
Outcome mode_identities() {
  std::mt19937_64 rng(77);
  int batches = 0, violations = 0, unindicated = 0;
  for (; batches < 1000; ++batches) {
    auto batch = oracle::random_batch(rng);
    std::vector<Caption> captions;
    std::vector<MatchReport> reports;
    bool any_indicated = false;
    for (const auto& c : batch) {
      captions.push_back(oracle::to_caption(c));
      reports.push_back(oracle::to_report(c));
      any_indicated = any_indicated || !c.indicated.empty();
    }
    auto std_i = chair_i_ratio(reports, EvalMode::kStandard);
    auto exc_i = chair_i_ratio(reports, EvalMode::kExcludeIndicated);
    auto inc_i = chair_i_ratio(reports, EvalMode::kIncludeIndicated);
    if (inc_i.numerator != exc_i.numerator || inc_i.denominator != std_i.denominator) ++violations;
    if (!any_indicated) {
      ++unindicated;
      auto s = system_metrics(captions, reports, EvalMode::kStandard);
      for (EvalMode m : {EvalMode::kExcludeIndicated, EvalMode::kIncludeIndicated}) {
        auto o = system_metrics(captions, reports, m);
        if (o.chair_i != s.chair_i || o.chair_s != s.chair_s || o.coverage != s.coverage ||
            o.words != s.words || o.objects != s.objects) {
          ++violations;
        }
      }
    }
  }
  return {violations == 0 && unindicated > 0,
          std::to_string(batches) + " batches (" + std::to_string(unindicated) +
              " without indication), " + std::to_string(violations) + " violations"};
}

// 4. Exact identities of the control layer.
Outcome control_identities() {
  double worst_identity = 0, worst_affine = 0, worst_norm = 0, worst_seq = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto m = ControlledLM::random(Vocabulary({"a", "b", "c", "d", "e", "f"}), 6, seed, 0.8);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 0.5);
    for (Eigen::Index i = 0; i < m.W.size(); ++i) m.W.data()[i] = normal(rng);
    auto base = m;
    base.W.setZero();
    for (int prev = 0; prev <= m.vocab_size(); ++prev) {
      worst_identity = std::max(worst_identity,
                                (next_token_dist(m, prev, 0.0) - next_token_dist(base, prev, 0.0)).lpNorm<1>());
      Eigen::VectorXd l0 = logits(m, prev, 0.0), l1 = logits(m, prev, 1.0);
      for (double eps : {-1.0, -0.5, 0.3, 0.8, 1.0}) {
        Eigen::VectorXd d = (logits(m, prev, eps) - l0) - eps * (l1 - l0);
        worst_affine = std::max(worst_affine, d.cwiseAbs().maxCoeff());
        worst_norm = std::max(worst_norm, std::abs(next_token_dist(m, prev, eps).sum() - 1.0));
      }
    }
    for (double eps : {-1.0, 0.0, 0.6}) {
      double total = 0.0;
      for (int a = 0; a < m.vocab_size(); ++a) {
        for (int b = 0; b < m.vocab_size(); ++b) total += std::exp(sequence_logprob(m, {a, b}, eps));
      }
      worst_seq = std::max(worst_seq, std::abs(total - 1.0));
    }
  }
  bool pass = worst_identity <= 1e-12 && worst_affine <= 1e-12 && worst_norm <= 1e-12 && worst_seq <= 1e-9;
  std::ostringstream d;
  d << "eps=0 L1 " << worst_identity << ", affine " << worst_affine << ", normalization " << worst_norm
    << ", length-2 total " << worst_seq;
  return {pass, d.str()};
}

// 5. Finite differences.
Outcome gradient_check() {
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto inst = oracle::random_gradient_instance(seed);
    auto analytic = control_gradient(inst.model, inst.records, inst.l2);
    auto numeric = oracle::finite_difference_w(inst.model, inst.records, inst.l2, 1e-5);
    worst = std::max(worst, oracle::max_relative_error(analytic, numeric));
  }
  std::ostringstream d;
  d << "max relative error " << worst << " over 5 instances";
  return {worst < 1e-5, d.str()};
}

// The desk-scale experiment shared by criteria 6 to 8.
struct ToyRun {
  ToyExperimentConfig config;
  ToyWorld world;
  ToyCorpus corpus;
  ToyModel toy;
  std::vector<SampleBatch> batches;  // one per epsilon of kGrid
  double seconds = 0;
};

constexpr double kGrid[] = {-1.0, -0.5, 0.0, 0.5, 1.0};

ToyRun run_toy() {
  auto t0 = Clock::now();
  ToyRun run;
  run.world = make_toy_world(run.config.world);
  run.corpus = build_toy_corpus(run.world, run.config);
  run.toy = train_toy_model(run.corpus.examples, run.config);
  std::set<std::string> parametric(run.config.world.inferable_pool.begin(),
                                   run.config.world.inferable_pool.end());
  for (double eps : kGrid) {
    run.batches.push_back(sample_captions(run.toy.model, eps, run.config.samples, run.config.max_len,
                                          run.config.seed, parametric));
  }
  run.seconds = seconds_since(t0);
  return run;
}

// 6. Parametric-object rate rises with epsilon.
Outcome directionality(const ToyRun& run) {
  std::vector<double> rates;
  for (const auto& b : run.batches) rates.push_back(b.parametric_rate());
  int inversions = 0;
  for (std::size_t i = 1; i < rates.size(); ++i) inversions += rates[i] < rates[i - 1];
  double ratio = rates.front() > 0 ? rates.back() / rates.front() : INFINITY;
  bool pass = ratio >= 2.0 && inversions <= 1 && run.seconds < 60.0 &&
              run.toy.model.vocab_size() <= 60 && run.toy.model.dim() == 16;
  std::ostringstream d;
  d << "rates";
  for (std::size_t i = 0; i < rates.size(); ++i) d << ' ' << format_epsilon(kGrid[i]) << ':' << fmt("%.4f", rates[i]);
  d << ", ratio " << fmt("%.2f", ratio) << ", inversions " << inversions << ", vocab "
    << run.toy.model.vocab_size() << ", " << run.corpus.examples.size() << " sequences, "
    << fmt("%.2f s", run.seconds);
  return {pass, d.str()};
}

// 7. Indicated objects are the hallucination-prone ones.
Outcome indication_discipline(const ToyRun& run) {
  std::vector<Caption> captions;
  for (const auto& b : run.batches) {
    auto part = samples_as_captions(b, run.world.reference.image_id);
    captions.insert(captions.end(), part.begin(), part.end());
  }
  std::map<std::string, GroundTruthSet> gt = {{run.world.reference.image_id, run.world.reference}};
  EvalResources res{&testutil::lexicon(), &testutil::synonyms(), nullptr};
  EvalConfig only, exclude;
  only.mode = EvalMode::kOnlyIndicated;
  exclude.mode = EvalMode::kExcludeIndicated;
  only.jobs = exclude.jobs = 4;
  auto a = run_eval(captions, gt, res, only).summary;
  auto b = run_eval(captions, gt, res, exclude).summary;
  double gap = a.chair_i - b.chair_i;
  return {gap >= 20.0, "only-ind CHAIR_i " + fmt("%.2f", a.chair_i) + ", exclude-ind CHAIR_i " +
                           fmt("%.2f", b.chair_i) + ", gap " + fmt("%.2f pp", gap) + " over " +
                           std::to_string(captions.size()) + " captions"};
}

// 8. Bound endpoints; the full grid is reported only.
Outcome bound_endpoints(const ToyRun& run) {
  std::vector<double> grid = {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0};
  auto report = verify_bound(run.toy.model, 1.0, grid, 3);
  auto zero = run.toy.model;
  zero.W.setZero();
  auto flat = verify_bound(zero, 1.0, grid, 3);
  bool zero_ok = std::all_of(flat.points.begin(), flat.points.end(),
                             [](const BoundPoint& p) { return p.lhs == 0.0; });
  int grid_pass = 0;
  double max_lhs = 0;
  for (const auto& p : report.points) {
    grid_pass += p.pass;
    max_lhs = std::max(max_lhs, p.lhs);
  }
  std::ostringstream d;
  d << "endpoint lhs " << report.points.front().lhs << " / " << report.points.back().lhs
    << ", W=0 max lhs " << (zero_ok ? "0" : "nonzero") << "; grid " << grid_pass << "/" << report.points.size()
    << " within the bound (sigma_max " << fmt("%.3f", report.sigma_max) << ", L=3, max lhs "
    << fmt("%.4f", max_lhs) << ")";
  return {report.endpoints_ok() && zero_ok, d.str()};
}

// 9. Label discipline over a large generated corpus.
Outcome label_discipline() {
  ToyExperimentConfig config;
  config.world.n_images = 5000;
  config.world.seed = 99;
  auto world = make_toy_world(config.world);
  auto corpus = build_toy_corpus(world, config);
  auto lint = lint_corpus(corpus.examples, corpus.splits);
  std::ostringstream d;
  d << lint.records << " records, " << lint.negative_with_brackets << " negative with brackets, "
    << lint.positive_brackets_on_grounded << " brackets on grounded objects, "
    << lint.positive_brackets_not_omitted + lint.malformed << " other problems";
  return {lint.records >= 10000 && lint.clean(), d.str()};
}

// Everything one pipeline run produces, serialized.
std::string pipeline_bytes(const std::filesystem::path& cache_dir) {
  ToyExperimentConfig config;
  config.world.n_images = 400;
  std::ostringstream out;
  auto world = make_toy_world(config.world);
  auto corpus = build_toy_corpus(world, config);
  std::vector<json> lines;
  for (const auto& e : ordered_corpus(corpus.examples)) lines.push_back(example_to_json(e));
  out << to_jsonl(lines);
  auto toy = train_toy_model(corpus.examples, config);
  out << checkpoint_bytes(toy.model);
  std::map<std::string, GroundTruthSet> gt = {{world.reference.image_id, world.reference}};
  EvalResources res{&testutil::lexicon(), &testutil::synonyms(), nullptr};
  for (double eps : kGrid) {
    auto batch = sample_captions(toy.model, eps, 200, config.max_len, config.seed, {});
    auto captions = samples_as_captions(batch, world.reference.image_id);
    for (const auto& c : captions) out << caption_to_json(c).dump() << '\n';
    EvalConfig ec;
    ec.mode = EvalMode::kIncludeIndicated;
    ec.jobs = 4;
    auto result = run_eval(captions, gt, res, ec);
    for (const auto& r : result.reports) out << report_to_json(r).dump() << '\n';
    out << summary_to_json(result.summary).dump() << '\n';
  }
  // LLM-backed evaluation of the golden fixture from the replay cache.
  ClientConfig cc;
  cc.cache_dir = cache_dir;
  cc.replay = true;
  CachingChatClient client(cc, testutil::prompts());
  auto golden = testutil::fixtures() / "golden";
  EvalResources llm_res{&testutil::lexicon(), &testutil::synonyms(), &client};
  EvalConfig ec;
  ec.extractor = Backend::kLlm;
  ec.jobs = 3;
  auto result = run_eval(read_captions(golden / "captions.jsonl"),
                         read_ground_truth(golden / "ground_truth.json", testutil::lexicon().canonicalizer),
                         llm_res, ec);
  out << summary_to_json(result.summary).dump() << '\n';
  return out.str();
}

// 10. Two full runs give the same bytes.
Outcome determinism() {
  testutil::TempDir tmp;
  {
    ClientConfig cc;
    cc.cache_dir = tmp / "cache";
    cc.replay = true;
    CachingChatClient primer(cc, testutil::prompts());
    for (const auto& r : read_jsonl_file(testutil::fixtures() / "golden" / "extract_requests.jsonl")) {
      PromptRequest request;
      request.template_id = template_from_name(r["template"].get<std::string>());
      request.substitutions = r["substitutions"].get<std::map<std::string, std::string>>();
      primer.prime(request, r["response"].get<std::string>());
    }
  }
  auto a = pipeline_bytes(tmp / "cache");
  auto b = pipeline_bytes(tmp / "cache");
  return {a == b, std::to_string(a.size()) + " bytes per run, digests " + sha256_hex(a).substr(0, 12) + " / " +
                      sha256_hex(b).substr(0, 12)};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };
  report(1, "prompt-example golden suite", golden_prompts);
  report(2, "metric oracle equivalence", oracle_equivalence);
  report(3, "mode identities", mode_identities);
  report(4, "control-layer identities", control_identities);
  report(5, "gradient check", gradient_check);
  std::optional<ToyRun> toy;
  std::string toy_error;
  try {
    toy = run_toy();
  } catch (const std::exception& e) {
    toy_error = e.what();
  }
  auto with_toy = [&](Outcome (*f)(const ToyRun&)) {
    return [&, f]() -> Outcome {
      if (!toy) return {false, "toy experiment failed: " + toy_error};
      return f(*toy);
    };
  };
  report(6, "desk-scale control directionality", with_toy(directionality));
  report(7, "indication discipline", with_toy(indication_discipline));
  report(8, "bound endpoints", with_toy(bound_endpoints));
  report(9, "datagen label discipline", label_discipline);
  report(10, "end-to-end determinism", determinism);
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
