#include "doctest.h"
#include "halle/pipeline.hpp"
#include "support/test_util.hpp"

using namespace halle;

namespace {

EvalResources lexicon_resources() {
  return {&testutil::lexicon(), &testutil::synonyms(), nullptr};
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("evaluation output does not depend on the job count") {
    auto world = make_toy_world({.n_images = 120, .seed = 4});
    std::vector<Caption> captions = world.captions;
    std::reverse(captions.begin(), captions.end());
    for (auto& c : captions) c.text = annotate_brackets(c.text, {"person", "chair"});
    EvalConfig one;
    EvalConfig many;
    many.jobs = 8;
    auto a = run_eval(captions, world.ground_truth, lexicon_resources(), one);
    auto b = run_eval(captions, world.ground_truth, lexicon_resources(), many);
    REQUIRE(a.reports.size() == b.reports.size());
    for (std::size_t i = 0; i < a.reports.size(); ++i) {
      CHECK(report_to_json(a.reports[i]) == report_to_json(b.reports[i]));
    }
    CHECK(summary_to_json(a.summary) == summary_to_json(b.summary));
    CHECK(std::is_sorted(a.captions.begin(), a.captions.end(),
                         [](const Caption& x, const Caption& y) { return x.id < y.id; }));
    // Captions name exactly their ground truth.
    CHECK(a.summary.chair_i == 0.0);
    CHECK(a.summary.coverage == 100.0);
  }

  TEST_CASE("missing ground truth and missing client") {
    std::vector<Caption> captions = {{"c1", "nowhere", "A dog."}};
    CHECK_ERROR_CODE(run_eval(captions, {}, lexicon_resources(), {}), ErrorCode::kInputParse);
    GroundTruthSet gt;
    gt.image_id = "nowhere";
    gt.objects = {"dog"};
    EvalConfig llm;
    llm.matcher = Backend::kLlm;
    CHECK_ERROR_CODE(run_eval(captions, {{"nowhere", gt}}, lexicon_resources(), llm), ErrorCode::kUsage);
    CHECK_ERROR_CODE(backend_from_name("gpt"), ErrorCode::kUsage);
    CHECK(backend_from_name(backend_name(Backend::kLlm)) == Backend::kLlm);
  }

  TEST_CASE("toy corpus obeys the label discipline") {
    ToyExperimentConfig config;
    config.world.n_images = 150;
    auto world = make_toy_world(config.world);
    auto corpus = build_toy_corpus(world, config);
    auto lint = lint_corpus(corpus.examples, corpus.splits);
    CHECK(lint.clean());
    CHECK(lint.records == corpus.examples.size());
    auto again = build_toy_corpus(world, config);
    CHECK(again.examples == corpus.examples);
  }

  TEST_CASE("samples become captions with stable ids") {
    SampleBatch batch;
    batch.epsilon = -0.5;
    batch.texts = {"a [dog].", "", "a [cat."};
    auto caps = samples_as_captions(batch, "ref");
    REQUIRE(caps.size() == 3);
    CHECK(caps[0].id == "eps-0.50-0");
    CHECK(caps[1].text == ".");
    CHECK(caps[0].indicated_markup);
    CHECK(!caps[2].indicated_markup);
    CHECK(format_epsilon(1.0) == "+1.00");
    CHECK(format_epsilon(0.0) == "+0.00");
  }

  TEST_CASE("sampling is reproducible and counts parametric tokens") {
    Vocabulary v({"dog", "person"});
    auto m = ControlledLM::random(v, 4, 3, 0.5);
    auto a = sample_captions(m, 0.0, 40, 10, 99, {"person"});
    auto b = sample_captions(m, 0.0, 40, 10, 99, {"person"});
    CHECK(a.texts == b.texts);
    CHECK(a.tokens > 0);
    CHECK(a.parametric_tokens > 0);
    CHECK(a.parametric_tokens <= a.tokens);
    CHECK(a.parametric_rate() > 0.0);
  }
}
