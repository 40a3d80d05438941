#include <random>
#include <set>

#include "doctest.h"
#include "halle/datagen.hpp"
#include "halle/extraction.hpp"
#include "halle/llm_client.hpp"
#include "support/test_util.hpp"

using namespace halle;

namespace {

GroundTruthSet gt_of(const std::string& image, std::vector<std::string> objects) {
  GroundTruthSet gt;
  gt.image_id = image;
  gt.objects = std::move(objects);
  return gt;
}

DetectionSplit split_of(const std::string& image, std::vector<std::string> grounded,
                        std::vector<std::string> omitted) {
  return {image, std::move(grounded), std::move(omitted)};
}

class FixedGenerator : public CaptionGenerator {
 public:
  explicit FixedGenerator(std::string text) : text_(std::move(text)) {}
  std::string generate(const std::string&, const std::vector<std::string>&) override { return text_; }

 private:
  std::string text_;
};

std::set<std::string> extracted(const std::string& text) {
  Caption c{"c", "img", text};
  std::set<std::string> out;
  for (const auto& m : extract_lexicon(c, testutil::lexicon(), {})) out.insert(m.canonical);
  return out;
}

}  // namespace

TEST_SUITE("datagen") {
  TEST_CASE("constant oracles put everything on one side") {
    auto gt = gt_of("i", {"dog", "car", "tree"});
    auto all = split_objects(gt, ConstantOracle(true));
    CHECK(all.grounded == gt.objects);
    CHECK(all.omitted.empty());
    auto none = split_objects(gt, ConstantOracle(false));
    CHECK(none.grounded.empty());
    CHECK(none.omitted == gt.objects);
  }

  TEST_CASE("seeded random oracle hits its rate and is order free") {
    SeededRandomOracle oracle(0.7, 12345);
    int visible = 0;
    for (int i = 0; i < 1000; ++i) {
      if (*oracle.visible("img" + std::to_string(i / 10), "obj" + std::to_string(i))) ++visible;
    }
    // Binomial(1000, 0.7) has sd ~14.5, so the band is more than 3 sd wide.
    CHECK(visible >= 650);
    CHECK(visible <= 750);
    CHECK(oracle.visible("a", "b") == SeededRandomOracle(0.7, 12345).visible("a", "b"));
    CHECK_ERROR_CODE(SeededRandomOracle(1.5, 1), ErrorCode::kUsage);
    CHECK(*SeededRandomOracle(1.0, 3).visible("x", "y"));
    CHECK(!*SeededRandomOracle(0.0, 3).visible("x", "y"));
  }

  TEST_CASE("detection file oracle and misses") {
    Canonicalizer canon;
    auto doc = json::parse(R"({"i1": {"grounded": ["Dogs"], "omitted": ["car"]}})");
    DetectionFileOracle oracle(doc, canon);
    auto split = split_objects(gt_of("i1", {"dog", "car"}), oracle);
    CHECK(split.grounded == std::vector<std::string>{"dog"});
    CHECK(split.omitted == std::vector<std::string>{"car"});
    CHECK_ERROR_CODE(split_objects(gt_of("i1", {"dog", "bird"}), oracle), ErrorCode::kOracleMiss);
    CHECK_ERROR_CODE(split_objects(gt_of("i2", {"dog"}), oracle), ErrorCode::kOracleMiss);
    auto back = splits_from_json(splits_to_json({split}));
    CHECK(back.at("i1").omitted == split.omitted);
  }

  TEST_CASE("partition holds for random splits") {
    std::mt19937_64 rng(5);
    SeededRandomOracle oracle(0.5, 77);
    for (int round = 0; round < 200; ++round) {
      std::vector<std::string> objects;
      int n = static_cast<int>(rng() % 8);
      for (int i = 0; i < n; ++i) objects.push_back("o" + std::to_string(rng() % 1000));
      std::sort(objects.begin(), objects.end());
      objects.erase(std::unique(objects.begin(), objects.end()), objects.end());
      auto s = split_objects(gt_of("r" + std::to_string(round), objects), oracle);
      std::vector<std::string> both = s.grounded;
      both.insert(both.end(), s.omitted.begin(), s.omitted.end());
      std::sort(both.begin(), both.end());
      CHECK(both == objects);
    }
  }

  TEST_CASE("bracket annotation") {
    CHECK(annotate_brackets("a cat on a mat", {"cat"}) == "a [cat] on a mat");
    CHECK(annotate_brackets("a cat on a mat", {}) == "a cat on a mat");
    CHECK(annotate_brackets("Two Cats and a catalog.", {"cat"}) == "Two [Cats] and a catalog.");
    CHECK(annotate_brackets("A traffic light, then a light.", {"light", "traffic light"}) ==
          "A [traffic light], then a [light].");
    CHECK(annotate_brackets("A traffic light, then a light.", {"light"}, {"traffic light"}) ==
          "A traffic light, then a [light].");
    CHECK(annotate_brackets("People and a person.", {"person"}) == "[People] and a [person].");
    CHECK_ERROR_CODE(annotate_brackets("a [cat]", {"cat"}), ErrorCode::kAlreadyAnnotated);
  }

  TEST_CASE("annotation is idempotent and preserves other bytes") {
    const std::vector<std::string> words = {"cat", "cats", "dog", "traffic", "light", "lights",
                                            "a",   "the",  "on",  "Cat",     "DOG",   "bus,"};
    const std::vector<std::string> objects = {"cat", "dog", "traffic light", "light", "bus"};
    std::mt19937_64 rng(8);
    for (int round = 0; round < 500; ++round) {
      std::string s;
      int n = 1 + static_cast<int>(rng() % 12);
      for (int i = 0; i < n; ++i) {
        if (i) s += (rng() % 5 == 0) ? ". " : " ";
        s += words[rng() % words.size()];
      }
      std::vector<std::string> omitted;
      for (const auto& o : objects) {
        if (rng() % 2) omitted.push_back(o);
      }
      auto once = annotate_brackets(s, omitted);
      auto cleaned = parse_brackets(once).clean_text;
      CHECK(cleaned == s);
      CHECK(annotate_brackets(cleaned, omitted) == once);
      CHECK(parse_brackets(once).spans.size() <= static_cast<std::size_t>(n));
    }
  }

  TEST_CASE("template contextual captions name exactly the grounded objects") {
    TemplateCaptionGenerator gen(42);
    for (const auto& w : TemplateCaptionGenerator::filler_words()) {
      CHECK_MESSAGE(extracted(w).empty(), w);
    }
    auto world = make_toy_world({.n_images = 100, .seed = 3});
    DetectionFileOracle oracle(world.detections, Canonicalizer());
    int leaked = 0;
    for (const auto& [id, gt] : world.ground_truth) {
      auto split = split_objects(gt, oracle);
      auto text = synthesize_contextual(split, gen);
      auto names = extracted(text);
      CHECK(names == std::set<std::string>(split.grounded.begin(), split.grounded.end()));
      for (const auto& o : split.omitted) leaked += names.contains(o);
    }
    CHECK(leaked == 0);
    CHECK(gen.generate("same", {"tree", "bus"}) == TemplateCaptionGenerator(42).generate("same", {"tree", "bus"}));
  }

  TEST_CASE("contextual synthesis rejects leaks and empty input") {
    TemplateCaptionGenerator gen(1);
    CHECK_ERROR_CODE(synthesize_contextual(split_of("i", {}, {"dog"}), gen), ErrorCode::kPrecondition);
    FixedGenerator leaky("A tree next to two dogs.");
    CHECK_ERROR_CODE(synthesize_contextual(split_of("i", {"tree"}, {"dog"}), leaky), ErrorCode::kLeakedObject);
    FixedGenerator marked("A [tree].");
    CHECK_ERROR_CODE(synthesize_contextual(split_of("i", {"tree"}, {}), marked), ErrorCode::kLeakedObject);
    FixedGenerator fine("A tree by a hotdog stand.");
    CHECK(synthesize_contextual(split_of("i", {"tree"}, {"dog"}), fine) == "A tree by a hotdog stand.");
  }

  TEST_CASE("llm caption generator sends the grounded list") {
    testutil::TempDir tmp;
    ClientConfig config;
    config.cache_dir = tmp / "c";
    config.replay = true;
    CachingChatClient client(config, testutil::prompts());
    client.prime(make_contextual_request({"tree", "bus"}), "A bus parked under a tree.");
    LlmCaptionGenerator gen(client);
    CHECK(synthesize_contextual(split_of("i", {"tree", "bus"}, {"person"}), gen) ==
          "A bus parked under a tree.");
  }

  TEST_CASE("joint examples and lint") {
    auto split = split_of("i1", {"tree"}, {"person"});
    auto joint = make_joint_example("A person sits by a tree.", split);
    CHECK(joint.text == "A [person] sits by a tree.");
    CHECK(joint.epsilon_label == 1);
    CHECK(joint.image_id == "i1");
    CHECK(make_joint_example("A person sits by a tree.", split, true).text == "A person sits by a tree.");

    std::map<std::string, DetectionSplit> splits = {{"i1", split}};
    std::vector<TrainingExample> good = {{"A tree.", -1, "i1"}, joint};
    CHECK(lint_corpus(good, splits).clean());
    std::vector<TrainingExample> bad = {{"A [tree].", -1, "i1"},
                                        {"A [tree].", 1, "i1"},
                                        {"A [boat].", 1, "i1"},
                                        {"A [boat.", 1, "i1"}};
    auto report = lint_corpus(bad, splits);
    CHECK(!report.clean());
    CHECK(report.negative_with_brackets == 1);
    CHECK(report.positive_brackets_on_grounded == 1);
    CHECK(report.positive_brackets_not_omitted == 1);
    CHECK(report.malformed == 1);
  }

  TEST_CASE("ratio, ordering and the corpus file") {
    std::vector<TrainingExample> ex;
    for (int i = 0; i < 30; ++i) {
      ex.push_back({"ctx " + std::to_string(i), -1, "i" + std::to_string(i)});
      ex.push_back({"joint " + std::to_string(i), 1, "i" + std::to_string(i)});
    }
    auto r = apply_ratio(ex, 10, 23, 9);
    auto count = [](const std::vector<TrainingExample>& v, int label) {
      return std::count_if(v.begin(), v.end(), [&](const auto& e) { return e.epsilon_label == label; });
    };
    CHECK(count(r, 1) == 30);
    CHECK(count(r, -1) == 13);
    CHECK(apply_ratio(ex, 10, 23, 9) == r);
    CHECK(apply_ratio(ex, 1, 1, 9).size() == 60);

    auto ordered = ordered_corpus({{"b", 1, "i2"}, {"a", 1, "i1"}, {"c", -1, "i2"}, {"d", -1, "i1"}});
    CHECK(ordered[0].text == "d");
    CHECK(ordered[1].text == "a");
    CHECK(ordered[2].text == "c");
    CHECK(ordered[3].text == "b");

    testutil::TempDir tmp;
    auto path = tmp / "corpus.jsonl";
    std::vector<TrainingExample> two = {{"A [person] by a \"tree\".", 1, "i1"}, {"A tree.", -1, "i1"}};
    auto manifest = emit_corpus(two, path, {{"oracle", "test"}});
    CHECK(manifest["records"] == 2);
    CHECK(manifest["label_counts"]["-1"] == 1);
    CHECK(manifest["label_counts"]["+1"] == 1);
    CHECK(manifest["provenance"]["oracle"] == "test");
    CHECK(read_json_file(tmp / "corpus.jsonl.manifest.json") == manifest);
    auto back = read_corpus(path);
    CHECK(back == ordered_corpus(two));
    auto lines = split(read_file(path), '\n');
    CHECK(json::parse(lines[0])["epsilon_label"] == -1);
    // Emitting again gives identical bytes.
    auto first = read_file(path);
    emit_corpus(two, path, {{"oracle", "test"}});
    CHECK(read_file(path) == first);
    CHECK_ERROR_CODE(example_from_json(json{{"text", "x"}, {"epsilon_label", 0}, {"image_id", "i"}}),
                     ErrorCode::kInputParse);
  }

  TEST_CASE("toy world is consistent") {
    auto world = make_toy_world({.n_images = 50, .seed = 11});
    CHECK(world.ground_truth.size() == 50);
    CHECK(world.captions.size() == 50);
    CHECK(world.captions.front().image_id == "toy-00");
    for (const auto& c : world.captions) {
      const auto& gt = world.ground_truth.at(c.image_id);
      CHECK(extracted(c.text) == std::set<std::string>(gt.objects.begin(), gt.objects.end()));
      CHECK(c.text.find('[') == std::string::npos);
    }
    CHECK(world.reference.objects.size() == 12);
    auto again = make_toy_world({.n_images = 50, .seed = 11});
    CHECK(again.detections == world.detections);
  }
}
