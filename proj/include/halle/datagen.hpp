#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "halle/io.hpp"
#include "halle/lexicon.hpp"
#include "halle/matching.hpp"

namespace halle {

class ChatClient;

struct DetectionSplit {
  std::string image_id;
  std::vector<std::string> grounded;
  std::vector<std::string> omitted;
};

// Stand-in for an open-vocabulary detector: says whether an object of an
// image is visually grounded.
class VisibilityOracle {
 public:
  virtual ~VisibilityOracle() = default;
  // nullopt when the oracle has no verdict for the object.
  virtual std::optional<bool> visible(const std::string& image_id,
                                      const std::string& object) const = 0;
  virtual json describe() const = 0;
};

// Verdicts from a detection file: {image_id: {"grounded": [...], "omitted": [...]}}.
class DetectionFileOracle : public VisibilityOracle {
 public:
  DetectionFileOracle(const json& document, const Canonicalizer& canonicalizer);
  static DetectionFileOracle load(const std::filesystem::path& path,
                                  const Canonicalizer& canonicalizer);

  std::optional<bool> visible(const std::string& image_id,
                              const std::string& object) const override;
  json describe() const override;

 private:
  std::map<std::string, std::map<std::string, bool>> verdicts_;
  std::string digest_;
};

// Each (image, object) pair is visible with probability p, decided by a hash
// of the seed and the pair so the verdict does not depend on call order.
class SeededRandomOracle : public VisibilityOracle {
 public:
  SeededRandomOracle(double p_visible, std::uint64_t seed);

  std::optional<bool> visible(const std::string& image_id,
                              const std::string& object) const override;
  json describe() const override;

 private:
  double p_visible_;
  std::uint64_t seed_;
};

class ConstantOracle : public VisibilityOracle {
 public:
  explicit ConstantOracle(bool all_visible) : all_visible_(all_visible) {}
  std::optional<bool> visible(const std::string&, const std::string&) const override {
    return all_visible_;
  }
  json describe() const override;

 private:
  bool all_visible_;
};

// Throws kOracleMiss when the oracle has no verdict for an object.
DetectionSplit split_objects(const GroundTruthSet& gt, const VisibilityOracle& oracle);

json splits_to_json(const std::vector<DetectionSplit>& splits);
std::map<std::string, DetectionSplit> splits_from_json(const json& document);

// Wraps every word-aligned occurrence of each omitted object in square
// brackets, longest match first, accepting plural forms of the last word.
// Objects listed in `protect` take part in longest matching but are never
// bracketed, so "traffic light" stays whole when only "light" is omitted.
// Throws kAlreadyAnnotated when the text already holds brackets.
std::string annotate_brackets(std::string_view text,
                              const std::vector<std::string>& omitted,
                              const std::vector<std::string>& protect = {},
                              const Singularizer& singularizer = Singularizer::defaults());

class CaptionGenerator {
 public:
  virtual ~CaptionGenerator() = default;
  virtual std::string generate(const std::string& image_id,
                               const std::vector<std::string>& objects) = 0;
};

// Deterministic sentence-pattern captions. Variety comes from an RNG seeded
// by (seed, image_id), so output is independent of generation order.
class TemplateCaptionGenerator : public CaptionGenerator {
 public:
  explicit TemplateCaptionGenerator(std::uint64_t seed) : seed_(seed) {}
  std::string generate(const std::string& image_id,
                       const std::vector<std::string>& objects) override;

  // Every word the patterns may emit besides the objects themselves.
  static std::vector<std::string> filler_words();

 private:
  std::uint64_t seed_;
};

class LlmCaptionGenerator : public CaptionGenerator {
 public:
  explicit LlmCaptionGenerator(ChatClient& client) : client_(client) {}
  std::string generate(const std::string& image_id,
                       const std::vector<std::string>& objects) override;

 private:
  ChatClient& client_;
};

// Caption from grounded objects only. Throws kPrecondition when nothing is
// grounded and kLeakedObject when the caption names an omitted object.
std::string synthesize_contextual(const DetectionSplit& split, CaptionGenerator& generator,
                                  const Singularizer& singularizer = Singularizer::defaults());

struct TrainingExample {
  std::string text;
  int epsilon_label = -1;  // -1 contextual only, +1 parametric joint
  std::string image_id;

  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

// Joint example: the full caption with omitted objects bracketed, or with
// the markup dropped when strip_indication is set.
TrainingExample make_joint_example(const std::string& caption_text,
                                   const DetectionSplit& split,
                                   bool strip_indication = false,
                                   const Singularizer& singularizer = Singularizer::defaults());

struct LintReport {
  std::size_t records = 0;
  std::size_t negative_with_brackets = 0;
  std::size_t positive_brackets_on_grounded = 0;
  std::size_t positive_brackets_not_omitted = 0;
  std::size_t malformed = 0;
  std::vector<std::string> problems;  // first few offending records

  bool clean() const {
    return negative_with_brackets == 0 && positive_brackets_on_grounded == 0 &&
           positive_brackets_not_omitted == 0 && malformed == 0;
  }
};

LintReport lint_corpus(const std::vector<TrainingExample>& examples,
                       const std::map<std::string, DetectionSplit>& splits,
                       const Canonicalizer& canonicalizer = Canonicalizer());

// Keeps every record of the scarcer side and a deterministic subset of the
// other so that contextual:joint approaches the requested ratio.
std::vector<TrainingExample> apply_ratio(std::vector<TrainingExample> examples,
                                         int contextual_parts, int joint_parts,
                                         std::uint64_t seed);

// Sorted by (image_id, epsilon_label), stable within ties.
std::vector<TrainingExample> ordered_corpus(std::vector<TrainingExample> examples);

json example_to_json(const TrainingExample& example);
TrainingExample example_from_json(const json& record);

json corpus_manifest(const std::vector<TrainingExample>& examples,
                     const json& provenance);

// Writes the JSONL corpus and a "<path>.manifest.json" sidecar; returns the
// manifest.
json emit_corpus(const std::vector<TrainingExample>& examples,
                 const std::filesystem::path& path, const json& provenance = json::object());
std::vector<TrainingExample> read_corpus(const std::filesystem::path& path);

// Synthetic world for desk-scale experiments: objects drawn from a pool the
// detector can see and a pool it cannot, with a detection file that encodes
// exactly that split.
struct ToyWorldConfig {
  int n_images = 200;
  std::uint64_t seed = 7;
  int min_visible = 2;
  int max_visible = 4;
  int min_inferable = 1;
  int max_inferable = 2;
  std::vector<std::string> visible_pool = {"tree", "bus",   "car",   "sign",
                                           "bench", "truck", "dog",   "lamp",
                                           "table", "cup",   "boat",  "kite"};
  std::vector<std::string> inferable_pool = {"person", "chair", "cloud", "bird",
                                             "umbrella", "bottle", "clock", "phone"};
  // Objects of each pool that belong to the reference scene used to judge
  // generated toy captions.
  std::vector<std::string> reference_visible = {"tree", "bus",   "car",  "sign",
                                                "bench", "dog",  "table", "cup",
                                                "boat",  "kite"};
  std::vector<std::string> reference_inferable = {"person", "chair"};
};

struct ToyWorld {
  std::map<std::string, GroundTruthSet> ground_truth;
  std::vector<Caption> captions;  // full, bracket-free captions
  json detections;
  GroundTruthSet reference;
};

ToyWorld make_toy_world(const ToyWorldConfig& config);
json ground_truth_to_json(const std::map<std::string, GroundTruthSet>& gt);

}  // namespace halle
