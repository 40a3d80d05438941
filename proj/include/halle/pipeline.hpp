#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "halle/control.hpp"
#include "halle/datagen.hpp"
#include "halle/extraction.hpp"
#include "halle/matching.hpp"
#include "halle/metrics.hpp"

namespace halle {

// Asset root: $HALLE_ASSET_DIR if set, else the directory baked in at build time.
std::filesystem::path default_asset_dir();

enum class Backend { kLexicon, kLlm };
std::string_view backend_name(Backend backend);
Backend backend_from_name(std::string_view name);

struct EvalResources {
  const ObjectLexicon* lexicon = nullptr;
  const SynonymTable* synonyms = nullptr;
  ChatClient* client = nullptr;  // required for llm backends
};

struct EvalConfig {
  Backend extractor = Backend::kLexicon;
  Backend matcher = Backend::kLexicon;
  EvalMode mode = EvalMode::kStandard;
  MetricOptions metric;
  ExtractionOptions extraction;
  int jobs = 1;
};

MatchReport evaluate_caption(const Caption& caption, const GroundTruthSet& gt,
                             const EvalResources& resources, const EvalConfig& config);

struct EvalRun {
  std::vector<Caption> captions;  // sorted by caption id
  std::vector<MatchReport> reports;
  EvalSummary summary;
};

// Throws kInputParse when a caption's image has no ground truth. Output order
// is by caption id whatever the job count.
EvalRun run_eval(std::vector<Caption> captions,
                 const std::map<std::string, GroundTruthSet>& ground_truth,
                 const EvalResources& resources, const EvalConfig& config);

struct ToyExperimentConfig {
  ToyWorldConfig world{.n_images = 1000};
  int dim = 16;
  TrainConfig base{.learning_rate = 2.0, .epochs = 400};
  TrainConfig control{.learning_rate = 0.3, .epochs = 300};
  int contextual_parts = 1;
  int joint_parts = 1;
  bool strip_indication = false;
  int samples = 500;
  int max_len = 40;
  std::uint64_t seed = 7;
};

struct ToyCorpus {
  std::vector<TrainingExample> examples;
  std::map<std::string, DetectionSplit> splits;
};

ToyCorpus build_toy_corpus(const ToyWorld& world, const ToyExperimentConfig& config);

struct ToyModel {
  ControlledLM model;
  TrainTrace base_trace;
  TrainTrace control_trace;
};

ToyModel train_toy_model(const std::vector<TrainingExample>& corpus,
                         const ToyExperimentConfig& config);

struct SampleBatch {
  double epsilon = 0.0;
  std::vector<std::string> texts;
  std::size_t tokens = 0;             // sampled tokens, end tokens excluded
  std::size_t parametric_tokens = 0;  // tokens naming an object of `parametric`

  double parametric_rate() const {
    return tokens == 0 ? 0.0 : static_cast<double>(parametric_tokens) / static_cast<double>(tokens);
  }
};

// Sample i is drawn with its own seed derived from (seed, i).
SampleBatch sample_captions(const ControlledLM& model, double epsilon, int samples, int max_len,
                            std::uint64_t seed, const std::set<std::string>& parametric);

// Generated texts as captions of the reference image, ids ordered by sample.
std::vector<Caption> samples_as_captions(const SampleBatch& batch, const std::string& image_id);

std::string format_epsilon(double epsilon);

}  // namespace halle
