#include "halle/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "halle/error.hpp"

#ifndef HALLE_ASSET_DIR
#define HALLE_ASSET_DIR "assets"
#endif

namespace halle {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<std::string> canonicals(const std::vector<ObjectMention>& mentions) {
  std::vector<std::string> out;
  out.reserve(mentions.size());
  for (const auto& m : mentions) out.push_back(m.canonical);
  return out;
}

}  // namespace

std::filesystem::path default_asset_dir() {
  if (const char* env = std::getenv("HALLE_ASSET_DIR"); env && *env) return env;
  return HALLE_ASSET_DIR;
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::kLexicon ? "lexicon" : "llm";
}

Backend backend_from_name(std::string_view name) {
  if (name == "lexicon") return Backend::kLexicon;
  if (name == "llm") return Backend::kLlm;
  throw Error(ErrorCode::kUsage, "unknown backend '" + std::string(name) + "'");
}

MatchReport evaluate_caption(const Caption& caption, const GroundTruthSet& gt,
                             const EvalResources& resources, const EvalConfig& config) {
  if (!resources.lexicon) throw Error(ErrorCode::kInternal, "evaluation needs a lexicon");
  const bool needs_client =
      config.extractor == Backend::kLlm || config.matcher == Backend::kLlm;
  if (needs_client && !resources.client) {
    throw Error(ErrorCode::kUsage, "llm backend selected without a client");
  }
  if (config.matcher == Backend::kLexicon && !resources.synonyms) {
    throw Error(ErrorCode::kInternal, "lexicon matcher needs a synonym table");
  }
  std::vector<ObjectMention> mentions =
      config.extractor == Backend::kLexicon
          ? extract_lexicon(caption, *resources.lexicon, config.extraction)
          : extract_llm(caption, *resources.client, *resources.lexicon, config.extraction);
  const auto names = canonicals(mentions);
  std::vector<std::string> hallucinated, uncovered;
  if (config.matcher == Backend::kLexicon) {
    hallucinated = match_hallucination(gt, names, *resources.synonyms);
    uncovered = match_coverage(names, gt, *resources.synonyms);
  } else {
    const auto& canon = resources.lexicon->canonicalizer;
    hallucinated = match_llm(gt, names, MatchDirection::kHallucination, *resources.client, canon);
    uncovered = match_llm(gt, names, MatchDirection::kCoverage, *resources.client, canon);
  }
  int units = sentence_units(clean_caption_text(caption), config.extraction);
  return build_report(caption.id, gt, mentions, hallucinated, uncovered, units);
}

EvalRun run_eval(std::vector<Caption> captions,
                 const std::map<std::string, GroundTruthSet>& ground_truth,
                 const EvalResources& resources, const EvalConfig& config) {
  std::stable_sort(captions.begin(), captions.end(),
                   [](const Caption& a, const Caption& b) { return a.id < b.id; });
  for (const auto& c : captions) {
    if (!ground_truth.contains(c.image_id)) {
      throw Error(ErrorCode::kInputParse,
                  "no ground truth for image '" + c.image_id + "' of caption '" + c.id + "'");
    }
  }
  EvalRun run;
  run.reports.resize(captions.size());
  const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(captions.size())));
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  std::size_t failure_index = captions.size();
  auto worker = [&] {
    for (std::size_t i = next++; i < captions.size(); i = next++) {
      try {
        run.reports[i] =
            evaluate_caption(captions[i], ground_truth.at(captions[i].image_id), resources, config);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        // Report the failure of the earliest caption so errors are stable.
        if (i < failure_index) {
          failure_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  run.summary = summarize(captions, run.reports, config.mode, config.metric);
  run.captions = std::move(captions);
  return run;
}

ToyCorpus build_toy_corpus(const ToyWorld& world, const ToyExperimentConfig& config) {
  ToyCorpus corpus;
  DetectionFileOracle oracle(world.detections, Canonicalizer());
  TemplateCaptionGenerator generator(splitmix64(config.seed ^ 0x636f6e74ULL));
  std::vector<TrainingExample> examples;
  for (const auto& caption : world.captions) {
    const auto& gt = world.ground_truth.at(caption.image_id);
    DetectionSplit split = split_objects(gt, oracle);
    if (!split.grounded.empty()) {
      TrainingExample ctx;
      ctx.image_id = caption.image_id;
      ctx.epsilon_label = -1;
      ctx.text = synthesize_contextual(split, generator);
      examples.push_back(std::move(ctx));
    }
    examples.push_back(make_joint_example(caption.text, split, config.strip_indication));
    corpus.splits.emplace(caption.image_id, std::move(split));
  }
  corpus.examples =
      apply_ratio(std::move(examples), config.contextual_parts, config.joint_parts, config.seed);
  return corpus;
}

ToyModel train_toy_model(const std::vector<TrainingExample>& corpus,
                         const ToyExperimentConfig& config) {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& e : corpus) texts.push_back(e.text);
  ToyModel out;
  out.model = ControlledLM::random(Vocabulary::from_texts(texts), config.dim, config.seed);
  auto records = encode_corpus(corpus, out.model.vocab);
  out.base_trace = train_base(out.model, records, config.base);
  out.control_trace = train_control(out.model, records, config.control);
  return out;
}

SampleBatch sample_captions(const ControlledLM& model, double epsilon, int samples, int max_len,
                            std::uint64_t seed, const std::set<std::string>& parametric) {
  SampleBatch batch;
  batch.epsilon = epsilon;
  const int end = model.vocab.end_id();
  for (int i = 0; i < samples; ++i) {
    std::uint64_t sample_seed = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i) + 1));
    auto ids = generate(model, epsilon, max_len, sample_seed);
    for (int id : ids) {
      if (id == end) continue;
      ++batch.tokens;
      if (parametric.contains(model.vocab.token(id))) ++batch.parametric_tokens;
    }
    batch.texts.push_back(toy_detokenize(decode(model.vocab, ids)));
  }
  return batch;
}

std::vector<Caption> samples_as_captions(const SampleBatch& batch, const std::string& image_id) {
  std::vector<Caption> out;
  const std::string prefix = "eps" + format_epsilon(batch.epsilon) + "-";
  const int width = static_cast<int>(std::to_string(batch.texts.size()).size());
  for (std::size_t i = 0; i < batch.texts.size(); ++i) {
    Caption c;
    std::string index = std::to_string(i);
    c.id = prefix + std::string(static_cast<std::size_t>(width) - index.size(), '0') + index;
    c.image_id = image_id;
    c.text = batch.texts[i].empty() ? "." : batch.texts[i];
    try {
      parse_brackets(c.text);
    } catch (const Error&) {
      // Sampled markup can be unbalanced; such captions carry no indication.
      c.indicated_markup = false;
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::string format_epsilon(double epsilon) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.2f", epsilon);
  return buf;
}

}  // namespace halle
