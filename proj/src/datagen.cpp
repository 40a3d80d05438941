#include "halle/datagen.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "halle/error.hpp"
#include "halle/extraction.hpp"
#include "halle/llm_client.hpp"
#include "halle/text.hpp"

namespace halle {
namespace {

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view key) {
  return splitmix64(seed ^ fnv1a(key));
}

std::string normalize(std::string_view phrase) {
  std::vector<std::string> words;
  const std::string folded = fold_case(phrase);
  for (const auto& t : tokenize_words(folded)) words.emplace_back(t.text);
  return join(words, " ");
}

}  // namespace

DetectionFileOracle::DetectionFileOracle(const json& document,
                                         const Canonicalizer& canonicalizer)
    : digest_(sha256_hex(document.dump())) {
  if (!document.is_object()) {
    throw Error(ErrorCode::kInputParse, "detection file must be a JSON object");
  }
  for (const auto& [image_id, entry] : document.items()) {
    auto& verdicts = verdicts_[image_id];
    try {
      for (const auto& name : entry.value("grounded", json::array())) {
        verdicts[canonicalizer.canonicalize(name.get<std::string>())] = true;
      }
      for (const auto& name : entry.value("omitted", json::array())) {
        verdicts[canonicalizer.canonicalize(name.get<std::string>())] = false;
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInputParse,
                  "bad detection entry '" + image_id + "': " + e.what());
    }
  }
}

DetectionFileOracle DetectionFileOracle::load(const std::filesystem::path& path,
                                              const Canonicalizer& canonicalizer) {
  return DetectionFileOracle(read_json_file(path), canonicalizer);
}

std::optional<bool> DetectionFileOracle::visible(const std::string& image_id,
                                                 const std::string& object) const {
  auto image = verdicts_.find(image_id);
  if (image == verdicts_.end()) return std::nullopt;
  auto it = image->second.find(object);
  if (it == image->second.end()) return std::nullopt;
  return it->second;
}

json DetectionFileOracle::describe() const {
  return {{"oracle", "detection-file"}, {"sha256", digest_}};
}

SeededRandomOracle::SeededRandomOracle(double p_visible, std::uint64_t seed)
    : p_visible_(p_visible), seed_(seed) {
  if (!(p_visible >= 0.0 && p_visible <= 1.0)) {
    throw Error(ErrorCode::kUsage, "visibility probability must lie in [0, 1]");
  }
}

std::optional<bool> SeededRandomOracle::visible(const std::string& image_id,
                                                const std::string& object) const {
  std::uint64_t bits = mix_seed(seed_, image_id + '\x1f' + object);
  return unit_interval(bits) < p_visible_;
}

json SeededRandomOracle::describe() const {
  return {{"oracle", "seeded-random"}, {"p_visible", p_visible_}, {"seed", seed_}};
}

json ConstantOracle::describe() const {
  return {{"oracle", all_visible_ ? "all-visible" : "none-visible"}};
}

DetectionSplit split_objects(const GroundTruthSet& gt, const VisibilityOracle& oracle) {
  DetectionSplit split;
  split.image_id = gt.image_id;
  for (const auto& object : gt.objects) {
    auto verdict = oracle.visible(gt.image_id, object);
    if (!verdict) {
      throw Error(ErrorCode::kOracleMiss, "no visibility verdict for '" + object +
                                              "' in image " + gt.image_id);
    }
    (*verdict ? split.grounded : split.omitted).push_back(object);
  }
  return split;
}

json splits_to_json(const std::vector<DetectionSplit>& splits) {
  json out = json::object();
  for (const auto& s : splits) {
    out[s.image_id] = {{"grounded", s.grounded}, {"omitted", s.omitted}};
  }
  return out;
}

std::map<std::string, DetectionSplit> splits_from_json(const json& document) {
  std::map<std::string, DetectionSplit> out;
  if (!document.is_object()) {
    throw Error(ErrorCode::kInputParse, "split file must be a JSON object");
  }
  for (const auto& [image_id, entry] : document.items()) {
    try {
      DetectionSplit s;
      s.image_id = image_id;
      s.grounded = entry.at("grounded").get<std::vector<std::string>>();
      s.omitted = entry.at("omitted").get<std::vector<std::string>>();
      out.emplace(image_id, std::move(s));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInputParse,
                  "bad split entry '" + image_id + "': " + e.what());
    }
  }
  return out;
}

std::string annotate_brackets(std::string_view text,
                              const std::vector<std::string>& omitted,
                              const std::vector<std::string>& protect,
                              const Singularizer& singularizer) {
  if (text.find_first_of("[]") != std::string_view::npos) {
    throw Error(ErrorCode::kAlreadyAnnotated, "caption already holds bracket markup");
  }
  std::set<std::string, std::less<>> targets;
  std::set<std::string, std::less<>> shields;
  std::size_t max_words = 1;
  auto width = [](const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), ' ')) + 1;
  };
  for (const auto& o : omitted) {
    std::string n = normalize(o);
    if (n.empty()) continue;
    targets.insert(n);
    max_words = std::max(max_words, width(n));
  }
  for (const auto& p : protect) {
    std::string n = normalize(p);
    if (n.empty() || targets.contains(n)) continue;
    shields.insert(n);
    max_words = std::max(max_words, width(n));
  }
  if (targets.empty()) return std::string(text);

  const std::string folded = fold_case(text);
  const auto tokens = tokenize_words(folded);
  std::vector<Span> wraps;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t advance = 1;
    for (std::size_t len = std::min(max_words, tokens.size() - i); len >= 1; --len) {
      const std::size_t last = i + len - 1;
      std::string prefix;
      for (std::size_t k = i; k < last; ++k) {
        prefix += tokens[k].text;
        prefix += ' ';
      }
      bool hit = false;
      for (const auto& form : singularizer.candidates(tokens[last].text)) {
        std::string phrase = prefix + form;
        if (targets.contains(phrase)) {
          wraps.push_back({tokens[i].span.start, tokens[last].span.end});
          hit = true;
          break;
        }
        if (shields.contains(phrase)) {
          hit = true;
          break;
        }
      }
      if (hit) {
        advance = len;
        break;
      }
    }
    i += advance;
  }

  std::string out;
  out.reserve(text.size() + 2 * wraps.size());
  std::size_t pos = 0;
  for (const auto& w : wraps) {
    out.append(text.substr(pos, w.start - pos));
    out.push_back('[');
    out.append(text.substr(w.start, w.size()));
    out.push_back(']');
    pos = w.end;
  }
  out.append(text.substr(pos));
  return out;
}

namespace {

std::string article_for(const std::string& noun, bool capital) {
  bool vowel = !noun.empty() && std::string_view("aeiou").find(noun[0]) != std::string_view::npos;
  if (capital) return vowel ? "An" : "A";
  return vowel ? "an" : "a";
}

struct Pattern {
  int slots;
  // Pieces around the object slots; slot i sits between pieces[i] and pieces[i+1].
  std::vector<std::string> pieces;
  bool leading_article_capital;
};

const std::vector<Pattern>& pattern_bank() {
  static const std::vector<Pattern> bank = {
      {1, {"There is ", " in the image."}, false},
      {1, {"", " can be seen in the scene."}, true},
      {1, {"The image shows ", "."}, false},
      {2, {"", " is near ", "."}, true},
      {2, {"There is ", " next to ", "."}, false},
      {2, {"The image shows ", " and ", "."}, false},
  };
  return bank;
}

}  // namespace

std::vector<std::string> TemplateCaptionGenerator::filler_words() {
  std::set<std::string> words{"a", "an"};
  for (const auto& p : pattern_bank()) {
    for (const auto& piece : p.pieces) {
      const std::string folded = fold_case(piece);
      for (const auto& t : tokenize_words(folded)) words.emplace(t.text);
    }
  }
  return {words.begin(), words.end()};
}

std::string TemplateCaptionGenerator::generate(const std::string& image_id,
                                               const std::vector<std::string>& objects) {
  std::mt19937_64 rng(mix_seed(seed_, image_id));
  std::vector<std::string> order = objects;
  std::shuffle(order.begin(), order.end(), rng);
  const auto& bank = pattern_bank();
  std::vector<std::string> sentences;
  std::size_t next = 0;
  while (next < order.size()) {
    const std::size_t remaining = order.size() - next;
    // Pick uniformly among patterns whose slot count fits.
    std::vector<const Pattern*> fitting;
    for (const auto& p : bank) {
      if (static_cast<std::size_t>(p.slots) <= remaining) fitting.push_back(&p);
    }
    const Pattern& p = *fitting[rng() % fitting.size()];
    std::string sentence = p.pieces[0];
    for (int s = 0; s < p.slots; ++s) {
      const std::string& noun = order[next++];
      bool capital = s == 0 && p.leading_article_capital;
      sentence += article_for(noun, capital) + " " + noun;
      sentence += p.pieces[static_cast<std::size_t>(s) + 1];
    }
    sentences.push_back(std::move(sentence));
  }
  return join(sentences, " ");
}

std::string LlmCaptionGenerator::generate(const std::string&,
                                          const std::vector<std::string>& objects) {
  std::string text(trim(client_.complete(make_contextual_request(objects))));
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
    text = text.substr(1, text.size() - 2);
  }
  return text;
}

std::string synthesize_contextual(const DetectionSplit& split, CaptionGenerator& generator,
                                  const Singularizer& singularizer) {
  if (split.grounded.empty()) {
    throw Error(ErrorCode::kPrecondition,
                "image " + split.image_id + " has no grounded objects");
  }
  std::string caption = generator.generate(split.image_id, split.grounded);
  if (caption.find_first_of("[]") != std::string::npos) {
    throw Error(ErrorCode::kLeakedObject,
                "generated caption for " + split.image_id + " holds bracket markup");
  }
  // Any bracket the annotator would place means an omitted object leaked in.
  std::string probe = annotate_brackets(caption, split.omitted, split.grounded, singularizer);
  if (probe != caption) {
    throw Error(ErrorCode::kLeakedObject,
                "generated caption for " + split.image_id + " mentions an omitted object");
  }
  return caption;
}

TrainingExample make_joint_example(const std::string& caption_text,
                                   const DetectionSplit& split, bool strip_indication,
                                   const Singularizer& singularizer) {
  TrainingExample example;
  example.image_id = split.image_id;
  example.epsilon_label = +1;
  example.text = strip_indication
                     ? caption_text
                     : annotate_brackets(caption_text, split.omitted, split.grounded,
                                         singularizer);
  return example;
}

LintReport lint_corpus(const std::vector<TrainingExample>& examples,
                       const std::map<std::string, DetectionSplit>& splits,
                       const Canonicalizer& canonicalizer) {
  LintReport report;
  auto note = [&report](const TrainingExample& e, const std::string& why) {
    if (report.problems.size() < 10) {
      report.problems.push_back(e.image_id + " (" + std::to_string(e.epsilon_label) +
                                "): " + why);
    }
  };
  for (const auto& e : examples) {
    ++report.records;
    if (e.epsilon_label == -1) {
      if (e.text.find_first_of("[]") != std::string::npos) {
        ++report.negative_with_brackets;
        note(e, "brackets in a contextual-only record");
      }
      continue;
    }
    BracketParse parsed;
    try {
      parsed = parse_brackets(e.text);
    } catch (const Error&) {
      ++report.malformed;
      note(e, "malformed brackets");
      continue;
    }
    auto split = splits.find(e.image_id);
    for (const auto& span : parsed.spans) {
      std::string inner = canonicalizer.canonicalize(span.inner);
      if (split == splits.end()) {
        ++report.positive_brackets_not_omitted;
        note(e, "no split for image");
        continue;
      }
      const auto& s = split->second;
      auto has = [&inner, &canonicalizer](const std::vector<std::string>& list) {
        return std::any_of(list.begin(), list.end(), [&](const std::string& o) {
          return canonicalizer.canonicalize(o) == inner;
        });
      };
      if (has(s.grounded)) {
        ++report.positive_brackets_on_grounded;
        note(e, "bracket encloses grounded object '" + inner + "'");
      } else if (!has(s.omitted)) {
        ++report.positive_brackets_not_omitted;
        note(e, "bracket encloses unknown object '" + inner + "'");
      }
    }
  }
  return report;
}

std::vector<TrainingExample> apply_ratio(std::vector<TrainingExample> examples,
                                         int contextual_parts, int joint_parts,
                                         std::uint64_t seed) {
  if (contextual_parts <= 0 || joint_parts <= 0) {
    throw Error(ErrorCode::kUsage, "corpus ratio parts must be positive");
  }
  std::vector<TrainingExample> ctx, joint;
  for (auto& e : examples) (e.epsilon_label < 0 ? ctx : joint).push_back(std::move(e));
  // Largest counts with ctx/joint == contextual_parts/joint_parts that fit.
  const double scale = std::min(static_cast<double>(ctx.size()) / contextual_parts,
                                static_cast<double>(joint.size()) / joint_parts);
  auto keep_ctx = static_cast<std::size_t>(scale * contextual_parts + 1e-9);
  auto keep_joint = static_cast<std::size_t>(scale * joint_parts + 1e-9);
  auto subsample = [seed](std::vector<TrainingExample>& v, std::size_t keep,
                          std::uint64_t salt) {
    std::mt19937_64 rng(splitmix64(seed ^ salt));
    std::shuffle(v.begin(), v.end(), rng);
    v.resize(std::min(keep, v.size()));
  };
  subsample(ctx, keep_ctx, 1);
  subsample(joint, keep_joint, 2);
  std::vector<TrainingExample> out = std::move(ctx);
  out.insert(out.end(), std::make_move_iterator(joint.begin()),
             std::make_move_iterator(joint.end()));
  return ordered_corpus(std::move(out));
}

std::vector<TrainingExample> ordered_corpus(std::vector<TrainingExample> examples) {
  std::stable_sort(examples.begin(), examples.end(),
                   [](const TrainingExample& a, const TrainingExample& b) {
                     if (a.image_id != b.image_id) return a.image_id < b.image_id;
                     return a.epsilon_label < b.epsilon_label;
                   });
  return examples;
}

json example_to_json(const TrainingExample& e) {
  return {{"epsilon_label", e.epsilon_label}, {"text", e.text}, {"image_id", e.image_id}};
}

TrainingExample example_from_json(const json& record) {
  try {
    TrainingExample e;
    e.epsilon_label = record.at("epsilon_label").get<int>();
    e.text = record.at("text").get<std::string>();
    e.image_id = record.at("image_id").is_string() ? record.at("image_id").get<std::string>()
                                                   : record.at("image_id").dump();
    if (e.epsilon_label != -1 && e.epsilon_label != 1) {
      throw Error(ErrorCode::kInputParse, "epsilon_label must be -1 or +1");
    }
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kInputParse, std::string("bad corpus record: ") + ex.what());
  }
}

json corpus_manifest(const std::vector<TrainingExample>& examples, const json& provenance) {
  std::size_t neg = 0, pos = 0;
  std::set<std::string> images;
  for (const auto& e : examples) {
    (e.epsilon_label < 0 ? neg : pos)++;
    images.insert(e.image_id);
  }
  return {{"records", examples.size()},
          {"label_counts", {{"-1", neg}, {"+1", pos}}},
          {"images", images.size()},
          {"provenance", provenance}};
}

json emit_corpus(const std::vector<TrainingExample>& examples,
                 const std::filesystem::path& path, const json& provenance) {
  std::vector<TrainingExample> ordered = ordered_corpus(examples);
  std::vector<json> records;
  records.reserve(ordered.size());
  for (const auto& e : ordered) records.push_back(example_to_json(e));
  std::string body = to_jsonl(records);
  write_file_atomic(path, body);
  json manifest = corpus_manifest(ordered, provenance);
  manifest["corpus_sha256"] = sha256_hex(body);
  std::filesystem::path manifest_path = path;
  manifest_path += ".manifest.json";
  write_file_atomic(manifest_path, manifest.dump(2) + "\n");
  return manifest;
}

std::vector<TrainingExample> read_corpus(const std::filesystem::path& path) {
  std::vector<TrainingExample> out;
  for (const auto& record : read_jsonl_file(path)) out.push_back(example_from_json(record));
  return out;
}

json ground_truth_to_json(const std::map<std::string, GroundTruthSet>& gt) {
  json out = json::object();
  for (const auto& [id, set] : gt) {
    json entry = {{"objects", set.objects}};
    if (!set.counts.empty()) entry["counts"] = set.counts;
    out[id] = entry;
  }
  return out;
}

ToyWorld make_toy_world(const ToyWorldConfig& config) {
  if (config.n_images <= 0 || config.visible_pool.empty() || config.inferable_pool.empty()) {
    throw Error(ErrorCode::kUsage, "toy world needs images and both object pools");
  }
  ToyWorld world;
  std::mt19937_64 rng(splitmix64(config.seed));
  TemplateCaptionGenerator generator(config.seed);
  world.detections = json::object();
  const int width = static_cast<int>(std::to_string(config.n_images).size());
  auto draw = [&rng](const std::vector<std::string>& pool, int lo, int hi) {
    std::vector<std::string> v = pool;
    std::shuffle(v.begin(), v.end(), rng);
    int span = std::max(0, hi - lo);
    int n = lo + static_cast<int>(rng() % static_cast<std::uint64_t>(span + 1));
    v.resize(static_cast<std::size_t>(std::clamp(n, 0, static_cast<int>(v.size()))));
    return v;
  };
  for (int i = 0; i < config.n_images; ++i) {
    std::string index = std::to_string(i);
    std::string image_id = "toy-" + std::string(static_cast<std::size_t>(width) - index.size(), '0') + index;
    auto visible = draw(config.visible_pool, config.min_visible, config.max_visible);
    auto inferable = draw(config.inferable_pool, config.min_inferable, config.max_inferable);
    GroundTruthSet gt;
    gt.image_id = image_id;
    gt.objects = visible;
    gt.objects.insert(gt.objects.end(), inferable.begin(), inferable.end());
    world.detections[image_id] = {{"grounded", visible}, {"omitted", inferable}};
    Caption caption;
    caption.id = image_id;
    caption.image_id = image_id;
    caption.text = generator.generate(image_id, gt.objects);
    world.captions.push_back(std::move(caption));
    world.ground_truth.emplace(image_id, std::move(gt));
  }
  world.reference.image_id = "toy-reference";
  world.reference.objects = config.reference_visible;
  world.reference.objects.insert(world.reference.objects.end(),
                                 config.reference_inferable.begin(),
                                 config.reference_inferable.end());
  return world;
}

}  // namespace halle
