// Command-line front end: evaluation, corpus generation, control model
// training and sampling, bound checks and report tables.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "halle/error.hpp"
#include "halle/io.hpp"
#include "halle/pipeline.hpp"

#ifndef HALLE_VERSION
#define HALLE_VERSION "0.0.0"
#endif

using namespace halle;
namespace fs = std::filesystem;

namespace {

// Options shared by every command that may reach the LLM service.
struct LlmOptions {
  bool replay = false;
  std::string cache_dir;
  std::string model;
  std::string prompts_dir;
  int max_parallel = 4;
};

struct AssetOptions {
  std::string lexicon_dir;
  std::string synonyms;
};

class Run {
 public:
  explicit Run(std::string command) : command_(std::move(command)) {}

  void input(const std::string& path) {
    if (path.empty()) return;
    inputs_[path] = sha256_hex(read_file(path));
  }
  json& config() { return config_; }
  json& results() { return results_; }

  // The run manifest goes next to the primary output, or to stderr when the
  // command has no output file.
  void finish(const std::string& output) const {
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_);
    json manifest = {{"command", command_},
                     {"config", config_},
                     {"config_digest", sha256_hex(config_.dump())},
                     {"inputs", inputs_},
                     {"tool_version", HALLE_VERSION},
                     {"wall_clock_seconds", elapsed.count()}};
    if (!results_.is_null()) manifest["results"] = results_;
    if (output.empty()) {
      std::cerr << manifest.dump() << '\n';
    } else {
      write_file_atomic(output + ".run.json", manifest.dump(2) + "\n");
    }
  }

 private:
  std::string command_;
  json config_ = json::object();
  json results_;
  std::map<std::string, std::string> inputs_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_file_atomic(path, content);
  }
}

fs::path assets() { return default_asset_dir(); }

ObjectLexicon load_lexicon(const AssetOptions& a) {
  return ObjectLexicon::load_dir(a.lexicon_dir.empty() ? assets() / "lexicon" : fs::path(a.lexicon_dir));
}

SynonymTable load_synonyms(const AssetOptions& a) {
  return SynonymTable::load(a.synonyms.empty() ? assets() / "synonyms.cfg" : fs::path(a.synonyms));
}

std::unique_ptr<CachingChatClient> make_client(const LlmOptions& o) {
  ClientConfig config = ClientConfig::from_env();
  if (!o.cache_dir.empty()) config.cache_dir = o.cache_dir;
  if (!o.model.empty()) config.model = o.model;
  config.replay = o.replay;
  config.max_parallel = o.max_parallel;
  auto prompts = PromptLibrary::load_dir(o.prompts_dir.empty() ? assets() / "prompts" : fs::path(o.prompts_dir));
  return std::make_unique<CachingChatClient>(std::move(config), std::move(prompts));
}

json llm_config(const LlmOptions& o) {
  // The credential comes from the environment and is never recorded.
  return {{"replay", o.replay}, {"cache_dir", o.cache_dir}, {"model", o.model}, {"prompts", o.prompts_dir}};
}

void add_llm_options(CLI::App* cmd, LlmOptions& o) {
  cmd->add_flag("--replay", o.replay, "Serve LLM calls only from the response cache");
  cmd->add_option("--cache-dir", o.cache_dir, "LLM response cache directory");
  cmd->add_option("--llm-model", o.model, "Model name sent to the chat endpoint");
  cmd->add_option("--prompts", o.prompts_dir, "Prompt template directory");
  cmd->add_option("--llm-parallel", o.max_parallel, "Concurrent LLM requests")->check(CLI::Range(1, 256));
}

void add_asset_options(CLI::App* cmd, AssetOptions& a) {
  cmd->add_option("--lexicon", a.lexicon_dir, "Object lexicon directory");
  cmd->add_option("--synonyms", a.synonyms, "Synonym table file");
}

std::vector<TrainingExample> read_corpora(const std::vector<std::string>& paths, Run& run) {
  std::vector<TrainingExample> out;
  for (const auto& p : paths) {
    run.input(p);
    auto part = read_corpus(p);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::pair<int, int> parse_ratio(const std::string& text) {
  auto colon = text.find(':');
  try {
    if (colon != std::string::npos) {
      std::size_t used_a = 0, used_b = 0;
      int a = std::stoi(text.substr(0, colon), &used_a);
      int b = std::stoi(text.substr(colon + 1), &used_b);
      if (used_a == colon && used_b == text.size() - colon - 1 && a > 0 && b > 0) return {a, b};
    }
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kUsage, "ratio must look like CONTEXTUAL:JOINT with positive parts, got '" + text + "'");
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kUsage, "bad number '" + item + "' in grid");
    }
  }
  if (out.empty()) throw Error(ErrorCode::kUsage, "empty grid");
  return out;
}

void require_epsilon(double eps) {
  if (!(eps >= -1.0 && eps <= 1.0)) {
    throw Error(ErrorCode::kUsage, "epsilon must lie in [-1, 1]");
  }
}

// ---- eval ----

struct EvalOptions {
  std::string captions, ground_truth, out_dir;
  std::string extractor = "lexicon", matcher = "lexicon", mode = "standard";
  bool per_sentence = false;
  bool only_ind_all_units = false;
  bool plain_markup = false;
  int jobs = 1;
  std::string label;
  std::optional<double> control_value;
  AssetOptions assets;
  LlmOptions llm;
};

void cmd_eval(const EvalOptions& o) {
  Run run("eval");
  EvalConfig config;
  config.extractor = backend_from_name(o.extractor);
  config.matcher = backend_from_name(o.matcher);
  config.mode = mode_from_name(o.mode);
  config.extraction.per_sentence = o.per_sentence;
  config.metric.only_indicated_all_units = o.only_ind_all_units;
  config.jobs = o.jobs;
  run.config() = {{"extractor", o.extractor}, {"matcher", o.matcher}, {"mode", o.mode},
                  {"per_sentence", o.per_sentence}, {"only_ind_all_units", o.only_ind_all_units},
                  {"plain_markup", o.plain_markup}, {"lexicon", o.assets.lexicon_dir},
                  {"synonyms", o.assets.synonyms}, {"llm", llm_config(o.llm)}};
  run.input(o.captions);
  run.input(o.ground_truth);

  auto lexicon = load_lexicon(o.assets);
  auto synonyms = load_synonyms(o.assets);
  auto captions = read_captions(o.captions);
  if (o.plain_markup) {
    for (auto& c : captions) c.indicated_markup = false;
  }
  auto gt = read_ground_truth(o.ground_truth, lexicon.canonicalizer);
  std::unique_ptr<CachingChatClient> client;
  if (config.extractor == Backend::kLlm || config.matcher == Backend::kLlm) client = make_client(o.llm);
  EvalResources resources{&lexicon, &synonyms, client.get()};
  EvalRun result = run_eval(std::move(captions), gt, resources, config);
  result.summary.label = o.label;
  result.summary.control_value = o.control_value;

  std::vector<json> reports;
  for (const auto& r : result.reports) reports.push_back(report_to_json(r));
  std::string table = render_markdown_table({result.summary});
  fs::create_directories(o.out_dir);
  fs::path dir(o.out_dir);
  write_file_atomic(dir / "summary.json", summary_to_json(result.summary).dump(2) + "\n");
  write_file_atomic(dir / "reports.jsonl", to_jsonl(reports));
  write_file_atomic(dir / "table.md", table);
  run.results() = {{"n_captions", result.summary.n_captions}, {"n_skipped", result.summary.n_skipped}};
  if (client) run.results()["llm_network_calls"] = client->network_calls();
  run.finish((dir / "summary.json").string());
  std::cout << table;
}

// ---- datagen ----

struct SplitOptions {
  std::string ground_truth, detections, out;
  std::optional<double> p_visible;
  bool all_visible = false, none_visible = false;
  std::uint64_t seed = 7;
};

void cmd_split(const SplitOptions& o) {
  Run run("datagen split");
  run.input(o.ground_truth);
  run.input(o.detections);
  int chosen = (!o.detections.empty()) + o.p_visible.has_value() + o.all_visible + o.none_visible;
  if (chosen != 1) {
    throw Error(ErrorCode::kUsage,
                "choose exactly one of --detections, --p-visible, --all-visible, --none-visible");
  }
  Canonicalizer canon;
  std::unique_ptr<VisibilityOracle> oracle;
  if (!o.detections.empty()) {
    oracle = std::make_unique<DetectionFileOracle>(DetectionFileOracle::load(o.detections, canon));
  } else if (o.p_visible) {
    oracle = std::make_unique<SeededRandomOracle>(*o.p_visible, o.seed);
  } else {
    oracle = std::make_unique<ConstantOracle>(o.all_visible);
  }
  run.config() = {{"oracle", oracle->describe()}};
  std::vector<DetectionSplit> splits;
  for (const auto& [id, gt] : read_ground_truth(o.ground_truth, canon)) {
    splits.push_back(split_objects(gt, *oracle));
  }
  write_file_atomic(o.out, splits_to_json(splits).dump(2) + "\n");
  run.results() = {{"images", splits.size()}};
  run.finish(o.out);
}

struct ContextualOptions {
  std::string splits, out, generator = "template";
  std::uint64_t seed = 7;
  LlmOptions llm;
};

void cmd_contextual(const ContextualOptions& o) {
  Run run("datagen contextual");
  run.input(o.splits);
  run.config() = {{"generator", o.generator}, {"seed", o.seed}};
  std::unique_ptr<CachingChatClient> client;
  std::unique_ptr<CaptionGenerator> generator;
  if (o.generator == "template") {
    generator = std::make_unique<TemplateCaptionGenerator>(o.seed);
  } else if (o.generator == "llm") {
    client = make_client(o.llm);
    generator = std::make_unique<LlmCaptionGenerator>(*client);
    run.config()["llm"] = llm_config(o.llm);
  } else {
    throw Error(ErrorCode::kUsage, "unknown generator '" + o.generator + "'");
  }
  std::vector<TrainingExample> examples;
  std::size_t skipped_empty = 0, rejected = 0;
  for (const auto& [id, split] : splits_from_json(read_json_file(o.splits))) {
    if (split.grounded.empty()) {
      ++skipped_empty;
      continue;
    }
    try {
      examples.push_back({synthesize_contextual(split, *generator), -1, id});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kLeakedObject) throw;
      ++rejected;
    }
  }
  auto manifest = emit_corpus(examples, o.out, {{"kind", "contextual"}, {"generator", o.generator}});
  run.results() = {{"records", examples.size()}, {"skipped_no_grounded", skipped_empty},
                   {"rejected_leaks", rejected}};
  run.finish(o.out);
}

struct JointOptions {
  std::string captions, splits, out;
  bool strip_indication = false;
};

void cmd_joint(const JointOptions& o) {
  Run run("datagen joint");
  run.input(o.captions);
  run.input(o.splits);
  run.config() = {{"strip_indication", o.strip_indication}};
  auto splits = splits_from_json(read_json_file(o.splits));
  std::vector<TrainingExample> examples;
  for (const auto& c : read_captions(o.captions)) {
    auto it = splits.find(c.image_id);
    if (it == splits.end()) {
      throw Error(ErrorCode::kInputParse, "no split for image '" + c.image_id + "'");
    }
    examples.push_back(make_joint_example(c.text, it->second, o.strip_indication));
  }
  emit_corpus(examples, o.out, {{"kind", "joint"}, {"strip_indication", o.strip_indication}});
  run.results() = {{"records", examples.size()}};
  run.finish(o.out);
}

struct MergeOptions {
  std::vector<std::string> inputs;
  std::string out, ratio = "10:23";
  std::uint64_t seed = 7;
};

void cmd_merge(const MergeOptions& o) {
  Run run("datagen merge");
  auto [ctx, joint] = parse_ratio(o.ratio);
  run.config() = {{"ratio", o.ratio}, {"seed", o.seed}};
  auto examples = apply_ratio(read_corpora(o.inputs, run), ctx, joint, o.seed);
  auto manifest = emit_corpus(examples, o.out, {{"kind", "merged"}, {"ratio", o.ratio}, {"seed", o.seed}});
  run.results() = manifest["label_counts"];
  run.finish(o.out);
}

struct LintOptions {
  std::vector<std::string> corpora;
  std::string splits, out;
};

int cmd_lint(const LintOptions& o) {
  Run run("datagen lint");
  run.input(o.splits);
  auto examples = read_corpora(o.corpora, run);
  auto splits = splits_from_json(read_json_file(o.splits));
  auto r = lint_corpus(examples, splits);
  json report = {{"records", r.records},
                 {"negative_with_brackets", r.negative_with_brackets},
                 {"positive_brackets_on_grounded", r.positive_brackets_on_grounded},
                 {"positive_brackets_not_omitted", r.positive_brackets_not_omitted},
                 {"malformed", r.malformed},
                 {"problems", r.problems},
                 {"clean", r.clean()}};
  write_output(o.out, report.dump(2) + "\n");
  run.finish(o.out == "-" ? "" : o.out);
  return r.clean() ? 0 : 3;
}

struct ToyWorldOptions {
  std::string out_dir;
  int images = 200;
  std::uint64_t seed = 7;
};

void cmd_toy_world(const ToyWorldOptions& o) {
  Run run("datagen toy-world");
  if (o.images < 1) throw Error(ErrorCode::kUsage, "--images must be positive");
  ToyWorldConfig config;
  config.n_images = o.images;
  config.seed = o.seed;
  run.config() = {{"images", o.images}, {"seed", o.seed}};
  auto world = make_toy_world(config);
  fs::path dir(o.out_dir);
  fs::create_directories(dir);
  std::vector<json> captions;
  for (const auto& c : world.captions) captions.push_back(caption_to_json(c));
  write_file_atomic(dir / "ground_truth.json", ground_truth_to_json(world.ground_truth).dump(2) + "\n");
  write_file_atomic(dir / "captions.jsonl", to_jsonl(captions));
  write_file_atomic(dir / "detections.json", world.detections.dump(2) + "\n");
  write_file_atomic(dir / "reference.json",
                    ground_truth_to_json({{world.reference.image_id, world.reference}}).dump(2) + "\n");
  json parametric = config.inferable_pool;
  write_file_atomic(dir / "parametric.json", parametric.dump() + "\n");
  run.finish((dir / "ground_truth.json").string());
}

// ---- control model ----

struct TrainOptions {
  std::vector<std::string> corpora;
  std::string model, out;
  int dim = 16;
  double learning_rate = 0;
  int epochs = 0;
  int batch_size = 0;
  double l2 = 0.0;
  std::uint64_t seed = 7;
};

TrainConfig train_config(const TrainOptions& o, const TrainConfig& defaults) {
  TrainConfig c = defaults;
  if (o.learning_rate != 0) c.learning_rate = o.learning_rate;
  if (o.epochs != 0) c.epochs = o.epochs;
  c.batch_size = o.batch_size;
  c.l2 = o.l2;
  c.seed = o.seed;
  c.validate();
  return c;
}

void cmd_train_base(const TrainOptions& o) {
  Run run("train-base");
  ToyExperimentConfig defaults;
  TrainConfig config = train_config(o, defaults.base);
  run.config() = {{"train", config.to_json()}, {"dim", o.dim}};
  auto corpus = read_corpora(o.corpora, run);
  std::vector<std::string> texts;
  for (const auto& e : corpus) texts.push_back(e.text);
  auto model = ControlledLM::random(Vocabulary::from_texts(texts), o.dim, o.seed);
  auto trace = train_base(model, encode_corpus(corpus, model.vocab), config);
  save_checkpoint(model, o.out);
  run.results() = {{"loss_before", trace.loss.front()}, {"loss_after", trace.loss.back()},
                   {"vocab_size", model.vocab_size()}};
  run.finish(o.out);
}

void cmd_train_control(const TrainOptions& o) {
  Run run("train-control");
  ToyExperimentConfig defaults;
  TrainConfig config = train_config(o, defaults.control);
  run.config() = {{"train", config.to_json()}};
  run.input(o.model);
  auto model = load_checkpoint(o.model);
  auto corpus = read_corpora(o.corpora, run);
  auto trace = train_control(model, encode_corpus(corpus, model.vocab), config);
  save_checkpoint(model, o.out);
  run.results() = {{"loss_before", trace.loss.front()}, {"loss_after", trace.loss.back()}};
  run.finish(o.out);
}

struct GenerateOptions {
  std::string model, out, image_id = "toy-reference", parametric;
  double epsilon = 0.0;
  int samples = 500;
  int max_len = 40;
  std::uint64_t seed = 7;
};

void cmd_generate(const GenerateOptions& o) {
  Run run("generate");
  require_epsilon(o.epsilon);
  run.input(o.model);
  run.input(o.parametric);
  run.config() = {{"epsilon", o.epsilon}, {"samples", o.samples}, {"max_len", o.max_len},
                  {"seed", o.seed}, {"image_id", o.image_id}};
  auto model = load_checkpoint(o.model);
  std::set<std::string> parametric;
  if (!o.parametric.empty()) {
    for (const auto& p : read_json_file(o.parametric)) parametric.insert(p.get<std::string>());
  }
  auto batch = sample_captions(model, o.epsilon, o.samples, o.max_len, o.seed, parametric);
  std::vector<json> lines;
  for (const auto& c : samples_as_captions(batch, o.image_id)) {
    json j = caption_to_json(c);
    j["epsilon"] = o.epsilon;
    lines.push_back(j);
  }
  write_file_atomic(o.out, to_jsonl(lines));
  run.results() = {{"tokens", batch.tokens}, {"parametric_tokens", batch.parametric_tokens},
                   {"parametric_rate", batch.parametric_rate()}};
  run.finish(o.out);
}

struct BoundOptions {
  std::string model, out;
  double epsilon = 1.0;
  std::string k_grid = "0,0.25,0.5,0.75,1";
  int length = 3;
  std::uint64_t cap = 1'000'000;
  bool zero_w = false;
};

int cmd_verify_bound(const BoundOptions& o) {
  Run run("verify-bound");
  require_epsilon(o.epsilon);
  run.input(o.model);
  run.config() = {{"epsilon", o.epsilon}, {"k_grid", o.k_grid}, {"length", o.length},
                  {"cap", o.cap}, {"zero_w", o.zero_w}};
  auto model = load_checkpoint(o.model);
  if (o.zero_w) model.W.setZero();
  auto report = verify_bound(model, o.epsilon, parse_grid(o.k_grid), o.length, o.cap);
  if (!o.out.empty()) write_file_atomic(o.out, report.to_json().dump(2) + "\n");
  std::cout << report.render_table();
  run.results() = {{"endpoints_ok", report.endpoints_ok()}};
  run.finish(o.out);
  return report.endpoints_ok() ? 0 : 5;
}

// ---- report ----

struct ReportOptions {
  std::vector<std::string> summaries;
  std::string format = "markdown", out;
};

void cmd_report(const ReportOptions& o) {
  Run run("report");
  run.config() = {{"format", o.format}};
  std::vector<EvalSummary> rows;
  for (const auto& path : o.summaries) {
    run.input(path);
    rows.push_back(summary_from_json(read_json_file(path)));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const EvalSummary& a, const EvalSummary& b) {
    if (a.control_value.has_value() != b.control_value.has_value()) return a.control_value.has_value();
    return a.control_value.value_or(0.0) < b.control_value.value_or(0.0);
  });
  std::string table;
  if (o.format == "markdown") {
    table = render_markdown_table(rows);
  } else if (o.format == "csv") {
    table = render_csv_table(rows);
  } else {
    throw Error(ErrorCode::kUsage, "unknown format '" + o.format + "'");
  }
  write_output(o.out, table);
  run.finish(o.out == "-" ? "" : o.out);
}

// ---- cache ----

struct PrimeOptions {
  std::string requests;
  LlmOptions llm;
};

// Request file: JSONL of {"template", "substitutions", "response"} records.
void cmd_cache_prime(const PrimeOptions& o) {
  Run run("cache prime");
  if (o.llm.cache_dir.empty()) throw Error(ErrorCode::kUsage, "--cache-dir is required");
  run.input(o.requests);
  LlmOptions llm = o.llm;
  llm.replay = true;
  auto client = make_client(llm);
  std::size_t n = 0;
  for (const auto& record : read_jsonl_file(o.requests)) {
    try {
      PromptRequest request;
      request.template_id = template_from_name(record.at("template").get<std::string>());
      request.substitutions = record.at("substitutions").get<std::map<std::string, std::string>>();
      if (record.contains("model")) request.model = record["model"].get<std::string>();
      client->prime(request, record.at("response").get<std::string>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInputParse, std::string("bad cache request record: ") + e.what());
    }
    ++n;
  }
  run.results() = {{"primed", n}};
  run.finish("");
}

void emit_error(ErrorCode code, const std::string& message, int exit_code) {
  json record = {{"error", to_string(code)}, {"message", message}, {"exit_code", exit_code}};
  std::cerr << record.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Caption hallucination evaluation and controlled generation toolkit", "halle"};
  app.set_version_flag("--version", HALLE_VERSION);
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  app.require_subcommand(1);

  int exit_code = 0;

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score captions against ground truth");
  eval_cmd->add_option("--captions", eval.captions, "Caption JSONL")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--ground-truth", eval.ground_truth, "Ground truth JSON")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval.out_dir, "Output directory")->required();
  eval_cmd->add_option("--extractor", eval.extractor, "lexicon or llm");
  eval_cmd->add_option("--matcher", eval.matcher, "lexicon or llm");
  eval_cmd->add_option("--mode", eval.mode, "standard, only-ind, exclude-ind or include-ind");
  eval_cmd->add_flag("--per-sentence", eval.per_sentence, "Count CHAIR_s per sentence");
  eval_cmd->add_flag("--only-ind-all-units", eval.only_ind_all_units,
                     "In only-ind mode count every caption in the CHAIR_s denominator");
  eval_cmd->add_flag("--plain-markup", eval.plain_markup, "Treat brackets as ordinary text");
  eval_cmd->add_option("--jobs", eval.jobs, "Worker threads")->check(CLI::Range(1, 256));
  eval_cmd->add_option("--label", eval.label, "Row label for report tables");
  eval_cmd->add_option("--control-value", eval.control_value, "Control value recorded in the summary");
  add_asset_options(eval_cmd, eval.assets);
  add_llm_options(eval_cmd, eval.llm);
  eval_cmd->callback([&] { cmd_eval(eval); });

  auto* datagen = app.add_subcommand("datagen", "Build the contrastive training corpus");
  datagen->require_subcommand(1);

  SplitOptions split;
  auto* split_cmd = datagen->add_subcommand("split", "Split ground truth into grounded and omitted objects");
  split_cmd->add_option("--ground-truth", split.ground_truth)->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--detections", split.detections, "Detection file oracle")->check(CLI::ExistingFile);
  split_cmd->add_option("--p-visible", split.p_visible, "Seeded random oracle probability");
  split_cmd->add_flag("--all-visible", split.all_visible);
  split_cmd->add_flag("--none-visible", split.none_visible);
  split_cmd->add_option("--seed", split.seed);
  split_cmd->add_option("--out", split.out)->required();
  split_cmd->callback([&] { cmd_split(split); });

  ContextualOptions ctx;
  auto* ctx_cmd = datagen->add_subcommand("contextual", "Captions from grounded objects only (epsilon -1)");
  ctx_cmd->add_option("--splits", ctx.splits)->required()->check(CLI::ExistingFile);
  ctx_cmd->add_option("--generator", ctx.generator, "template or llm");
  ctx_cmd->add_option("--seed", ctx.seed);
  ctx_cmd->add_option("--out", ctx.out)->required();
  add_llm_options(ctx_cmd, ctx.llm);
  ctx_cmd->callback([&] { cmd_contextual(ctx); });

  JointOptions joint;
  auto* joint_cmd = datagen->add_subcommand("joint", "Full captions with omitted objects bracketed (epsilon +1)");
  joint_cmd->add_option("--captions", joint.captions)->required()->check(CLI::ExistingFile);
  joint_cmd->add_option("--splits", joint.splits)->required()->check(CLI::ExistingFile);
  joint_cmd->add_flag("--strip-indication", joint.strip_indication, "Drop the bracket markup");
  joint_cmd->add_option("--out", joint.out)->required();
  joint_cmd->callback([&] { cmd_joint(joint); });

  MergeOptions merge;
  auto* merge_cmd = datagen->add_subcommand("merge", "Combine corpora at a contextual:joint ratio");
  merge_cmd->add_option("--inputs", merge.inputs)->required()->check(CLI::ExistingFile);
  merge_cmd->add_option("--ratio", merge.ratio, "CONTEXTUAL:JOINT");
  merge_cmd->add_option("--seed", merge.seed);
  merge_cmd->add_option("--out", merge.out)->required();
  merge_cmd->callback([&] { cmd_merge(merge); });

  LintOptions lint;
  auto* lint_cmd = datagen->add_subcommand("lint", "Check the label discipline of corpora");
  lint_cmd->add_option("--corpus", lint.corpora)->required()->check(CLI::ExistingFile);
  lint_cmd->add_option("--splits", lint.splits)->required()->check(CLI::ExistingFile);
  lint_cmd->add_option("--out", lint.out, "Report path, stdout by default");
  lint_cmd->callback([&] { exit_code = cmd_lint(lint); });

  ToyWorldOptions toy;
  auto* toy_cmd = datagen->add_subcommand("toy-world", "Write a synthetic world of images and captions");
  toy_cmd->add_option("--images", toy.images);
  toy_cmd->add_option("--seed", toy.seed);
  toy_cmd->add_option("--out-dir", toy.out_dir)->required();
  toy_cmd->callback([&] { cmd_toy_world(toy); });

  TrainOptions base;
  auto* base_cmd = app.add_subcommand("train-base", "Fit E and C of the toy language model");
  base_cmd->add_option("--corpus", base.corpora)->required()->check(CLI::ExistingFile);
  base_cmd->add_option("--dim", base.dim)->check(CLI::Range(2, 1024));
  base_cmd->add_option("--lr", base.learning_rate);
  base_cmd->add_option("--epochs", base.epochs);
  base_cmd->add_option("--batch-size", base.batch_size);
  base_cmd->add_option("--seed", base.seed);
  base_cmd->add_option("--out", base.out)->required();
  base_cmd->callback([&] { cmd_train_base(base); });

  TrainOptions control;
  auto* control_cmd = app.add_subcommand("train-control", "Fit the control matrix W");
  control_cmd->add_option("--model", control.model)->required()->check(CLI::ExistingFile);
  control_cmd->add_option("--corpus", control.corpora)->required()->check(CLI::ExistingFile);
  control_cmd->add_option("--lr", control.learning_rate);
  control_cmd->add_option("--epochs", control.epochs);
  control_cmd->add_option("--batch-size", control.batch_size);
  control_cmd->add_option("--l2", control.l2);
  control_cmd->add_option("--seed", control.seed);
  control_cmd->add_option("--out", control.out)->required();
  control_cmd->callback([&] { cmd_train_control(control); });

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "Sample captions at a control value");
  gen_cmd->add_option("--model", gen.model)->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--epsilon", gen.epsilon)->required();
  gen_cmd->add_option("--samples", gen.samples)->check(CLI::Range(1, 1000000));
  gen_cmd->add_option("--max-len", gen.max_len)->check(CLI::Range(1, 100000));
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--image-id", gen.image_id);
  gen_cmd->add_option("--parametric", gen.parametric, "JSON list of parametric object tokens")
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", gen.out)->required();
  gen_cmd->callback([&] { cmd_generate(gen); });

  BoundOptions bound;
  auto* bound_cmd = app.add_subcommand("verify-bound", "Check the interpolation bound by enumeration");
  bound_cmd->add_option("--model", bound.model)->required()->check(CLI::ExistingFile);
  bound_cmd->add_option("--epsilon", bound.epsilon);
  bound_cmd->add_option("--k-grid", bound.k_grid, "Comma-separated k values");
  bound_cmd->add_option("--length", bound.length, "Sequence length")->check(CLI::Range(1, 64));
  bound_cmd->add_option("--cap", bound.cap, "Largest number of sequences to enumerate");
  bound_cmd->add_flag("--zero-w", bound.zero_w, "Replace W by zero before checking");
  bound_cmd->add_option("--out", bound.out, "BoundReport JSON");
  bound_cmd->callback([&] { exit_code = cmd_verify_bound(bound); });

  ReportOptions report;
  auto* report_cmd = app.add_subcommand("report", "Comparison table of evaluation summaries");
  report_cmd->add_option("--summaries", report.summaries)->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--format", report.format, "markdown or csv");
  report_cmd->add_option("--out", report.out, "Output path, stdout by default");
  report_cmd->callback([&] { cmd_report(report); });

  auto* cache = app.add_subcommand("cache", "LLM response cache maintenance");
  cache->require_subcommand(1);
  PrimeOptions prime;
  auto* prime_cmd = cache->add_subcommand("prime", "Store known responses without network calls");
  prime_cmd->add_option("--requests", prime.requests)->required()->check(CLI::ExistingFile);
  add_llm_options(prime_cmd, prime.llm);
  prime_cmd->callback([&] { cmd_cache_prime(prime); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    emit_error(ErrorCode::kUsage, e.what(), 2);
    return 2;
  } catch (const Error& e) {
    int code = exit_code_for(e.code());
    emit_error(e.code(), e.what(), code);
    return code;
  } catch (const json::exception& e) {
    emit_error(ErrorCode::kInputParse, e.what(), 3);
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    emit_error(ErrorCode::kInputParse, e.what(), 3);
    return 3;
  } catch (const std::exception& e) {
    emit_error(ErrorCode::kInternal, e.what(), 5);
    return 5;
  }
  return exit_code;
}
