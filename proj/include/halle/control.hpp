#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "halle/datagen.hpp"
#include "halle/io.hpp"

namespace halle {

class Vocabulary {
 public:
  static constexpr std::string_view kOpen = "[";
  static constexpr std::string_view kClose = "]";
  static constexpr std::string_view kEnd = "</s>";

  Vocabulary() : Vocabulary(std::vector<std::string>{}) {}
  // Adds any missing special tokens; rejects duplicates.
  explicit Vocabulary(std::vector<std::string> tokens);
  // Sorted token set of the texts plus the special tokens.
  static Vocabulary from_texts(const std::vector<std::string>& texts);

  int size() const { return static_cast<int>(tokens_.size()); }
  std::optional<int> find(std::string_view token) const;
  // Throws kInputParse for an unknown token.
  int id(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  int open_id() const { return id(kOpen); }
  int close_id() const { return id(kClose); }
  int end_id() const { return id(kEnd); }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int, std::less<>> index_;
};

// Lowercased words; brackets and sentence punctuation become their own tokens.
std::vector<std::string> toy_tokenize(std::string_view text);
// Inverse of toy_tokenize up to case and spacing; drops the end token.
std::string toy_detokenize(const std::vector<std::string>& tokens);

std::vector<int> encode(const Vocabulary& vocab, std::string_view text, bool append_end = true);
std::vector<std::string> decode(const Vocabulary& vocab, const std::vector<int>& ids);

// Linear-logits bigram LM: logits(prev, eps) = C[prev] (E + eps W E).
struct ControlledLM {
  Vocabulary vocab;
  Eigen::MatrixXd E;  // d x |V|
  Eigen::MatrixXd C;  // (|V| + 1) x d, last row is the start context
  Eigen::MatrixXd W;  // d x d
  double epsilon = 0.0;
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(E.rows()); }
  int vocab_size() const { return vocab.size(); }
  int start() const { return vocab.size(); }

  // Gaussian entries of standard deviation `scale`, W = 0.
  static ControlledLM random(Vocabulary vocab, int dim, std::uint64_t seed, double scale = 0.1);
  // Throws kInvalidConfig on shape errors, non-finite entries or |epsilon| > 1.
  void validate() const;
};

Eigen::VectorXd logits(const ControlledLM& model, int prev, double epsilon);
// softmax(logits); prev may be model.start().
Eigen::VectorXd next_token_dist(const ControlledLM& model, int prev, double epsilon);
// Sum of log P(o_t | o_{t-1}, eps), the first token conditioned on the start context.
double sequence_logprob(const ControlledLM& model, const std::vector<int>& tokens,
                        double epsilon);

struct TrainConfig {
  double learning_rate = 0.5;
  int epochs = 300;
  int batch_size = 0;  // 0 means full batch
  std::uint64_t seed = 1;
  double l2 = 0.0;     // penalty on W

  void validate() const;
  json to_json() const;
  static TrainConfig from_json(const json& record);
};

struct EncodedRecord {
  std::vector<int> tokens;  // ends with the end token
  double epsilon = 0.0;
};

// Throws kInputParse when a record holds a token outside the vocabulary.
std::vector<EncodedRecord> encode_corpus(const std::vector<TrainingExample>& corpus,
                                         const Vocabulary& vocab);

struct TrainTrace {
  std::vector<double> loss;  // training loss before the first epoch and after each epoch
};

// Mean per-token negative log-likelihood at eps = 0.
double base_loss(const ControlledLM& model, const std::vector<EncodedRecord>& records);
// Mean per-token NLL with each record scored at its own epsilon, plus l2 ||W||^2.
double control_loss(const ControlledLM& model, const std::vector<EncodedRecord>& records,
                    double l2 = 0.0);
Eigen::MatrixXd control_gradient(const ControlledLM& model,
                                 const std::vector<EncodedRecord>& records, double l2 = 0.0);

// Fits E and C with W held at zero. Throws kDegenerateCorpus when the corpus
// has fewer than two distinct tokens.
TrainTrace train_base(ControlledLM& model, const std::vector<EncodedRecord>& records,
                      const TrainConfig& config);
// Fits W with E and C frozen. Throws kMissingLabelSide unless both a
// negative and a positive epsilon occur.
TrainTrace train_control(ControlledLM& model, const std::vector<EncodedRecord>& records,
                         const TrainConfig& config);

// Ancestral sampling from the start context until the end token or max_len
// tokens. Throws kUsage for epsilon outside [-1, 1] or max_len < 1.
std::vector<int> generate(const ControlledLM& model, double epsilon, int max_len,
                          std::uint64_t seed);

struct BoundPoint {
  double k = 0.0;
  double epsilon = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

struct BoundReport {
  std::vector<BoundPoint> points;
  int sequence_length = 0;
  double sigma_max = 0.0;
  std::string interpretation;

  bool endpoints_ok(double tolerance = 1e-12) const;
  json to_json() const;
  std::string render_table() const;
};

// Exact enumeration of every length-L sequence under P(.|k eps), the base
// model and P(.|eps). Throws kEnumerationTooLarge when |V|^L exceeds the cap.
BoundReport verify_bound(const ControlledLM& model, double epsilon,
                         const std::vector<double>& k_grid, int sequence_length,
                         std::uint64_t enumeration_cap = 1'000'000);

// One JSON header line, then row-major little-endian float64 E, C, W.
void save_checkpoint(const ControlledLM& model, const std::filesystem::path& path);
ControlledLM load_checkpoint(const std::filesystem::path& path);
std::string checkpoint_bytes(const ControlledLM& model);
ControlledLM checkpoint_from_bytes(std::string_view bytes);

}  // namespace halle
