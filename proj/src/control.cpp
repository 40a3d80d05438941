#include "halle/control.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include "halle/error.hpp"
#include "halle/text.hpp"

namespace halle {
namespace {

constexpr std::string_view kPunctuation = ".,!?;:";

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Bigram counts per epsilon value, rows are contexts (start last).
struct Counts {
  std::map<double, Eigen::MatrixXd> by_epsilon;
  double tokens = 0.0;
};

Counts count_bigrams(const ControlledLM& model, const std::vector<EncodedRecord>& records,
                     std::size_t begin, std::size_t end, const std::vector<std::size_t>& order,
                     bool merge_epsilon) {
  Counts counts;
  const int v = model.vocab_size();
  for (std::size_t i = begin; i < end; ++i) {
    const auto& r = records[order.empty() ? i : order[i]];
    double key = merge_epsilon ? 0.0 : r.epsilon;
    auto [it, fresh] = counts.by_epsilon.try_emplace(key);
    if (fresh) it->second = Eigen::MatrixXd::Zero(v + 1, v);
    int prev = model.start();
    for (int t : r.tokens) {
      it->second(prev, t) += 1.0;
      prev = t;
    }
    counts.tokens += static_cast<double>(r.tokens.size());
  }
  return counts;
}

// Loss and the residual G = rowsum(n) * P - n for one epsilon group.
double group_nll(const Eigen::MatrixXd& z, const Eigen::MatrixXd& n, Eigen::MatrixXd* residual) {
  double nll = 0.0;
  if (residual) *residual = Eigen::MatrixXd::Zero(n.rows(), n.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    double total = n.row(r).sum();
    if (total == 0.0) continue;
    double m = z.row(r).maxCoeff();
    Eigen::RowVectorXd shifted = z.row(r).array() - m;
    double lse = std::log(shifted.array().exp().sum());
    Eigen::RowVectorXd logp = shifted.array() - lse;
    nll -= (n.row(r).array() * logp.array()).sum();
    if (residual) residual->row(r) = total * logp.array().exp().matrix() - n.row(r);
  }
  return nll;
}

void check_finite(const Eigen::MatrixXd& m, const char* name) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kInvalidConfig, std::string("non-finite entries in ") + name);
  }
}

std::vector<std::size_t> batch_order(std::size_t n, std::mt19937_64& rng, bool shuffle) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (shuffle) std::shuffle(order.begin(), order.end(), rng);
  return order;
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint64_t get_u64(std::string_view in, std::size_t at) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + b])) << (8 * b);
  }
  return v;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::string_view special : {kOpen, kClose, kEnd}) {
    if (std::find(tokens_.begin(), tokens_.end(), special) == tokens_.end()) {
      tokens_.emplace_back(special);
    }
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw Error(ErrorCode::kInvalidConfig, "empty vocabulary token");
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw Error(ErrorCode::kInvalidConfig, "duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::from_texts(const std::vector<std::string>& texts) {
  std::set<std::string> seen;
  for (const auto& text : texts) {
    for (auto& t : toy_tokenize(text)) seen.insert(std::move(t));
  }
  for (std::string_view special : {kOpen, kClose, kEnd}) seen.erase(std::string(special));
  std::vector<std::string> tokens(seen.begin(), seen.end());
  return Vocabulary(std::move(tokens));
}

std::optional<int> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Vocabulary::id(std::string_view token) const {
  auto found = find(token);
  if (!found) throw Error(ErrorCode::kInputParse, "token '" + std::string(token) + "' not in vocabulary");
  return *found;
}

std::vector<std::string> toy_tokenize(std::string_view text) {
  std::string folded = fold_case(text);
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (char c : folded) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (c == '[' || c == ']' || kPunctuation.find(c) != std::string_view::npos) {
      flush();
      out.emplace_back(1, c);
    } else {
      current.push_back(c);
    }
  }
  flush();
  return out;
}

std::string toy_detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  bool glue = true;
  for (const auto& t : tokens) {
    if (t == Vocabulary::kEnd) continue;
    bool attach_left = t == Vocabulary::kClose ||
                       (t.size() == 1 && kPunctuation.find(t[0]) != std::string_view::npos);
    if (!glue && !attach_left) out.push_back(' ');
    out += t;
    glue = t == Vocabulary::kOpen;
  }
  return out;
}

std::vector<int> encode(const Vocabulary& vocab, std::string_view text, bool append_end) {
  std::vector<int> ids;
  for (const auto& t : toy_tokenize(text)) ids.push_back(vocab.id(t));
  if (append_end) ids.push_back(vocab.end_id());
  return ids;
}

std::vector<std::string> decode(const Vocabulary& vocab, const std::vector<int>& ids) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(vocab.token(id));
  return out;
}

ControlledLM ControlledLM::random(Vocabulary vocab, int dim, std::uint64_t seed, double scale) {
  if (dim < 2) throw Error(ErrorCode::kInvalidConfig, "embedding width must be at least 2");
  ControlledLM m;
  m.vocab = std::move(vocab);
  m.seed = seed;
  const int v = m.vocab.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  m.E.resize(dim, v);
  m.C.resize(v + 1, dim);
  // Fill in a fixed element order so results do not depend on Eigen internals.
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < v; ++c) m.E(r, c) = normal(rng);
  for (int r = 0; r < v + 1; ++r)
    for (int c = 0; c < dim; ++c) m.C(r, c) = normal(rng);
  m.W = Eigen::MatrixXd::Zero(dim, dim);
  return m;
}

void ControlledLM::validate() const {
  const int v = vocab.size();
  if (v < 4) throw Error(ErrorCode::kInvalidConfig, "vocabulary needs at least 4 tokens");
  const int d = dim();
  if (d < 2) throw Error(ErrorCode::kInvalidConfig, "embedding width must be at least 2");
  if (E.cols() != v || C.rows() != v + 1 || C.cols() != d || W.rows() != d || W.cols() != d) {
    throw Error(ErrorCode::kInvalidConfig, "model matrix shapes disagree");
  }
  check_finite(E, "E");
  check_finite(C, "C");
  check_finite(W, "W");
  if (!(std::abs(epsilon) <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "epsilon must lie in [-1, 1]");
  }
}

Eigen::VectorXd logits(const ControlledLM& model, int prev, double epsilon) {
  Eigen::RowVectorXd c = model.C.row(prev);
  Eigen::VectorXd base = (c * model.E).transpose();
  if (epsilon == 0.0) return base;
  Eigen::VectorXd shift = (c * model.W * model.E).transpose();
  return base + epsilon * shift;
}

Eigen::VectorXd next_token_dist(const ControlledLM& model, int prev, double epsilon) {
  Eigen::VectorXd z = logits(model, prev, epsilon);
  Eigen::VectorXd p = (z.array() - z.maxCoeff()).exp().matrix();
  return p / p.sum();
}

double sequence_logprob(const ControlledLM& model, const std::vector<int>& tokens,
                        double epsilon) {
  if (tokens.empty()) throw Error(ErrorCode::kUsage, "sequence must not be empty");
  double total = 0.0;
  int prev = model.start();
  for (int t : tokens) {
    if (t < 0 || t >= model.vocab_size()) throw Error(ErrorCode::kUsage, "token id out of range");
    Eigen::VectorXd z = logits(model, prev, epsilon);
    double m = z.maxCoeff();
    double lse = m + std::log((z.array() - m).exp().sum());
    total += z(t) - lse;
    prev = t;
  }
  return total;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kInvalidConfig, "learning_rate must be positive");
  }
  if (epochs < 1) throw Error(ErrorCode::kInvalidConfig, "epochs must be at least 1");
  if (batch_size < 0) throw Error(ErrorCode::kInvalidConfig, "batch_size must not be negative");
  if (!(l2 >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "l2 must not be negative");
}

json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate}, {"epochs", epochs}, {"batch_size", batch_size},
          {"seed", seed}, {"l2", l2}};
}

TrainConfig TrainConfig::from_json(const json& record) {
  TrainConfig c;
  c.learning_rate = record.value("learning_rate", c.learning_rate);
  c.epochs = record.value("epochs", c.epochs);
  c.batch_size = record.value("batch_size", c.batch_size);
  c.seed = record.value("seed", c.seed);
  c.l2 = record.value("l2", c.l2);
  c.validate();
  return c;
}

std::vector<EncodedRecord> encode_corpus(const std::vector<TrainingExample>& corpus,
                                         const Vocabulary& vocab) {
  std::vector<EncodedRecord> out;
  out.reserve(corpus.size());
  for (const auto& e : corpus) {
    EncodedRecord r;
    try {
      r.tokens = encode(vocab, e.text);
    } catch (const Error& err) {
      throw Error(ErrorCode::kInputParse,
                  "record of image " + e.image_id + ": " + err.what());
    }
    r.epsilon = e.epsilon_label;
    out.push_back(std::move(r));
  }
  return out;
}

double base_loss(const ControlledLM& model, const std::vector<EncodedRecord>& records) {
  Counts counts = count_bigrams(model, records, 0, records.size(), {}, true);
  if (counts.tokens == 0.0) return 0.0;
  Eigen::MatrixXd z = model.C * model.E;
  return group_nll(z, counts.by_epsilon.begin()->second, nullptr) / counts.tokens;
}

namespace {

double control_objective(const ControlledLM& model, const Counts& counts, double l2,
                         Eigen::MatrixXd* grad) {
  Eigen::MatrixXd base = model.C * model.E;
  Eigen::MatrixXd shift = model.C * model.W * model.E;
  double nll = 0.0;
  if (grad) *grad = Eigen::MatrixXd::Zero(model.W.rows(), model.W.cols());
  for (const auto& [eps, n] : counts.by_epsilon) {
    Eigen::MatrixXd z = base + eps * shift;
    Eigen::MatrixXd residual;
    nll += group_nll(z, n, grad ? &residual : nullptr);
    if (grad && eps != 0.0) {
      *grad += eps * (model.C.transpose() * residual * model.E.transpose());
    }
  }
  double loss = counts.tokens > 0.0 ? nll / counts.tokens : 0.0;
  if (grad && counts.tokens > 0.0) *grad /= counts.tokens;
  if (grad) *grad += 2.0 * l2 * model.W;
  return loss + l2 * model.W.squaredNorm();
}

}  // namespace

double control_loss(const ControlledLM& model, const std::vector<EncodedRecord>& records,
                    double l2) {
  Counts counts = count_bigrams(model, records, 0, records.size(), {}, false);
  return control_objective(model, counts, l2, nullptr);
}

Eigen::MatrixXd control_gradient(const ControlledLM& model,
                                 const std::vector<EncodedRecord>& records, double l2) {
  Counts counts = count_bigrams(model, records, 0, records.size(), {}, false);
  Eigen::MatrixXd grad;
  control_objective(model, counts, l2, &grad);
  return grad;
}

TrainTrace train_base(ControlledLM& model, const std::vector<EncodedRecord>& records,
                      const TrainConfig& config) {
  config.validate();
  std::set<int> distinct;
  for (const auto& r : records) {
    for (int t : r.tokens) {
      if (t != model.vocab.end_id()) distinct.insert(t);
    }
  }
  if (distinct.size() < 2) {
    throw Error(ErrorCode::kDegenerateCorpus, "corpus needs at least two distinct tokens");
  }
  model.W.setZero();
  TrainTrace trace;
  trace.loss.push_back(base_loss(model, records));
  std::mt19937_64 rng(config.seed);
  const std::size_t batch =
      config.batch_size == 0 ? records.size() : static_cast<std::size_t>(config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto order = batch_order(records.size(), rng, config.batch_size != 0);
    for (std::size_t begin = 0; begin < records.size(); begin += batch) {
      std::size_t end = std::min(records.size(), begin + batch);
      Counts counts = count_bigrams(model, records, begin, end, order, true);
      Eigen::MatrixXd z = model.C * model.E;
      Eigen::MatrixXd residual;
      group_nll(z, counts.by_epsilon.begin()->second, &residual);
      residual /= counts.tokens;
      Eigen::MatrixXd grad_c = residual * model.E.transpose();
      Eigen::MatrixXd grad_e = model.C.transpose() * residual;
      model.C -= config.learning_rate * grad_c;
      model.E -= config.learning_rate * grad_e;
    }
    trace.loss.push_back(base_loss(model, records));
  }
  check_finite(model.E, "E");
  check_finite(model.C, "C");
  return trace;
}

TrainTrace train_control(ControlledLM& model, const std::vector<EncodedRecord>& records,
                         const TrainConfig& config) {
  config.validate();
  bool negative = false, positive = false;
  for (const auto& r : records) {
    negative |= r.epsilon < 0.0;
    positive |= r.epsilon > 0.0;
  }
  if (!negative || !positive) {
    throw Error(ErrorCode::kMissingLabelSide,
                "control training needs records on both sides of epsilon");
  }
  TrainTrace trace;
  trace.loss.push_back(control_loss(model, records, config.l2));
  std::mt19937_64 rng(config.seed);
  const std::size_t batch =
      config.batch_size == 0 ? records.size() : static_cast<std::size_t>(config.batch_size);
  // Full-batch statistics never change while E and C are frozen.
  std::optional<Counts> full;
  if (config.batch_size == 0) full = count_bigrams(model, records, 0, records.size(), {}, false);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto order = batch_order(records.size(), rng, config.batch_size != 0);
    for (std::size_t begin = 0; begin < records.size(); begin += batch) {
      std::size_t end = std::min(records.size(), begin + batch);
      Eigen::MatrixXd grad;
      if (full) {
        control_objective(model, *full, config.l2, &grad);
      } else {
        Counts counts = count_bigrams(model, records, begin, end, order, false);
        control_objective(model, counts, config.l2, &grad);
      }
      model.W -= config.learning_rate * grad;
    }
    trace.loss.push_back(full ? control_objective(model, *full, config.l2, nullptr)
                              : control_loss(model, records, config.l2));
  }
  check_finite(model.W, "W");
  return trace;
}

std::vector<int> generate(const ControlledLM& model, double epsilon, int max_len,
                          std::uint64_t seed) {
  if (!(std::abs(epsilon) <= 1.0)) throw Error(ErrorCode::kUsage, "epsilon must lie in [-1, 1]");
  if (max_len < 1) throw Error(ErrorCode::kUsage, "max_len must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<int> out;
  int prev = model.start();
  const int end = model.vocab.end_id();
  while (static_cast<int>(out.size()) < max_len) {
    Eigen::VectorXd p = next_token_dist(model, prev, epsilon);
    double u = uniform01(rng);
    int pick = static_cast<int>(p.size()) - 1;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      acc += p(i);
      if (u < acc) {
        pick = static_cast<int>(i);
        break;
      }
    }
    out.push_back(pick);
    if (pick == end) break;
    prev = pick;
  }
  return out;
}

bool BoundReport::endpoints_ok(double tolerance) const {
  for (const auto& p : points) {
    if ((p.k == 0.0 || p.k == 1.0) && !(p.lhs <= tolerance)) return false;
  }
  return true;
}

json BoundReport::to_json() const {
  json pts = json::array();
  for (const auto& p : points) {
    pts.push_back({{"k", p.k}, {"epsilon", p.epsilon}, {"lhs", p.lhs}, {"rhs", p.rhs},
                   {"pass", p.pass}});
  }
  return {{"points", pts},
          {"sequence_length", sequence_length},
          {"sigma_max", sigma_max},
          {"interpretation", interpretation}};
}

std::string BoundReport::render_table() const {
  std::ostringstream out;
  out << "| k | epsilon | LHS (L1) | RHS | pass |\n|---|---|---|---|---|\n";
  char buf[160];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "| %.3f | %.3f | %.6e | %.6e | %s |\n", p.k, p.epsilon, p.lhs,
                  p.rhs, p.pass ? "yes" : "no");
    out << buf;
  }
  out << "\n" << interpretation << "\n";
  return out.str();
}

BoundReport verify_bound(const ControlledLM& model, double epsilon,
                         const std::vector<double>& k_grid, int sequence_length,
                         std::uint64_t enumeration_cap) {
  if (!(std::abs(epsilon) <= 1.0)) throw Error(ErrorCode::kUsage, "epsilon must lie in [-1, 1]");
  if (sequence_length < 1) throw Error(ErrorCode::kUsage, "sequence length must be at least 1");
  const auto v = static_cast<std::uint64_t>(model.vocab_size());
  std::uint64_t total = 1;
  for (int i = 0; i < sequence_length; ++i) {
    if (total > enumeration_cap / v + 1) {
      total = enumeration_cap + 1;
      break;
    }
    total *= v;
  }
  if (total > enumeration_cap) {
    throw Error(ErrorCode::kEnumerationTooLarge,
                "|V|^L exceeds the enumeration cap of " + std::to_string(enumeration_cap));
  }
  for (double k : k_grid) {
    if (!(k >= 0.0 && k <= 1.0)) throw Error(ErrorCode::kUsage, "k must lie in [0, 1]");
  }

  BoundReport report;
  report.sequence_length = sequence_length;
  if (model.W.size() > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(model.W);
    report.sigma_max = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  }
  report.interpretation =
      "lambda_max taken as the largest singular value of W; L taken as the enumerated "
      "sequence length; P(.) is the base model (epsilon = 0); LHS is the L1 distance over "
      "all length-L sequences.";

  const int vs = model.vocab_size();
  // Conditional tables for every context at a given epsilon.
  auto table = [&](double eps) {
    Eigen::MatrixXd t(vs + 1, vs);
    for (int c = 0; c <= vs; ++c) t.row(c) = next_token_dist(model, c, eps).transpose();
    return t;
  };
  auto sequence_probs = [&](const Eigen::MatrixXd& t) {
    std::vector<double> probs{1.0};
    std::vector<int> last{model.start()};
    for (int step = 0; step < sequence_length; ++step) {
      std::vector<double> next_probs;
      std::vector<int> next_last;
      next_probs.reserve(probs.size() * static_cast<std::size_t>(vs));
      next_last.reserve(next_probs.capacity());
      for (std::size_t i = 0; i < probs.size(); ++i) {
        for (int tok = 0; tok < vs; ++tok) {
          next_probs.push_back(probs[i] * t(last[i], tok));
          next_last.push_back(tok);
        }
      }
      probs.swap(next_probs);
      last.swap(next_last);
    }
    return probs;
  };

  const auto base = sequence_probs(table(0.0));
  const auto full = sequence_probs(table(epsilon));
  const double l = static_cast<double>(sequence_length);
  for (double k : k_grid) {
    const auto mixed = sequence_probs(table(k * epsilon));
    double lhs = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      lhs += std::abs((mixed[i] - base[i]) - k * (full[i] - base[i]));
    }
    BoundPoint p;
    p.k = k;
    p.epsilon = epsilon;
    p.lhs = lhs;
    p.rhs = 2.0 * std::abs(k * (1.0 - k)) * epsilon * epsilon * l * l * report.sigma_max *
            std::expm1(report.sigma_max);
    p.pass = p.lhs <= p.rhs + 1e-12;
    report.points.push_back(p);
  }
  return report;
}

std::string checkpoint_bytes(const ControlledLM& model) {
  model.validate();
  json header = {{"format", "halle-controlled-lm"},
                 {"version", 1},
                 {"dim", model.dim()},
                 {"vocab", model.vocab.tokens()},
                 {"seed", model.seed},
                 {"epsilon", model.epsilon}};
  std::string out = header.dump();
  out.push_back('\n');
  auto emit = [&out](const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) put_u64(out, std::bit_cast<std::uint64_t>(m(r, c)));
  };
  emit(model.E);
  emit(model.C);
  emit(model.W);
  return out;
}

ControlledLM checkpoint_from_bytes(std::string_view bytes) {
  auto newline = bytes.find('\n');
  if (newline == std::string_view::npos) {
    throw Error(ErrorCode::kInputParse, "checkpoint header missing");
  }
  json header;
  try {
    header = json::parse(bytes.substr(0, newline));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInputParse, std::string("bad checkpoint header: ") + e.what());
  }
  if (header.value("format", "") != "halle-controlled-lm" || header.value("version", 0) != 1) {
    throw Error(ErrorCode::kSchemaMismatch, "unsupported checkpoint format");
  }
  ControlledLM m;
  try {
    m.vocab = Vocabulary(header.at("vocab").get<std::vector<std::string>>());
    m.seed = header.at("seed").get<std::uint64_t>();
    m.epsilon = header.at("epsilon").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInputParse, std::string("bad checkpoint header: ") + e.what());
  }
  const int d = header.value("dim", 0);
  const int v = m.vocab.size();
  if (d < 2) throw Error(ErrorCode::kInputParse, "bad checkpoint dimension");
  const std::size_t expected =
      8u * (static_cast<std::size_t>(d) * v + static_cast<std::size_t>(v + 1) * d +
            static_cast<std::size_t>(d) * d);
  std::string_view body = bytes.substr(newline + 1);
  if (body.size() != expected) {
    throw Error(ErrorCode::kInputParse, "checkpoint payload has the wrong size");
  }
  std::size_t at = 0;
  auto fill = [&](Eigen::MatrixXd& mat, Eigen::Index rows, Eigen::Index cols) {
    mat.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) {
        mat(r, c) = std::bit_cast<double>(get_u64(body, at));
        at += 8;
      }
  };
  fill(m.E, d, v);
  fill(m.C, v + 1, d);
  fill(m.W, d, d);
  m.validate();
  return m;
}

void save_checkpoint(const ControlledLM& model, const std::filesystem::path& path) {
  write_file_atomic(path, checkpoint_bytes(model));
}

ControlledLM load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_bytes(read_file(path));
}

}  // namespace halle
