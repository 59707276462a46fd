#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "got/dataset.hpp"
#include "got/ecc.hpp"
#include "got/error.hpp"
#include "got/fusion.hpp"
#include "got/gat.hpp"
#include "got/model.hpp"
#include "got/transformer.hpp"

namespace got {

struct PipelineConfig {
  ModelConfig model;
  EccConfig ecc;
  int epochs = 100;
  double lr = 5e-5;
  double weight_decay = 0.01;
  int max_input_length = 512;
  int node_window = 64;  // nodes per marker-sequence window
  int max_gen_len = 48;
  uint64_t seed = 0;
  GateMode gate_mode = GateMode::learned;
  bool shuffle_graph = false;  // ablation arm: keep nodes, re-wire edges at random
  uint64_t shuffle_seed = 0;
};

inline std::string render_choices(const std::vector<std::string>& choices) {
  std::string out;
  for (size_t i = 0; i < choices.size(); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += "( ";
    out.push_back(static_cast<char>('a' + i));
    out += " ) " + choices[i];
  }
  return out;
}

inline std::string answer_sentence(int index) {
  if (index < 0 || index >= 26) throw ConfigError("answer index out of letter range: " + std::to_string(index));
  return std::string("the answer is ( ") + static_cast<char>('a' + index) + " )";
}

inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Same node set, same edge count, random topology. Used by the ablation arm.
inline ThoughtGraph shuffle_edges(const ThoughtGraph& g, uint64_t seed) {
  const int n = g.size();
  if (n < 2) return g;
  ThoughtGraph out;
  out.nodes = g.nodes;
  out.adj = Matrix<uint8_t>(n, n, 0);
  Rng rng(seed);
  std::set<std::pair<int, int>> used;
  for (size_t k = 0; k < g.edges().size(); ++k) {
    for (int tries = 0; tries < 200; ++tries) {
      const int a = rng.uniform_int(0, n - 1);
      const int b = rng.uniform_int(0, n - 1);
      if (a == b) continue;
      const std::pair<int, int> e{std::min(a, b), std::max(a, b)};
      if (used.count(e)) continue;
      used.insert(e);
      out.adj(e.first, e.second) = 1;
      out.adj(e.second, e.first) = 1;
      break;
    }
  }
  return out;
}

namespace detail_pipe {

/// Drops the middle of `ctx` so that protected_len + kept context fits budget.
inline std::vector<int> shrink_middle(const std::vector<int>& ctx, int keep) {
  if (keep <= 0) return {};
  if (static_cast<int>(ctx.size()) <= keep) return ctx;
  const int front = (keep + 1) / 2;
  const int back = keep - front;
  std::vector<int> out(ctx.begin(), ctx.begin() + front);
  out.insert(out.end(), ctx.end() - back, ctx.end());
  return out;
}

}  // namespace detail_pipe

/// Token sequence for the text encoder: question, context, choices, then the
/// rationale when answering. Question, choices and rationale are protected;
/// the context loses its middle first, then the whole tail is clipped.
template <typename T>
std::vector<int> stage_input_ids(const Tokenizer& tok, const Sample<T>& s, Stage stage,
                                 const std::string& rationale_in, int budget) {
  if (budget <= 0) throw ConfigError("max_input_length must be positive");
  const std::vector<int> q = tok.encode(s.question);
  std::vector<int> ctx = tok.encode(s.context);
  const std::vector<int> opts = tok.encode(render_choices(s.choices));
  const std::vector<int> rat =
      stage == Stage::answer ? tok.encode(rationale_in) : std::vector<int>{};
  const int protected_len = static_cast<int>(q.size() + opts.size() + rat.size());
  ctx = detail_pipe::shrink_middle(ctx, budget - protected_len);
  std::vector<int> ids;
  ids.reserve(protected_len + ctx.size());
  ids.insert(ids.end(), q.begin(), q.end());
  ids.insert(ids.end(), ctx.begin(), ctx.end());
  ids.insert(ids.end(), opts.begin(), opts.end());
  ids.insert(ids.end(), rat.begin(), rat.end());
  if (static_cast<int>(ids.size()) > budget) ids.resize(budget);
  if (ids.empty()) throw EmptyInputError("stage input produced no tokens");
  return ids;
}

/// Embeds a token sequence (shared table plus sinusoidal positions) and runs
/// the text encoder.
template <typename T>
ad::Var<T> encode_tokens(ad::Tape<T>& t, const ToyModelVars<T>& v, const ModelConfig& cfg,
                         const std::vector<int>& ids) {
  ad::Var<T> emb = ad::gather_rows(t, v.embed, ids);
  emb = ad::add_const(t, emb, sinusoidal_positions<T>(static_cast<int>(ids.size()), cfg.tf.d_model));
  return ad::encoder_forward(t, emb, v.tf, cfg.tf.n_heads);
}

/// Node features from the tied text encoder: each window is the sequence
/// [<s> node tokens </s>]*, and a node's feature is the hidden row at its <s>
/// marker. The </s> rows are computed but never read.
template <typename T>
ad::Var<T> embed_nodes(ad::Tape<T>& t, const ToyModelVars<T>& v, const ToyModel<T>& m,
                       const std::vector<std::string>& nodes, int node_window, int max_len) {
  if (nodes.empty()) throw EmptyInputError("embed_nodes: no nodes to embed");
  if (node_window < 1) throw ConfigError("node_window must be positive");
  std::vector<ad::Var<T>> windows;
  size_t i = 0;
  while (i < nodes.size()) {
    std::vector<int> ids;
    std::vector<int> marker_rows;
    int in_window = 0;
    while (i < nodes.size() && in_window < node_window) {
      std::vector<int> w = m.tok.encode(nodes[i]);
      if (static_cast<int>(w.size()) > max_len - 2) w.resize(max_len - 2);
      if (!ids.empty() && static_cast<int>(ids.size() + w.size()) + 2 > max_len) break;
      marker_rows.push_back(static_cast<int>(ids.size()));
      ids.push_back(Tokenizer::kNodeOpen);
      ids.insert(ids.end(), w.begin(), w.end());
      ids.push_back(Tokenizer::kNodeClose);
      ++i;
      ++in_window;
    }
    const ad::Var<T> h = encode_tokens(t, v, m.cfg, ids);
    windows.push_back(ad::gather_rows(t, h, marker_rows));
  }
  return windows.size() == 1 ? windows[0] : ad::concat_rows(t, windows);
}

/// Vocabulary lines covering every text field the two stages read or emit,
/// including each canonical answer sentence a sample could require.
template <typename T>
std::vector<std::string> tokenizer_corpus(const std::vector<Sample<T>>& samples) {
  std::vector<std::string> lines;
  for (const auto& s : samples) {
    lines.push_back(s.question);
    if (!s.context.empty()) lines.push_back(s.context);
    lines.push_back(render_choices(s.choices));
    if (!s.rationale.empty()) lines.push_back(s.rationale);
    if (!s.caption.empty()) lines.push_back(s.caption);
    for (size_t i = 0; i < s.choices.size() && i < 26; ++i)
      lines.push_back(answer_sentence(static_cast<int>(i)));
  }
  return lines;
}

template <typename T>
struct StageForward {
  ad::Var<T> memory;  // fused sequence the decoder cross-attends into
  ThoughtGraph graph;
};

/// Runs everything up to the fused memory: text encoding, graph construction
/// and encoding, optional vision projection, cross-modal alignment, gating.
template <typename T>
StageForward<T> build_memory(ad::Tape<T>& t, const ToyModelVars<T>& v, const ToyModel<T>& m,
                             const PipelineConfig& cfg, const Sample<T>& s, Stage stage,
                             const std::string& rationale_in,
                             std::vector<AttentionRecord<T>>* records = nullptr) {
  const std::vector<int> ids = stage_input_ids(m.tok, s, stage, rationale_in, cfg.max_input_length);
  const ad::Var<T> h_t = encode_tokens(t, v, m.cfg, ids);

  std::string graph_text;
  detail_ecc::append_segment(graph_text, s.question);
  detail_ecc::append_segment(graph_text, s.context);
  detail_ecc::append_segment(graph_text, render_choices(s.choices));
  std::optional<std::string> rat;
  if (stage == Stage::answer) rat = rationale_in;
  std::optional<std::string> cap;
  if (!s.caption.empty()) cap = s.caption;
  ThoughtGraph graph = construct_got(graph_text, stage, rat, cap, cfg.ecc);
  if (cfg.shuffle_graph) graph = shuffle_edges(graph, cfg.shuffle_seed ^ fnv1a(s.id));

  const int d = m.cfg.tf.d_model;
  const ad::Var<T> node_emb =
      graph.empty() ? t.leaf(Matrix<T>(0, d), "nodes.empty")
                    : embed_nodes(t, v, m, graph.nodes, cfg.node_window, cfg.max_input_length);
  const ad::Var<T> h_g = encode_graph(t, node_emb, graph, v.gat, T{0.2}, records);
  const ad::Var<T> aligned_g = cross_attend(t, h_t, h_g);

  std::optional<ad::Var<T>> aligned_i;
  if (m.cfg.multimodal) {
    Matrix<T> raw = s.image ? *s.image : Matrix<T>(0, m.cfg.vision_dim);
    if (raw.cols() != m.cfg.vision_dim)
      throw DimensionError("image features for sample " + s.id + " are " + raw.shape_str() +
                           ", expected cols " + std::to_string(m.cfg.vision_dim));
    const ad::Var<T> h_i = raw.rows() > 0
                               ? ad::matmul_nt(t, t.leaf(std::move(raw), "image"), v.w_vision)
                               : t.leaf(Matrix<T>(0, d), "h_i.empty");
    aligned_i = cross_attend(t, h_t, h_i);
  }

  StageForward<T> out;
  out.memory = gated_fuse(t, h_t, aligned_g, aligned_i, v.fusion, cfg.gate_mode, graph.empty());
  out.graph = std::move(graph);
  return out;
}

template <typename T = double>
struct GraphEncodeResult {
  Matrix<T> features;  // one row per node, fusion width
  std::vector<AttentionRecord<T>> attention;
};

/// Graph-only forward with self-contained parameters: the vocabulary comes
/// from the node spans and every weight from the given seed, so the same
/// graph and seed always yield the same features and attention.
template <typename T = double>
GraphEncodeResult<T> encode_graph_standalone(const ThoughtGraph& g, const PipelineConfig& cfg,
                                             uint64_t seed) {
  const ToyModel<T> m = init_model<T>(cfg.model, Tokenizer::from_corpus(g.nodes), seed);
  ad::Tape<T> t;
  const ToyModelVars<T> v = leaf_model(t, m);
  GraphEncodeResult<T> out;
  const int d = m.cfg.tf.d_model;
  const ad::Var<T> emb =
      g.empty() ? t.leaf(Matrix<T>(0, d), "nodes.empty")
                : embed_nodes(t, v, m, g.nodes, cfg.node_window, cfg.max_input_length);
  const ad::Var<T> h_g = encode_graph(t, emb, g, v.gat,
                                      static_cast<T>(cfg.model.gat.leaky_slope), &out.attention);
  out.features = t.value(h_g);
  return out;
}

/// Decoder logits over the vocabulary for a (causal) prefix of token ids.
template <typename T>
ad::Var<T> decode_logits(ad::Tape<T>& t, const ToyModelVars<T>& v, const ModelConfig& cfg,
                         const std::vector<int>& dec_in, ad::Var<T> memory) {
  ad::Var<T> y = ad::gather_rows(t, v.embed, dec_in);
  y = ad::add_const(t, y, sinusoidal_positions<T>(static_cast<int>(dec_in.size()), cfg.tf.d_model));
  y = ad::decoder_forward(t, y, memory, v.tf, cfg.tf.n_heads);
  return ad::matmul_nt(t, y, v.w_out);
}

/// Teacher-forced mean cross-entropy for one sample. The answer stage trains
/// against the canonical answer sentence and reads the gold rationale.
template <typename T>
ad::Var<T> stage_loss(ad::Tape<T>& t, const ToyModelVars<T>& v, const ToyModel<T>& m,
                      const PipelineConfig& cfg, const Sample<T>& s, Stage stage) {
  auto fwd = build_memory(t, v, m, cfg, s, stage,
                          stage == Stage::answer ? s.rationale : std::string());
  std::string target;
  if (stage == Stage::rationale) {
    target = s.rationale;
  } else {
    if (s.answer < 0) throw EmptyInputError("sample " + s.id + " has no gold answer to train on");
    target = answer_sentence(s.answer);
  }
  std::vector<int> tgt = m.tok.encode(target);
  if (tgt.empty()) throw EmptyInputError("training target is empty for sample " + s.id);
  if (static_cast<int>(tgt.size()) + 1 > cfg.max_input_length) tgt.resize(cfg.max_input_length - 1);
  std::vector<int> dec_in{Tokenizer::kBos};
  dec_in.insert(dec_in.end(), tgt.begin(), tgt.end());
  std::vector<int> dec_tgt = tgt;
  dec_tgt.push_back(Tokenizer::kEos);
  const ad::Var<T> logits = decode_logits(t, v, m.cfg, dec_in, fwd.memory);
  return ad::cross_entropy_mean(t, logits, dec_tgt);
}

/// Greedy argmax decoding; ties resolve to the lowest token id.
template <typename T>
std::vector<int> greedy_decode(ad::Tape<T>& t, const ToyModelVars<T>& v, const ModelConfig& cfg,
                               ad::Var<T> memory, int max_gen) {
  std::vector<int> out{Tokenizer::kBos};
  for (int step = 0; step < max_gen; ++step) {
    const ad::Var<T> logits = decode_logits(t, v, cfg, out, memory);
    const Matrix<T>& lm = t.value(logits);
    const int last = lm.rows() - 1;
    int best = 0;
    for (int j = 1; j < lm.cols(); ++j)
      if (lm(last, j) > lm(last, best)) best = j;
    if (best == Tokenizer::kEos) break;
    out.push_back(best);
  }
  return out;
}

template <typename T>
struct StageResult {
  std::string text;  // generated rationale or answer sentence
  ThoughtGraph graph;
  std::vector<AttentionRecord<T>> attention;
};

template <typename T>
StageResult<T> run_stage(const ToyModel<T>& m, const PipelineConfig& cfg, const Sample<T>& s,
                         Stage stage, const std::string& rationale_in = "",
                         bool want_attention = false) {
  ad::Tape<T> t;
  const ToyModelVars<T> v = leaf_model(t, m);
  StageResult<T> res;
  auto fwd = build_memory(t, v, m, cfg, s, stage,
                          stage == Stage::answer ? rationale_in : std::string(),
                          want_attention ? &res.attention : nullptr);
  res.graph = fwd.graph;
  const std::vector<int> ids = greedy_decode(t, v, m.cfg, fwd.memory, cfg.max_gen_len);
  res.text = m.tok.decode(ids);
  return res;
}

/// Decoupled weight-decay Adam. lr = 0 leaves parameters bit-identical.
template <typename T = double>
class AdamW {
 public:
  AdamW(T lr, T weight_decay, T beta1 = T{0.9}, T beta2 = T{0.999}, T eps = T{1e-8})
      : lr_(lr), wd_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<Matrix<T>*>& params, const std::vector<const Matrix<T>*>& grads) {
    if (params.size() != grads.size())
      throw DimensionError("optimizer got " + std::to_string(params.size()) + " params vs " +
                           std::to_string(grads.size()) + " grads");
    if (m_.empty()) {
      for (const auto* p : params) {
        m_.emplace_back(p->rows(), p->cols());
        v_.emplace_back(p->rows(), p->cols());
      }
    }
    if (m_.size() != params.size())
      throw DimensionError("optimizer state size changed between steps");
    ++t_;
    const T bc1 = T{1} - std::pow(beta1_, static_cast<T>(t_));
    const T bc2 = T{1} - std::pow(beta2_, static_cast<T>(t_));
    for (size_t k = 0; k < params.size(); ++k) {
      Matrix<T>& w = *params[k];
      const Matrix<T>& g = *grads[k];
      if (!w.same_shape(g))
        throw DimensionError("grad shape " + g.shape_str() + " vs param " + w.shape_str());
      for (size_t i = 0; i < w.size(); ++i) {
        m_[k][i] = beta1_ * m_[k][i] + (T{1} - beta1_) * g[i];
        v_[k][i] = beta2_ * v_[k][i] + (T{1} - beta2_) * g[i] * g[i];
        const T mhat = m_[k][i] / bc1;
        const T vhat = v_[k][i] / bc2;
        w[i] -= lr_ * (mhat / (std::sqrt(vhat) + eps_) + wd_ * w[i]);
      }
    }
  }

 private:
  T lr_, wd_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Matrix<T>> m_, v_;
};

template <typename T = double>
struct TrainReport {
  std::vector<T> epoch_mean_loss;
};

/// One-sample-per-step teacher-forced training, deterministic under the
/// configured seed. A non-finite loss aborts with the offending op named.
template <typename T>
TrainReport<T> train_stage(ToyModel<T>& m, const std::vector<Sample<T>>& samples, Stage stage,
                           const PipelineConfig& cfg) {
  if (samples.empty()) throw EmptyInputError("train_stage: no samples");
  AdamW<T> opt(static_cast<T>(cfg.lr), static_cast<T>(cfg.weight_decay));
  Rng shuffle(cfg.seed ^ 0x9e3779b97f4a7c15ULL);  // distinct stream from weight init
  std::vector<int> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  TrainReport<T> report;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[shuffle.uniform_int(0, i)]);
    T total = T{0};
    for (int idx : order) {
      ad::Tape<T> t;
      const ToyModelVars<T> v = leaf_model(t, m);
      const ad::Var<T> loss = stage_loss(t, v, m, cfg, samples[idx], stage);
      const T lv = t.value(loss)(0, 0);
      if (!std::isfinite(lv)) {
        t.check_finite();  // names the first non-finite forward op if any
        throw NumericError("training diverged: non-finite loss at epoch " +
                           std::to_string(epoch + 1) + ", sample " + samples[idx].id);
      }
      t.backward(loss);
      std::vector<Matrix<T>*> params;
      for_each_param(m, [&](const std::string&, Matrix<T>& w) { params.push_back(&w); });
      std::vector<const Matrix<T>*> grads;
      for (const ad::Var<T> pv : param_vars(v, m.cfg.multimodal)) grads.push_back(&t.grad(pv));
      opt.step(params, grads);
      total += lv;
    }
    report.epoch_mean_loss.push_back(total / static_cast<T>(samples.size()));
  }
  return report;
}

/// Maps generated text to a choice index: the canonical "the answer is ( x )"
/// pattern first, then the first parenthesized letter, then the longest
/// choice-text substring; -1 abstains.
inline int extract_answer(const std::string& generated, const std::vector<std::string>& choices) {
  if (choices.empty()) return -1;
  const int n = std::min<int>(static_cast<int>(choices.size()), 26);
  const std::string text = text::normalize(generated);

  const std::regex canonical(R"(the answer is\s*\(\s*([a-z])\s*\))");
  std::smatch match;
  if (std::regex_search(text, match, canonical)) {
    const int idx = match[1].str()[0] - 'a';
    if (idx < n) return idx;
  }
  const std::regex any_letter(R"(\(\s*([a-z])\s*\))");
  if (std::regex_search(text, match, any_letter)) {
    const int idx = match[1].str()[0] - 'a';
    if (idx < n) return idx;
  }
  int best = -1;
  size_t best_len = 0;
  size_t best_pos = std::string::npos;
  for (int i = 0; i < static_cast<int>(choices.size()); ++i) {
    const std::string c = text::normalize(choices[i]);
    if (c.empty()) continue;
    const size_t pos = text.find(c);
    if (pos == std::string::npos) continue;
    if (c.size() > best_len || (c.size() == best_len && pos < best_pos)) {
      best = i;
      best_len = c.size();
      best_pos = pos;
    }
  }
  return best;
}

/// Batch inference producing prediction rows. The answer stage reads its
/// rationale from `rationales` (keyed by sample id) when given, else the gold.
/// With `attention_out` set, each sample also contributes an attention report
/// entry {"id", "report"} from the same forward pass.
template <typename T>
std::vector<Prediction> infer_stage(const ToyModel<T>& m, const PipelineConfig& cfg,
                                    const std::vector<Sample<T>>& samples, Stage stage,
                                    const std::map<std::string, std::string>* rationales = nullptr,
                                    nlohmann::json* attention_out = nullptr) {
  if (attention_out != nullptr) *attention_out = nlohmann::json::array();
  std::vector<Prediction> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    std::string rin;
    if (stage == Stage::answer) {
      if (rationales) {
        auto it = rationales->find(s.id);
        if (it == rationales->end())
          throw UnknownReferenceError("no rationale provided for sample " + s.id);
        rin = it->second;
      } else {
        rin = s.rationale;
      }
    }
    const StageResult<T> res = run_stage(m, cfg, s, stage, rin, attention_out != nullptr);
    if (attention_out != nullptr) {
      nlohmann::json rec;
      rec["id"] = s.id;
      rec["report"] = attention_report_json(res.graph.nodes, res.attention);
      attention_out->push_back(std::move(rec));
    }
    Prediction p;
    p.id = s.id;
    if (stage == Stage::rationale) {
      p.rationale = res.text;
    } else {
      p.rationale = rin;
      p.answer = res.text;
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace got
