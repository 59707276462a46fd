#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "got/error.hpp"
#include "got/fusion.hpp"
#include "got/gat.hpp"
#include "got/io.hpp"
#include "got/matrix.hpp"
#include "got/tokenizer.hpp"
#include "got/transformer.hpp"

namespace got {

struct ModelConfig {
  TransformerConfig tf;
  GatConfig gat;
  int vision_dim = 32;      // raw image feature width
  bool multimodal = false;  // vision branch wired in
};

inline nlohmann::json model_config_to_json(const ModelConfig& c) {
  return {{"d_model", c.tf.d_model},     {"n_heads", c.tf.n_heads},
          {"n_layers", c.tf.n_layers},   {"ffn_mult", c.tf.ffn_mult},
          {"max_len", c.tf.max_len},     {"gat_heads", c.gat.heads},
          {"gat_head_dim", c.gat.head_dim}, {"gat_out_dim", c.gat.out_dim},
          {"vision_dim", c.vision_dim},  {"multimodal", c.multimodal}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.tf.d_model = j.at("d_model").get<int>();
  c.tf.n_heads = j.at("n_heads").get<int>();
  c.tf.n_layers = j.at("n_layers").get<int>();
  c.tf.ffn_mult = j.at("ffn_mult").get<int>();
  c.tf.max_len = j.at("max_len").get<int>();
  c.gat.heads = j.at("gat_heads").get<int>();
  c.gat.head_dim = j.at("gat_head_dim").get<int>();
  c.gat.out_dim = j.at("gat_out_dim").get<int>();
  c.gat.fusion_dim = c.tf.d_model;
  c.vision_dim = j.at("vision_dim").get<int>();
  c.multimodal = j.at("multimodal").get<bool>();
  return c;
}

/// One stage's complete parameter set: shared token embedding, text
/// encoder-decoder, graph encoder, vision projection, gate, vocabulary head.
template <typename T = double>
struct ToyModel {
  ModelConfig cfg;
  Tokenizer tok;
  Matrix<T> embed;     // V x d, shared by encoder input, node tokens, decoder input
  TransformerWeights<T> tf;
  Matrix<T> w_out;     // V x d vocabulary projection
  Matrix<T> w_vision;  // d x vision_dim; 0x0 unless multimodal
  GatEncoderWeights<T> gat;
  FusionWeights<T> fusion;
};

template <typename T = double>
ToyModel<T> init_model(ModelConfig cfg, Tokenizer tok, uint64_t seed) {
  cfg.gat.fusion_dim = cfg.tf.d_model;  // graph features must land in text width
  Rng rng(seed);
  ToyModel<T> m;
  m.cfg = cfg;
  m.tok = std::move(tok);
  const int d = cfg.tf.d_model;
  const int v = m.tok.size();
  const T s = static_cast<T>(1.0 / std::sqrt(static_cast<double>(d)));
  m.embed = rng.template randn<T>(v, d, s);
  m.tf = init_transformer<T>(cfg.tf, rng);
  m.w_out = rng.template randn<T>(v, d, s);
  if (cfg.multimodal)
    m.w_vision = rng.template randn<T>(
        d, cfg.vision_dim, static_cast<T>(1.0 / std::sqrt(static_cast<double>(cfg.vision_dim))));
  m.gat = init_gat<T>(cfg.gat, d, rng);
  m.fusion = init_fusion<T>(d, cfg.multimodal, rng);
  return m;
}

namespace detail_model {

template <typename T, typename F>
void visit_attention(AttentionWeights<T>& a, const std::string& p, F&& f) {
  f(p + ".wq", a.wq);
  f(p + ".wk", a.wk);
  f(p + ".wv", a.wv);
  f(p + ".wo", a.wo);
}

template <typename T, typename F>
void visit_block(BlockWeights<T>& b, const std::string& p, F&& f) {
  f(p + ".norm_self", b.norm_self);
  visit_attention(b.self_attn, p + ".self", f);
  if (b.norm_cross.rows() > 0) {
    f(p + ".norm_cross", b.norm_cross);
    visit_attention(b.cross_attn, p + ".cross", f);
  }
  f(p + ".norm_ffn", b.norm_ffn);
  f(p + ".ffn_w1", b.ffn_w1);
  f(p + ".ffn_b1", b.ffn_b1);
  f(p + ".ffn_w2", b.ffn_w2);
  f(p + ".ffn_b2", b.ffn_b2);
}

}  // namespace detail_model

/// Visits every trainable matrix exactly once, in a fixed order. param_vars()
/// must enumerate tape leaves in this same order.
template <typename T, typename F>
void for_each_param(ToyModel<T>& m, F&& f) {
  f("embed", m.embed);
  for (size_t i = 0; i < m.tf.enc.size(); ++i)
    detail_model::visit_block(m.tf.enc[i], "enc" + std::to_string(i), f);
  f("enc_norm", m.tf.enc_norm);
  for (size_t i = 0; i < m.tf.dec.size(); ++i)
    detail_model::visit_block(m.tf.dec[i], "dec" + std::to_string(i), f);
  f("dec_norm", m.tf.dec_norm);
  f("w_out", m.w_out);
  if (m.cfg.multimodal) f("w_vision", m.w_vision);
  for (size_t k = 0; k < m.gat.heads.size(); ++k) {
    f("gat.h" + std::to_string(k) + ".W", m.gat.heads[k].W);
    f("gat.h" + std::to_string(k) + ".a", m.gat.heads[k].a);
  }
  f("gat.out.W", m.gat.output.W);
  f("gat.out.a", m.gat.output.a);
  f("gat.ffnn_w", m.gat.ffnn_w);
  f("gat.ffnn_b", m.gat.ffnn_b);
  f("fusion.W_T", m.fusion.W_T);
  f("fusion.W_G", m.fusion.W_G);
  if (m.fusion.multimodal) f("fusion.W_I", m.fusion.W_I);
}

template <typename T = double>
struct ToyModelVars {
  ad::Var<T> embed;
  TransformerVars<T> tf;
  ad::Var<T> w_out;
  ad::Var<T> w_vision;
  GatEncoderVars<T> gat;
  FusionVars<T> fusion;
};

template <typename T>
ToyModelVars<T> leaf_model(ad::Tape<T>& t, const ToyModel<T>& m) {
  ToyModelVars<T> v;
  v.embed = t.leaf(m.embed, "embed");
  v.tf = leaf_transformer(t, m.tf);
  v.w_out = t.leaf(m.w_out, "w_out");
  if (m.cfg.multimodal) v.w_vision = t.leaf(m.w_vision, "w_vision");
  v.gat = leaf_gat(t, m.gat);
  v.fusion = leaf_fusion(t, m.fusion);
  return v;
}

namespace detail_model {

template <typename T>
void push_attention(const AttentionVars<T>& a, std::vector<ad::Var<T>>& out) {
  out.insert(out.end(), {a.wq, a.wk, a.wv, a.wo});
}

template <typename T>
void push_block(const BlockVars<T>& b, std::vector<ad::Var<T>>& out) {
  out.push_back(b.norm_self);
  push_attention(b.self_attn, out);
  if (b.has_cross) {
    out.push_back(b.norm_cross);
    push_attention(b.cross_attn, out);
  }
  out.push_back(b.norm_ffn);
  out.insert(out.end(), {b.ffn_w1, b.ffn_b1, b.ffn_w2, b.ffn_b2});
}

}  // namespace detail_model

/// Leaf handles in for_each_param order; the pairing is what the optimizer
/// relies on to route tape gradients back into model storage.
template <typename T>
std::vector<ad::Var<T>> param_vars(const ToyModelVars<T>& v, bool multimodal) {
  std::vector<ad::Var<T>> out;
  out.push_back(v.embed);
  for (const auto& b : v.tf.enc) detail_model::push_block(b, out);
  out.push_back(v.tf.enc_norm);
  for (const auto& b : v.tf.dec) detail_model::push_block(b, out);
  out.push_back(v.tf.dec_norm);
  out.push_back(v.w_out);
  if (multimodal) out.push_back(v.w_vision);
  for (const auto& h : v.gat.heads) {
    out.push_back(h.W);
    out.push_back(h.a);
  }
  out.push_back(v.gat.output.W);
  out.push_back(v.gat.output.a);
  out.push_back(v.gat.ffnn_w);
  out.push_back(v.gat.ffnn_b);
  out.push_back(v.fusion.W_T);
  out.push_back(v.fusion.W_G);
  if (v.fusion.multimodal) out.push_back(v.fusion.W_I);
  return out;
}

namespace detail_model {

template <typename T>
AttentionVars<T> take_attention(const std::vector<ad::Var<T>>& ls, size_t& k) {
  AttentionVars<T> a;
  a.wq = ls.at(k++);
  a.wk = ls.at(k++);
  a.wv = ls.at(k++);
  a.wo = ls.at(k++);
  return a;
}

template <typename T>
BlockVars<T> take_block(const BlockWeights<T>& shape, const std::vector<ad::Var<T>>& ls, size_t& k) {
  BlockVars<T> b;
  b.norm_self = ls.at(k++);
  b.self_attn = take_attention(ls, k);
  b.has_cross = shape.norm_cross.rows() > 0;
  if (b.has_cross) {
    b.norm_cross = ls.at(k++);
    b.cross_attn = take_attention(ls, k);
  }
  b.norm_ffn = ls.at(k++);
  b.ffn_w1 = ls.at(k++);
  b.ffn_b1 = ls.at(k++);
  b.ffn_w2 = ls.at(k++);
  b.ffn_b2 = ls.at(k++);
  return b;
}

}  // namespace detail_model

/// Rebuilds the structured handle set from a flat leaf list in for_each_param
/// order, so externally-leafed parameters (finite-difference checks) can
/// drive the same forward code.
template <typename T>
ToyModelVars<T> assemble_model_vars(const ToyModel<T>& m, const std::vector<ad::Var<T>>& ls) {
  size_t k = 0;
  ToyModelVars<T> v;
  v.embed = ls.at(k++);
  for (const auto& b : m.tf.enc) v.tf.enc.push_back(detail_model::take_block(b, ls, k));
  v.tf.enc_norm = ls.at(k++);
  for (const auto& b : m.tf.dec) v.tf.dec.push_back(detail_model::take_block(b, ls, k));
  v.tf.dec_norm = ls.at(k++);
  v.w_out = ls.at(k++);
  if (m.cfg.multimodal) v.w_vision = ls.at(k++);
  for (size_t h = 0; h < m.gat.heads.size(); ++h) {
    GatHeadVars<T> hv;
    hv.W = ls.at(k++);
    hv.a = ls.at(k++);
    v.gat.heads.push_back(hv);
  }
  v.gat.output.W = ls.at(k++);
  v.gat.output.a = ls.at(k++);
  v.gat.ffnn_w = ls.at(k++);
  v.gat.ffnn_b = ls.at(k++);
  v.fusion.W_T = ls.at(k++);
  v.fusion.W_G = ls.at(k++);
  v.fusion.multimodal = m.fusion.multimodal;
  if (m.fusion.multimodal) v.fusion.W_I = ls.at(k++);
  if (k != ls.size())
    throw DimensionError("assemble_model_vars: consumed " + std::to_string(k) + " of " +
                         std::to_string(ls.size()) + " leaves");
  return v;
}

template <typename T>
nlohmann::json model_to_json(const ToyModel<T>& m) {
  nlohmann::json j;
  j["format"] = "got-model-v1";
  j["config"] = model_config_to_json(m.cfg);
  j["vocab"] = m.tok.to_json();
  nlohmann::json params = nlohmann::json::object();
  for_each_param(const_cast<ToyModel<T>&>(m), [&](const std::string& name, Matrix<T>& w) {
    params[name] = io::tensor_to_json(w);
  });
  j["params"] = params;
  return j;
}

template <typename T = double>
ToyModel<T> model_from_json(const nlohmann::json& j) {
  if (!j.contains("format") || j["format"] != "got-model-v1")
    throw SchemaError("model json: missing or unknown format tag");
  ModelConfig cfg = model_config_from_json(j.at("config"));
  Tokenizer tok = Tokenizer::from_json(j.at("vocab"));
  ToyModel<T> m = init_model<T>(cfg, std::move(tok), 0);
  const auto& params = j.at("params");
  for_each_param(m, [&](const std::string& name, Matrix<T>& w) {
    if (!params.contains(name)) throw SchemaError("model json: missing parameter \"" + name + "\"");
    Matrix<T> loaded = io::tensor_from_json<T>(params.at(name));
    if (!loaded.same_shape(w))
      throw SchemaError("model json: parameter \"" + name + "\" is " + loaded.shape_str() +
                        ", expected " + w.shape_str());
    w = std::move(loaded);
  });
  return m;
}

template <typename T>
void save_model(const std::string& path, const ToyModel<T>& m) {
  io::write_file(path, model_to_json(m).dump() + "\n");
}

template <typename T = double>
ToyModel<T> load_model(const std::string& path) {
  return model_from_json<T>(nlohmann::json::parse(io::read_file(path)));
}

}  // namespace got
