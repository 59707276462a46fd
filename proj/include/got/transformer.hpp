#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "got/error.hpp"
#include "got/matrix.hpp"
#include "got/tape.hpp"

namespace got {

struct TransformerConfig {
  int d_model = 64;
  int n_heads = 4;
  int n_layers = 2;
  int ffn_mult = 2;
  int max_len = 512;
};

template <typename T>
struct AttentionWeights {
  Matrix<T> wq, wk, wv, wo;  // each d_model x d_model, applied as x * W^t
};

template <typename T>
struct BlockWeights {
  Matrix<T> norm_self;  // 1 x d rmsnorm gain
  AttentionWeights<T> self_attn;
  Matrix<T> norm_cross;  // decoder blocks only; 0x0 in encoder blocks
  AttentionWeights<T> cross_attn;
  Matrix<T> norm_ffn;
  Matrix<T> ffn_w1, ffn_b1;  // hidden x d, 1 x hidden
  Matrix<T> ffn_w2, ffn_b2;  // d x hidden, 1 x d
};

template <typename T>
struct TransformerWeights {
  std::vector<BlockWeights<T>> enc;
  Matrix<T> enc_norm;  // final 1 x d gain
  std::vector<BlockWeights<T>> dec;
  Matrix<T> dec_norm;
};

template <typename T>
struct AttentionVars {
  ad::Var<T> wq, wk, wv, wo;
};

template <typename T>
struct BlockVars {
  ad::Var<T> norm_self;
  AttentionVars<T> self_attn;
  ad::Var<T> norm_cross;
  AttentionVars<T> cross_attn;
  ad::Var<T> norm_ffn;
  ad::Var<T> ffn_w1, ffn_b1, ffn_w2, ffn_b2;
  bool has_cross = false;
};

template <typename T>
struct TransformerVars {
  std::vector<BlockVars<T>> enc;
  ad::Var<T> enc_norm;
  std::vector<BlockVars<T>> dec;
  ad::Var<T> dec_norm;
};

namespace detail_tf {

template <typename T>
AttentionWeights<T> init_attention(int d, Rng& rng) {
  const T s = T{1} / std::sqrt(static_cast<T>(d));
  return {rng.randn<T>(d, d, s), rng.randn<T>(d, d, s), rng.randn<T>(d, d, s),
          rng.randn<T>(d, d, s)};
}

template <typename T>
BlockWeights<T> init_block(const TransformerConfig& cfg, bool cross, Rng& rng) {
  const int d = cfg.d_model;
  const int h = cfg.ffn_mult * d;
  BlockWeights<T> b;
  b.norm_self = Matrix<T>(1, d, T{1});
  b.self_attn = init_attention<T>(d, rng);
  if (cross) {
    b.norm_cross = Matrix<T>(1, d, T{1});
    b.cross_attn = init_attention<T>(d, rng);
  }
  b.norm_ffn = Matrix<T>(1, d, T{1});
  b.ffn_w1 = rng.randn<T>(h, d, T{1} / std::sqrt(static_cast<T>(d)));
  b.ffn_b1 = Matrix<T>(1, h, T{0});
  b.ffn_w2 = rng.randn<T>(d, h, T{1} / std::sqrt(static_cast<T>(h)));
  b.ffn_b2 = Matrix<T>(1, d, T{0});
  return b;
}

}  // namespace detail_tf

template <typename T>
TransformerWeights<T> init_transformer(const TransformerConfig& cfg, Rng& rng) {
  if (cfg.d_model % cfg.n_heads != 0)
    throw ConfigError("d_model " + std::to_string(cfg.d_model) + " not divisible by n_heads " +
                      std::to_string(cfg.n_heads));
  TransformerWeights<T> w;
  for (int i = 0; i < cfg.n_layers; ++i) w.enc.push_back(detail_tf::init_block<T>(cfg, false, rng));
  w.enc_norm = Matrix<T>(1, cfg.d_model, T{1});
  for (int i = 0; i < cfg.n_layers; ++i) w.dec.push_back(detail_tf::init_block<T>(cfg, true, rng));
  w.dec_norm = Matrix<T>(1, cfg.d_model, T{1});
  return w;
}

template <typename T>
AttentionVars<T> leaf_attention(ad::Tape<T>& t, const AttentionWeights<T>& w, const std::string& p) {
  return {t.leaf(w.wq, p + ".wq"), t.leaf(w.wk, p + ".wk"), t.leaf(w.wv, p + ".wv"),
          t.leaf(w.wo, p + ".wo")};
}

template <typename T>
BlockVars<T> leaf_block(ad::Tape<T>& t, const BlockWeights<T>& b, const std::string& p) {
  BlockVars<T> v;
  v.norm_self = t.leaf(b.norm_self, p + ".norm_self");
  v.self_attn = leaf_attention(t, b.self_attn, p + ".self");
  v.has_cross = b.norm_cross.rows() > 0;
  if (v.has_cross) {
    v.norm_cross = t.leaf(b.norm_cross, p + ".norm_cross");
    v.cross_attn = leaf_attention(t, b.cross_attn, p + ".cross");
  }
  v.norm_ffn = t.leaf(b.norm_ffn, p + ".norm_ffn");
  v.ffn_w1 = t.leaf(b.ffn_w1, p + ".ffn_w1");
  v.ffn_b1 = t.leaf(b.ffn_b1, p + ".ffn_b1");
  v.ffn_w2 = t.leaf(b.ffn_w2, p + ".ffn_w2");
  v.ffn_b2 = t.leaf(b.ffn_b2, p + ".ffn_b2");
  return v;
}

template <typename T>
TransformerVars<T> leaf_transformer(ad::Tape<T>& t, const TransformerWeights<T>& w) {
  TransformerVars<T> v;
  for (size_t i = 0; i < w.enc.size(); ++i)
    v.enc.push_back(leaf_block(t, w.enc[i], "enc" + std::to_string(i)));
  v.enc_norm = t.leaf(w.enc_norm, "enc_norm");
  for (size_t i = 0; i < w.dec.size(); ++i)
    v.dec.push_back(leaf_block(t, w.dec[i], "dec" + std::to_string(i)));
  v.dec_norm = t.leaf(w.dec_norm, "dec_norm");
  return v;
}

/// Sinusoidal position table, rows = positions.
template <typename T>
Matrix<T> sinusoidal_positions(int len, int d) {
  Matrix<T> p(len, d, T{0});
  for (int pos = 0; pos < len; ++pos) {
    for (int i = 0; i < d; i += 2) {
      const T rate = std::pow(T{10000}, -static_cast<T>(i) / static_cast<T>(d));
      p(pos, i) = std::sin(static_cast<T>(pos) * rate);
      if (i + 1 < d) p(pos, i + 1) = std::cos(static_cast<T>(pos) * rate);
    }
  }
  return p;
}

template <typename T>
Matrix<T> full_mask(int rows, int cols) {
  return Matrix<T>(rows, cols, T{1});
}

template <typename T>
Matrix<T> causal_mask(int len) {
  Matrix<T> m(len, len, T{0});
  for (int i = 0; i < len; ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = T{1};
  return m;
}

namespace ad {

/// Multi-head scaled dot-product attention. q_in is lq x d, kv_in is lk x d,
/// mask01 is lq x lk with 1 on attendable pairs.
template <typename T>
Var<T> multihead_attention(Tape<T>& t, Var<T> q_in, Var<T> kv_in, const AttentionVars<T>& w,
                           int n_heads, const Matrix<T>& mask01) {
  const int d = t.value(q_in).cols();
  if (d % n_heads != 0)
    throw DimensionError("attention width " + std::to_string(d) + " not divisible by " +
                         std::to_string(n_heads) + " heads");
  const int dh = d / n_heads;
  const Var<T> q = matmul_nt(t, q_in, w.wq);
  const Var<T> k = matmul_nt(t, kv_in, w.wk);
  const Var<T> v = matmul_nt(t, kv_in, w.wv);
  const T inv_sqrt = T{1} / std::sqrt(static_cast<T>(dh));
  std::vector<Var<T>> heads;
  for (int h = 0; h < n_heads; ++h) {
    const Var<T> qh = slice_cols(t, q, h * dh, (h + 1) * dh);
    const Var<T> kh = slice_cols(t, k, h * dh, (h + 1) * dh);
    const Var<T> vh = slice_cols(t, v, h * dh, (h + 1) * dh);
    const Var<T> scores = scale(t, matmul_nt(t, qh, kh), inv_sqrt);
    const Var<T> alpha = row_softmax_masked(t, scores, mask01);
    heads.push_back(matmul(t, alpha, vh));
  }
  const Var<T> merged = n_heads == 1 ? heads[0] : concat_cols(t, heads);
  return matmul_nt(t, merged, w.wo);
}

template <typename T>
Var<T> ffn_block(Tape<T>& t, Var<T> x, const BlockVars<T>& b) {
  const Var<T> h1 = gelu(t, add_rowvec(t, matmul_nt(t, x, b.ffn_w1), b.ffn_b1));
  return add_rowvec(t, matmul_nt(t, h1, b.ffn_w2), b.ffn_b2);
}

/// Pre-norm residual encoder stack over x (l x d).
template <typename T>
Var<T> encoder_forward(Tape<T>& t, Var<T> x, const TransformerVars<T>& w, int n_heads) {
  const int l = t.value(x).rows();
  const Matrix<T> mask = full_mask<T>(l, l);
  for (const auto& b : w.enc) {
    const Var<T> xn = rmsnorm(t, x, b.norm_self);
    x = add(t, x, multihead_attention(t, xn, xn, b.self_attn, n_heads, mask));
    x = add(t, x, ffn_block(t, rmsnorm(t, x, b.norm_ffn), b));
  }
  return rmsnorm(t, x, w.enc_norm);
}

/// Pre-norm residual decoder stack: causal self-attention over y (ly x d),
/// full cross-attention into memory (lm x d).
template <typename T>
Var<T> decoder_forward(Tape<T>& t, Var<T> y, Var<T> memory, const TransformerVars<T>& w,
                       int n_heads) {
  const int ly = t.value(y).rows();
  const int lm = t.value(memory).rows();
  const Matrix<T> self_mask = causal_mask<T>(ly);
  const Matrix<T> cross_mask = full_mask<T>(ly, lm);
  for (const auto& b : w.dec) {
    const Var<T> yn = rmsnorm(t, y, b.norm_self);
    y = add(t, y, multihead_attention(t, yn, yn, b.self_attn, n_heads, self_mask));
    if (b.has_cross) {
      const Var<T> yc = rmsnorm(t, y, b.norm_cross);
      y = add(t, y, multihead_attention(t, yc, memory, b.cross_attn, n_heads, cross_mask));
    }
    y = add(t, y, ffn_block(t, rmsnorm(t, y, b.norm_ffn), b));
  }
  return rmsnorm(t, y, w.dec_norm);
}

}  // namespace ad

}  // namespace got
