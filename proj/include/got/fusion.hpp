#pragma once

#include <cmath>
#include <optional>

#include "got/error.hpp"
#include "got/matrix.hpp"
#include "got/tape.hpp"

namespace got {

/// Gate maps, all d x d and bias-free. W_I participates only in multimodal
/// runs.
template <typename T = double>
struct FusionWeights {
  Matrix<T> W_T;
  Matrix<T> W_I;
  Matrix<T> W_G;
  bool multimodal = false;
};

template <typename T = double>
struct FusionVars {
  ad::Var<T> W_T;
  ad::Var<T> W_I;
  ad::Var<T> W_G;
  bool multimodal = false;
};

/// learned: the sigmoid gate as trained. closed: the exact lambda = 0 limit
/// (output is the text stream untouched). open: the exact lambda = 1 limit.
enum class GateMode { learned, closed, open };

inline GateMode gate_mode_from_string(const std::string& s) {
  if (s == "learned") return GateMode::learned;
  if (s == "closed") return GateMode::closed;
  if (s == "open") return GateMode::open;
  throw ConfigError("gate_mode: expected learned|closed|open, got \"" + s + "\"");
}

template <typename T = double>
FusionWeights<T> init_fusion(int d, bool multimodal, Rng& rng) {
  FusionWeights<T> w;
  const T std = static_cast<T>(1.0 / std::sqrt(static_cast<double>(d)));
  w.W_T = rng.template randn<T>(d, d, std);
  w.W_G = rng.template randn<T>(d, d, std);
  if (multimodal) w.W_I = rng.template randn<T>(d, d, std);
  w.multimodal = multimodal;
  return w;
}

template <typename T>
FusionVars<T> leaf_fusion(ad::Tape<T>& t, const FusionWeights<T>& w) {
  FusionVars<T> v;
  v.W_T = t.leaf(w.W_T, "fusion.W_T");
  v.W_G = t.leaf(w.W_G, "fusion.W_G");
  if (w.multimodal) v.W_I = t.leaf(w.W_I, "fusion.W_I");
  v.multimodal = w.multimodal;
  return v;
}

/// Single-head cross attention aligning modality features to text positions:
/// softmax(H_T H_M^t / sqrt(d)) H_M. An empty modality (m = 0) aligns to the
/// all-zero matrix; no scores exist to soften.
template <typename T>
ad::Var<T> cross_attend(ad::Tape<T>& t, ad::Var<T> h_t, ad::Var<T> h_m) {
  // dims copied out: pushing ops below may reallocate the tape's node store
  const int l = t.value(h_t).rows();
  const int d = t.value(h_t).cols();
  const int m = t.value(h_m).rows();
  if (m == 0) return t.leaf(Matrix<T>(l, d), "cross_attend.empty");
  got::detail::require(d == t.value(h_m).cols(),
                       "cross_attend: text " + t.value(h_t).shape_str() + " vs modality " +
                           t.value(h_m).shape_str());
  const T inv_sqrt_d = static_cast<T>(1.0 / std::sqrt(static_cast<double>(d)));
  auto scores = ad::scale(t, ad::matmul_nt(t, h_t, h_m), inv_sqrt_d);
  const Matrix<T> full_mask(l, m, T{1});
  auto attn = ad::row_softmax_masked(t, scores, full_mask);
  return ad::matmul(t, attn, h_m);
}

/// Elementwise sigmoid gate over summed linear maps, then the branch
/// formula: text-only H = (1-lam)*H_T + lam*G; multimodal adds lam*I.
/// An empty graph contributes nothing to the gate preactivation.
template <typename T>
ad::Var<T> gated_fuse(ad::Tape<T>& t, ad::Var<T> h_t, ad::Var<T> aligned_g,
                      std::type_identity_t<std::optional<ad::Var<T>>> aligned_i,
                      const FusionVars<T>& params, GateMode mode = GateMode::learned,
                      bool graph_empty = false) {
  const auto& vt = t.value(h_t);
  got::detail::require(t.value(aligned_g).same_shape(vt),
                       "gated_fuse: aligned graph features " + t.value(aligned_g).shape_str() +
                           " vs text " + vt.shape_str());
  if (params.multimodal && !aligned_i.has_value())
    throw ConfigError("gated_fuse: multimodal parameters but no aligned vision features");
  if (!params.multimodal && aligned_i.has_value())
    throw ConfigError("gated_fuse: vision features supplied to a text-only gate");
  if (aligned_i)
    got::detail::require(t.value(*aligned_i).same_shape(vt),
                         "gated_fuse: aligned vision features " + t.value(*aligned_i).shape_str() +
                             " vs text " + vt.shape_str());

  if (mode == GateMode::closed) return h_t;
  if (mode == GateMode::open) {
    if (params.multimodal) return ad::add(t, *aligned_i, aligned_g);
    return aligned_g;
  }

  auto pre = ad::matmul_nt(t, h_t, params.W_T);
  if (params.multimodal) pre = ad::add(t, pre, ad::matmul_nt(t, *aligned_i, params.W_I));
  if (!graph_empty) pre = ad::add(t, pre, ad::matmul_nt(t, aligned_g, params.W_G));
  auto lam = ad::sigmoid(t, pre);

  auto kept = ad::hadamard(t, ad::one_minus(t, lam), h_t);
  auto graph_part = ad::hadamard(t, lam, aligned_g);
  auto fused = ad::add(t, kept, graph_part);
  if (params.multimodal) fused = ad::add(t, fused, ad::hadamard(t, lam, *aligned_i));
  return fused;
}

}  // namespace got
