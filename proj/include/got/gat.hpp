#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "got/error.hpp"
#include "got/graph.hpp"
#include "got/matrix.hpp"
#include "got/tape.hpp"

namespace got {

/// One attention head: projection W (out_dim x in_dim) and the single-layer
/// attention FFNN weights a (1 x 2*out_dim), no bias.
template <typename T = double>
struct GatHeadWeights {
  Matrix<T> W;
  Matrix<T> a;

  int out_dim() const { return W.rows(); }
};

/// Full graph encoder: K parallel heads, an output attention layer over the
/// concatenated head features, and a final affine map to the fusion width.
template <typename T = double>
struct GatEncoderWeights {
  std::vector<GatHeadWeights<T>> heads;
  GatHeadWeights<T> output;
  Matrix<T> ffnn_w;  // fusion_dim x output.out_dim
  Matrix<T> ffnn_b;  // 1 x fusion_dim

  int fusion_dim() const { return ffnn_w.rows(); }
};

struct GatConfig {
  int heads = 4;
  int head_dim = 16;   // per-head width D'
  int out_dim = 64;    // output attention layer width
  int fusion_dim = 64; // H^G column count d
  double leaky_slope = 0.2;
};

template <typename T = double>
GatEncoderWeights<T> init_gat(const GatConfig& cfg, int node_dim, Rng& rng) {
  GatEncoderWeights<T> w;
  const T w_std = static_cast<T>(1.0 / std::sqrt(static_cast<double>(node_dim)));
  const T a_std = static_cast<T>(1.0 / std::sqrt(static_cast<double>(cfg.head_dim)));
  for (int k = 0; k < cfg.heads; ++k) {
    GatHeadWeights<T> h;
    h.W = rng.template randn<T>(cfg.head_dim, node_dim, w_std);
    h.a = rng.template randn<T>(1, 2 * cfg.head_dim, a_std);
    w.heads.push_back(std::move(h));
  }
  const int concat_dim = cfg.heads * cfg.head_dim;
  w.output.W = rng.template randn<T>(cfg.out_dim, concat_dim,
                                     static_cast<T>(1.0 / std::sqrt(static_cast<double>(concat_dim))));
  w.output.a = rng.template randn<T>(1, 2 * cfg.out_dim,
                                     static_cast<T>(1.0 / std::sqrt(static_cast<double>(cfg.out_dim))));
  w.ffnn_w = rng.template randn<T>(cfg.fusion_dim, cfg.out_dim,
                                   static_cast<T>(1.0 / std::sqrt(static_cast<double>(cfg.out_dim))));
  w.ffnn_b = Matrix<T>(1, cfg.fusion_dim);
  return w;
}

/// Neighbor sets K_i from the stored adjacency, with the self-loop injected.
/// This is the only place self-loops enter the system.
inline std::vector<std::vector<int>> neighbor_lists(const ThoughtGraph& g) {
  std::vector<std::vector<int>> nb(g.size());
  for (int i = 0; i < g.size(); ++i) {
    for (int j = 0; j < g.size(); ++j)
      if (j == i || g.adj(i, j)) nb[i].push_back(j);
  }
  return nb;
}

/// Post-softmax weights and raw pre-activation scores for one attention
/// layer, both dense with zeros off-neighborhood; feeds the report export.
template <typename T = double>
struct AttentionRecord {
  Matrix<T> alpha;
  Matrix<T> scores;
};

namespace ad {

/// Fused neighbor-list attention: for each node i and neighbor j,
/// e_ij = src_i + dst_j, q_ij = LeakyReLU(e_ij), alpha_i = softmax_{K_i}(q_i),
/// out_i = sum_j alpha_ij Wh_j. Iterates neighbor lists only; never
/// materializes the n x n score matrix.
template <typename T>
Var<T> gat_attend(Tape<T>& t, Var<T> wh, Var<T> src, Var<T> dst,
                  const std::vector<std::vector<int>>& nb, T slope,
                  AttentionRecord<T>* record = nullptr) {
  const auto& vwh = t.value(wh);
  const auto& vsrc = t.value(src);
  const auto& vdst = t.value(dst);
  const int n = vwh.rows();
  const int dp = vwh.cols();
  got::detail::require(vsrc.rows() == n && vsrc.cols() == 1 && vdst.rows() == n && vdst.cols() == 1,
                       "gat_attend: score vectors must be n x 1");
  got::detail::require(static_cast<int>(nb.size()) == n, "gat_attend: neighbor list size mismatch");

  Matrix<T> out(n, dp);
  std::vector<std::vector<T>> alphas(n), raw(n);
  for (int i = 0; i < n; ++i) {
    const auto& row = nb[i];
    if (row.empty()) throw EmptySupportError("gat_attend: node " + std::to_string(i) +
                                             " has an empty neighbor set");
    std::vector<T> q(row.size());
    raw[i].resize(row.size());
    for (size_t k = 0; k < row.size(); ++k) {
      const T e = vsrc(i, 0) + vdst(row[k], 0);
      raw[i][k] = e;
      q[k] = got::leaky_relu(e, slope);
    }
    const std::vector<uint8_t> ones(row.size(), 1);
    alphas[i] = softmax_masked(q, ones);
    for (size_t k = 0; k < row.size(); ++k)
      for (int c = 0; c < dp; ++c) out(i, c) += alphas[i][k] * vwh(row[k], c);
  }

  if (record != nullptr) {
    record->alpha = Matrix<T>(n, n);
    record->scores = Matrix<T>(n, n);
    for (int i = 0; i < n; ++i)
      for (size_t k = 0; k < nb[i].size(); ++k) {
        record->alpha(i, nb[i][k]) = alphas[i][k];
        record->scores(i, nb[i][k]) = raw[i][k];
      }
  }

  const int out_id = t.next_id();
  return t.push(std::move(out), "gat_attend",
                [wh, src, dst, nb, slope, alphas = std::move(alphas), raw = std::move(raw),
                 out_id](Tape<T>& tp) {
    const auto& g = tp.grad_mut(out_id);
    const auto& vwh = tp.value(wh);
    auto& gwh = tp.grad_mut(wh);
    auto& gsrc = tp.grad_mut(src);
    auto& gdst = tp.grad_mut(dst);
    const int dp = vwh.cols();
    for (int i = 0; i < g.rows(); ++i) {
      const auto& row = nb[i];
      const auto& al = alphas[i];
      // dL/dalpha_ik = g_i . Wh_{j_k}; dL/dWh_{j_k} += alpha_ik g_i
      std::vector<T> dalpha(row.size());
      for (size_t k = 0; k < row.size(); ++k) {
        T dot{};
        for (int c = 0; c < dp; ++c) {
          dot += g(i, c) * vwh(row[k], c);
          gwh(row[k], c) += al[k] * g(i, c);
        }
        dalpha[k] = dot;
      }
      // softmax backward within the neighbor row
      T mix{};
      for (size_t k = 0; k < row.size(); ++k) mix += al[k] * dalpha[k];
      for (size_t k = 0; k < row.size(); ++k) {
        const T dq = al[k] * (dalpha[k] - mix);
        const T de = dq * got::leaky_relu_grad(raw[i][k], slope);
        gsrc(i, 0) += de;
        gdst(row[k], 0) += de;
      }
    }
  });
}

}  // namespace ad

/// Tape-side handles for one head's weights.
template <typename T = double>
struct GatHeadVars {
  ad::Var<T> W;
  ad::Var<T> a;
};

template <typename T = double>
struct GatEncoderVars {
  std::vector<GatHeadVars<T>> heads;
  GatHeadVars<T> output;
  ad::Var<T> ffnn_w;
  ad::Var<T> ffnn_b;
};

template <typename T>
GatEncoderVars<T> leaf_gat(ad::Tape<T>& t, const GatEncoderWeights<T>& w) {
  GatEncoderVars<T> v;
  for (const auto& h : w.heads)
    v.heads.push_back(GatHeadVars<T>{t.leaf(h.W, "gat.head.W"), t.leaf(h.a, "gat.head.a")});
  v.output = GatHeadVars<T>{t.leaf(w.output.W, "gat.out.W"), t.leaf(w.output.a, "gat.out.a")};
  v.ffnn_w = t.leaf(w.ffnn_w, "gat.ffnn.w");
  v.ffnn_b = t.leaf(w.ffnn_b, "gat.ffnn.b");
  return v;
}

/// Single attention head over the neighbor structure (Wh, then neighbor
/// softmax, then GELU). Output: n x out_dim.
template <typename T>
ad::Var<T> gat_layer(ad::Tape<T>& t, ad::Var<T> h, const GatHeadVars<T>& head,
                     const std::vector<std::vector<int>>& nb, T slope,
                     AttentionRecord<T>* record = nullptr) {
  const int dp = t.value(head.W).rows();
  auto wh = ad::matmul_nt(t, h, head.W);
  auto a_src = ad::slice_cols(t, head.a, 0, dp);
  auto a_dst = ad::slice_cols(t, head.a, dp, 2 * dp);
  auto src = ad::matmul_nt(t, wh, a_src);
  auto dst = ad::matmul_nt(t, wh, a_dst);
  auto agg = ad::gat_attend(t, wh, src, dst, nb, slope, record);
  return ad::gelu(t, agg);
}

/// K parallel heads, feature-concatenated: n x (K * head_dim).
template <typename T>
ad::Var<T> gat_multihead(ad::Tape<T>& t, ad::Var<T> h, const std::vector<GatHeadVars<T>>& heads,
                         const std::vector<std::vector<int>>& nb, T slope,
                         std::vector<AttentionRecord<T>>* records = nullptr) {
  if (heads.empty()) throw ConfigError("gat_multihead: need at least one head");
  std::vector<ad::Var<T>> outs;
  for (size_t k = 0; k < heads.size(); ++k) {
    AttentionRecord<T>* rec = nullptr;
    if (records != nullptr) {
      records->emplace_back();
      rec = &records->back();
    }
    outs.push_back(gat_layer(t, h, heads[k], nb, slope, rec));
  }
  return outs.size() == 1 ? outs[0] : ad::concat_cols(t, outs);
}

/// Output attention layer (same shape of computation, single head) over the
/// concatenated multi-head features.
template <typename T>
ad::Var<T> gat_output_layer(ad::Tape<T>& t, ad::Var<T> h_cat, const GatHeadVars<T>& head,
                            const std::vector<std::vector<int>>& nb, T slope,
                            AttentionRecord<T>* record = nullptr) {
  return gat_layer(t, h_cat, head, nb, slope, record);
}

/// Node features -> H^G: multi-head layer, output layer, affine map to the
/// fusion width. Empty graphs yield the designated-empty 0 x d marker.
template <typename T>
ad::Var<T> encode_graph(ad::Tape<T>& t, ad::Var<T> node_embeddings, const ThoughtGraph& graph,
                        const GatEncoderVars<T>& vars, T slope = T{0.2},
                        std::vector<AttentionRecord<T>>* records = nullptr) {
  const int d = t.value(vars.ffnn_w).rows();
  if (graph.empty()) return t.leaf(Matrix<T>(0, d), "h_g.empty");
  got::detail::require(t.value(node_embeddings).rows() == graph.size(),
                       "encode_graph: embedding count " +
                           t.value(node_embeddings).shape_str() + " vs " +
                           std::to_string(graph.size()) + " nodes");
  const auto nb = neighbor_lists(graph);
  auto multi = gat_multihead(t, node_embeddings, vars.heads, nb, slope, records);
  AttentionRecord<T>* out_rec = nullptr;
  if (records != nullptr) {
    records->emplace_back();
    out_rec = &records->back();
  }
  auto refined = gat_output_layer(t, multi, vars.output, nb, slope, out_rec);
  auto projected = ad::matmul_nt(t, refined, vars.ffnn_w);
  return ad::add_rowvec(t, projected, vars.ffnn_b);
}

/// Attention report body: one entry per recorded layer (the K multi-head
/// records followed by the output-layer record), weights and raw scores dense
/// over node pairs.
template <typename T>
nlohmann::json attention_report_json(const std::vector<std::string>& nodes,
                                     const std::vector<AttentionRecord<T>>& records) {
  nlohmann::json report;
  report["nodes"] = nodes;
  report["heads"] = nlohmann::json::array();
  for (const auto& rec : records) {
    nlohmann::json entry;
    entry["alpha"] = nlohmann::json::array();
    entry["scores"] = nlohmann::json::array();
    for (int i = 0; i < rec.alpha.rows(); ++i) {
      nlohmann::json arow = nlohmann::json::array();
      nlohmann::json srow = nlohmann::json::array();
      for (int j = 0; j < rec.alpha.cols(); ++j) {
        arow.push_back(rec.alpha(i, j));
        srow.push_back(rec.scores(i, j));
      }
      entry["alpha"].push_back(arow);
      entry["scores"].push_back(srow);
    }
    report["heads"].push_back(entry);
  }
  return report;
}

template <typename T>
nlohmann::json export_attention(const ThoughtGraph& graph, const GatEncoderWeights<T>& weights,
                                const Matrix<T>& node_embeddings, T slope = T{0.2}) {
  if (graph.empty()) return attention_report_json(graph.nodes, std::vector<AttentionRecord<T>>{});
  ad::Tape<T> t;
  auto vars = leaf_gat(t, weights);
  auto h = t.leaf(node_embeddings, "node_embeddings");
  std::vector<AttentionRecord<T>> records;
  encode_graph(t, h, graph, vars, slope, &records);
  return attention_report_json(graph.nodes, records);
}

}  // namespace got
