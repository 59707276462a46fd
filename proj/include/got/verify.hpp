#pragma once

// Gradient-check battery shared by the `gradcheck` command and the acceptance
// gate: every differentiable stage of the system against central finite
// differences, each scenario fully pinned by its seed.

#include <string>
#include <vector>

#include "got/config.hpp"
#include "got/fusion.hpp"
#include "got/gat.hpp"
#include "got/gradcheck.hpp"
#include "got/graph.hpp"
#include "got/pipeline.hpp"

namespace got::verify {

inline ThoughtGraph path_graph(const std::vector<std::string>& nodes) {
  ThoughtGraph g;
  g.nodes = nodes;
  const int n = g.size();
  g.adj = Matrix<uint8_t>(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    g.adj(i, i + 1) = 1;
    g.adj(i + 1, i) = 1;
  }
  return g;
}

/// Single attention head on a 4-node path: h, W, a all checked.
inline ad::GradCheckReport<double> check_gat_layer(uint64_t seed = 11) {
  const ThoughtGraph g = path_graph({"n0", "n1", "n2", "n3"});
  const auto nb = neighbor_lists(g);
  Rng rng(seed);
  std::vector<Matrix<double>> inputs{rng.randn<double>(4, 6, 0.5), rng.randn<double>(5, 6, 0.4),
                                     rng.randn<double>(1, 10, 0.4)};
  auto f = [nb](ad::Tape<double>& t, const std::vector<ad::Var<double>>& in) {
    const GatHeadVars<double> head{in[1], in[2]};
    return ad::sum(t, gat_layer(t, in[0], head, nb, 0.2));
  };
  return ad::grad_check<double>(f, std::move(inputs), {"h", "W", "a"});
}

/// Two heads, the output attention layer, and the final affine map on a
/// 5-node graph (path plus one chord).
inline ad::GradCheckReport<double> check_graph_encoder(uint64_t seed = 12) {
  ThoughtGraph g = path_graph({"n0", "n1", "n2", "n3", "n4"});
  g.adj(0, 3) = 1;
  g.adj(3, 0) = 1;
  GatConfig gc;
  gc.heads = 2;
  gc.head_dim = 3;
  gc.out_dim = 4;
  gc.fusion_dim = 4;
  Rng rng(seed);
  const GatEncoderWeights<double> w = init_gat<double>(gc, 6, rng);
  std::vector<Matrix<double>> inputs{rng.randn<double>(5, 6, 0.5),
                                     w.heads[0].W,
                                     w.heads[0].a,
                                     w.heads[1].W,
                                     w.heads[1].a,
                                     w.output.W,
                                     w.output.a,
                                     w.ffnn_w,
                                     w.ffnn_b};
  auto f = [g](ad::Tape<double>& t, const std::vector<ad::Var<double>>& in) {
    GatEncoderVars<double> v;
    v.heads = {GatHeadVars<double>{in[1], in[2]}, GatHeadVars<double>{in[3], in[4]}};
    v.output = GatHeadVars<double>{in[5], in[6]};
    v.ffnn_w = in[7];
    v.ffnn_b = in[8];
    return ad::sum(t, encode_graph(t, in[0], g, v, 0.2));
  };
  return ad::grad_check<double>(
      f, std::move(inputs), {"h", "W1", "a1", "W2", "a2", "Wout", "aout", "ffnn.w", "ffnn.b"});
}

/// Cross-attention into the gate, either text-only or with the vision branch.
inline ad::GradCheckReport<double> check_fusion(bool multimodal, uint64_t seed = 13) {
  Rng rng(seed);
  const int l = 3, d = 4;
  std::vector<Matrix<double>> inputs{rng.randn<double>(l, d, 0.6), rng.randn<double>(2, d, 0.6),
                                     rng.randn<double>(d, d, 0.5), rng.randn<double>(d, d, 0.5)};
  std::vector<std::string> names{"h_t", "h_g", "W_T", "W_G"};
  if (multimodal) {
    inputs.push_back(rng.randn<double>(2, d, 0.6));
    inputs.push_back(rng.randn<double>(d, d, 0.5));
    names.insert(names.end(), {"h_i", "W_I"});
  }
  auto f = [multimodal](ad::Tape<double>& t, const std::vector<ad::Var<double>>& in) {
    FusionVars<double> fv;
    fv.W_T = in[2];
    fv.W_G = in[3];
    fv.multimodal = multimodal;
    const ad::Var<double> aligned_g = cross_attend(t, in[0], in[1]);
    std::optional<ad::Var<double>> aligned_i;
    if (multimodal) {
      fv.W_I = in[5];
      aligned_i = cross_attend(t, in[0], in[4]);
    }
    return ad::sum(t, gated_fuse(t, in[0], aligned_g, aligned_i, fv));
  };
  return ad::grad_check<double>(f, std::move(inputs), std::move(names));
}

/// The most load-bearing sample in the suite: an 8-token encoder input whose
/// text yields exactly a 3-node graph, checked through the teacher-forced
/// rationale loss, so every parameter of the model participates.
inline ad::GradCheckReport<double> check_full_stage(uint64_t seed = 14) {
  PipelineConfig cfg;
  cfg.model.tf.d_model = 8;
  cfg.model.tf.n_heads = 2;
  cfg.model.tf.n_layers = 1;
  cfg.model.tf.ffn_mult = 2;
  cfg.model.gat.heads = 2;
  cfg.model.gat.head_dim = 3;
  cfg.model.gat.out_dim = 4;
  cfg.max_input_length = 8;
  validate_config(cfg);

  Sample<double> s;
  s.id = "gradcheck-full";
  s.question = "what food ?";
  s.context = "the fox eats corn .";
  s.choices = {"corn", "hay"};
  s.answer = 0;
  s.rationale = "the fox eats corn";

  std::string graph_text;
  detail_ecc::append_segment(graph_text, s.question);
  detail_ecc::append_segment(graph_text, s.context);
  detail_ecc::append_segment(graph_text, render_choices(s.choices));
  const ThoughtGraph g = construct_got(graph_text, Stage::rationale, {}, {}, cfg.ecc);
  detail::require(g.size() == 3, "check_full_stage: expected a 3-node graph, got " +
                                     std::to_string(g.size()) + " nodes");
  const auto ids = stage_input_ids(Tokenizer::from_corpus(tokenizer_corpus(
                                       std::vector<Sample<double>>{s})),
                                   s, Stage::rationale, "", cfg.max_input_length);
  detail::require(ids.size() == 8,
                  "check_full_stage: expected an 8-token input, got " + std::to_string(ids.size()));

  ToyModel<double> m = init_model<double>(
      cfg.model, Tokenizer::from_corpus(tokenizer_corpus(std::vector<Sample<double>>{s})), seed);
  std::vector<Matrix<double>> mats;
  std::vector<std::string> names;
  for_each_param(m, [&](const std::string& n, Matrix<double>& w) {
    mats.push_back(w);
    names.push_back(n);
  });
  auto f = [&m, &cfg, &s](ad::Tape<double>& t, const std::vector<ad::Var<double>>& in) {
    const ToyModelVars<double> vars = assemble_model_vars(m, in);
    return stage_loss(t, vars, m, cfg, s, Stage::rationale);
  };
  return ad::grad_check<double>(f, std::move(mats), std::move(names));
}

struct BatteryItem {
  std::string name;
  ad::GradCheckReport<double> report;
  double tolerance = 1e-4;

  bool pass() const { return report.max_err < tolerance; }
};

inline std::vector<BatteryItem> gradient_battery() {
  std::vector<BatteryItem> items;
  items.push_back({"gat layer, 4-node path", check_gat_layer()});
  items.push_back({"graph encoder, multi-head + output + affine", check_graph_encoder()});
  items.push_back({"cross-attention + gated fusion, text-only", check_fusion(false)});
  items.push_back({"cross-attention + gated fusion, multimodal", check_fusion(true)});
  items.push_back({"full rationale-stage loss, 8 tokens / 3 nodes", check_full_stage()});
  return items;
}

}  // namespace got::verify
