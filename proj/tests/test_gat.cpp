#include "got/gat.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "got/gradcheck.hpp"
#include "got/graph.hpp"
#include "got/matrix.hpp"
#include "got/tape.hpp"

using got::AttentionRecord;
using got::GatHeadVars;
using got::Matrix;
using got::neighbor_lists;
using got::ThoughtGraph;
using got::ad::Tape;
using got::ad::Var;

namespace {

ThoughtGraph random_graph(got::Rng& rng, int n, double edge_p = 0.4) {
  ThoughtGraph g;
  for (int i = 0; i < n; ++i) g.nodes.push_back("node" + std::to_string(i));
  g.adj = Matrix<uint8_t>(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < edge_p) {
        g.adj(i, j) = 1;
        g.adj(j, i) = 1;
      }
  return g;
}

// Dense reference: score every ordered pair, mask non-neighbors (self-loops
// allowed) with -inf, softmax whole rows, aggregate, GELU. Entirely separate
// code path from the neighbor-list implementation.
Matrix<double> dense_gat_oracle(const Matrix<double>& h, const Matrix<double>& W,
                                const Matrix<double>& a, const ThoughtGraph& g, double slope) {
  const int n = h.rows();
  const int dp = W.rows();
  Matrix<double> wh = got::matmul_nt(h, W);
  Matrix<double> q(n, n);
  const double ninf = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double src = 0.0, dst = 0.0;
      for (int c = 0; c < dp; ++c) {
        src += a(0, c) * wh(i, c);
        dst += a(0, dp + c) * wh(j, c);
      }
      const bool neighbor = (i == j) || g.adj(i, j);
      q(i, j) = neighbor ? got::leaky_relu(src + dst, slope) : ninf;
    }
  Matrix<double> out(n, dp);
  for (int i = 0; i < n; ++i) {
    double mx = ninf;
    for (int j = 0; j < n; ++j) mx = std::max(mx, q(i, j));
    double denom = 0.0;
    std::vector<double> ex(n);
    for (int j = 0; j < n; ++j) {
      ex[j] = std::isinf(q(i, j)) ? 0.0 : std::exp(q(i, j) - mx);
      denom += ex[j];
    }
    for (int j = 0; j < n; ++j) {
      const double alpha = ex[j] / denom;
      for (int c = 0; c < dp; ++c) out(i, c) += alpha * wh(j, c);
    }
  }
  for (size_t k = 0; k < out.size(); ++k) out[k] = got::gelu(out[k]);
  return out;
}

Matrix<double> run_gat_layer(const Matrix<double>& h, const Matrix<double>& W,
                             const Matrix<double>& a, const ThoughtGraph& g, double slope,
                             AttentionRecord<double>* rec = nullptr) {
  Tape<double> t;
  GatHeadVars<double> head{t.leaf(W), t.leaf(a)};
  auto out = got::gat_layer(t, t.leaf(h), head, neighbor_lists(g), slope, rec);
  return t.value(out);
}

}  // namespace

TEST(Gat, MatchesDenseMaskedOracle) {
  got::Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = rng.uniform_int(1, 10);
    const int d = rng.uniform_int(2, 6);
    const int dp = rng.uniform_int(1, 5);
    auto g = random_graph(rng, n);
    Matrix<double> h = rng.randn(n, d);
    Matrix<double> W = rng.randn(dp, d);
    Matrix<double> a = rng.randn(1, 2 * dp);
    Matrix<double> got_out = run_gat_layer(h, W, a, g, 0.2);
    Matrix<double> want = dense_gat_oracle(h, W, a, g, 0.2);
    ASSERT_TRUE(got_out.same_shape(want));
    for (size_t k = 0; k < want.size(); ++k) ASSERT_NEAR(got_out[k], want[k], 1e-10);
  }
}

TEST(Gat, SingleNodeIsGeluOfProjection) {
  got::Rng rng(22);
  ThoughtGraph g;
  g.nodes = {"only"};
  g.adj = Matrix<uint8_t>(1, 1);
  Matrix<double> h = rng.randn(1, 4);
  Matrix<double> W = rng.randn(3, 4);
  Matrix<double> a = rng.randn(1, 6);
  AttentionRecord<double> rec;
  Matrix<double> out = run_gat_layer(h, W, a, g, 0.2, &rec);
  EXPECT_DOUBLE_EQ(rec.alpha(0, 0), 1.0);
  Matrix<double> wh = got::matmul_nt(h, W);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(out(0, c), got::gelu(wh(0, c)), 1e-14);
}

TEST(Gat, TwoNodeCliqueIdenticalEmbeddingsUniformAlpha) {
  ThoughtGraph g;
  g.nodes = {"a", "b"};
  g.adj = Matrix<uint8_t>(2, 2);
  g.adj(0, 1) = g.adj(1, 0) = 1;
  Matrix<double> h(2, 3);
  for (int j = 0; j < 3; ++j) {
    h(0, j) = 0.3 * (j + 1);
    h(1, j) = 0.3 * (j + 1);
  }
  got::Rng rng(23);
  Matrix<double> W = rng.randn(2, 3);
  Matrix<double> a = rng.randn(1, 4);
  AttentionRecord<double> rec;
  run_gat_layer(h, W, a, g, 0.2, &rec);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(rec.alpha(i, j), 0.5, 1e-12);
}

TEST(Gat, AlphaRowStochasticOverNeighborsZeroElsewhere) {
  got::Rng rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.uniform_int(2, 9);
    auto g = random_graph(rng, n, 0.3);
    Matrix<double> h = rng.randn(n, 5);
    Matrix<double> W = rng.randn(3, 5);
    Matrix<double> a = rng.randn(1, 6);
    AttentionRecord<double> rec;
    run_gat_layer(h, W, a, g, 0.2, &rec);
    for (int i = 0; i < n; ++i) {
      double row_sum = 0.0;
      for (int j = 0; j < n; ++j) {
        row_sum += rec.alpha(i, j);
        const bool neighbor = (i == j) || g.adj(i, j);
        if (!neighbor) ASSERT_EQ(rec.alpha(i, j), 0.0);
      }
      ASSERT_NEAR(row_sum, 1.0, 1e-9);
    }
  }
}

TEST(Gat, LocalityIsExact) {
  // path 0-1-2-3: node 3 is not a neighbor of node 0
  ThoughtGraph g;
  g.nodes = {"n0", "n1", "n2", "n3"};
  g.adj = Matrix<uint8_t>(4, 4);
  for (int i = 0; i + 1 < 4; ++i) {
    g.adj(i, i + 1) = 1;
    g.adj(i + 1, i) = 1;
  }
  got::Rng rng(25);
  Matrix<double> h = rng.randn(4, 4);
  Matrix<double> W = rng.randn(3, 4);
  Matrix<double> a = rng.randn(1, 6);
  Matrix<double> base = run_gat_layer(h, W, a, g, 0.2);
  Matrix<double> h2 = h;
  for (int c = 0; c < 4; ++c) h2(3, c) += 10.0 + c;
  Matrix<double> moved = run_gat_layer(h2, W, a, g, 0.2);
  for (int c = 0; c < 3; ++c) {
    ASSERT_EQ(base(0, c), moved(0, c));  // bitwise: row 0 untouched
    ASSERT_NE(base(2, c), moved(2, c));  // row 2 sees node 3
  }
}

TEST(Gat, PermutationEquivariance) {
  got::Rng rng(26);
  const int n = 7;
  auto g = random_graph(rng, n, 0.4);
  Matrix<double> h = rng.randn(n, 4);
  Matrix<double> W = rng.randn(3, 4);
  Matrix<double> a = rng.randn(1, 6);
  Matrix<double> base = run_gat_layer(h, W, a, g, 0.2);

  std::vector<int> perm{3, 0, 6, 1, 5, 2, 4};  // perm[i] = old index placed at new slot i
  ThoughtGraph pg;
  pg.adj = Matrix<uint8_t>(n, n);
  Matrix<double> ph(n, 4);
  for (int i = 0; i < n; ++i) {
    pg.nodes.push_back(g.nodes[perm[i]]);
    for (int c = 0; c < 4; ++c) ph(i, c) = h(perm[i], c);
    for (int j = 0; j < n; ++j) pg.adj(i, j) = g.adj(perm[i], perm[j]);
  }
  Matrix<double> permuted = run_gat_layer(ph, W, a, pg, 0.2);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) ASSERT_NEAR(permuted(i, c), base(perm[i], c), 1e-10);
}

TEST(Gat, MultiheadConcatAndDegenerateCases) {
  got::Rng rng(27);
  const int n = 6;
  auto g = random_graph(rng, n, 0.5);
  auto nb = neighbor_lists(g);
  Matrix<double> h = rng.randn(n, 4);
  Matrix<double> W1 = rng.randn(2, 4);
  Matrix<double> a1 = rng.randn(1, 4);
  Matrix<double> W2 = rng.randn(2, 4);
  Matrix<double> a2 = rng.randn(1, 4);

  // K=1 equals the single layer
  {
    Tape<double> t;
    auto hv = t.leaf(h);
    std::vector<GatHeadVars<double>> heads{{t.leaf(W1), t.leaf(a1)}};
    auto multi = got::gat_multihead(t, hv, heads, nb, 0.2);
    GatHeadVars<double> single{t.leaf(W1), t.leaf(a1)};
    auto one = got::gat_layer(t, hv, single, nb, 0.2);
    for (size_t k = 0; k < t.value(one).size(); ++k)
      ASSERT_DOUBLE_EQ(t.value(multi)[k], t.value(one)[k]);
  }
  // duplicated head duplicates features
  {
    Tape<double> t;
    auto hv = t.leaf(h);
    std::vector<GatHeadVars<double>> heads{{t.leaf(W1), t.leaf(a1)}, {t.leaf(W1), t.leaf(a1)}};
    auto multi = got::gat_multihead(t, hv, heads, nb, 0.2);
    const auto& v = t.value(multi);
    ASSERT_EQ(v.cols(), 4);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 2; ++c) ASSERT_DOUBLE_EQ(v(i, c), v(i, c + 2));
  }
  // distinct heads: K=2 concat matches per-head oracle columns
  {
    Tape<double> t;
    auto hv = t.leaf(h);
    std::vector<GatHeadVars<double>> heads{{t.leaf(W1), t.leaf(a1)}, {t.leaf(W2), t.leaf(a2)}};
    auto multi = got::gat_multihead(t, hv, heads, nb, 0.2);
    Matrix<double> w1 = dense_gat_oracle(h, W1, a1, g, 0.2);
    Matrix<double> w2 = dense_gat_oracle(h, W2, a2, g, 0.2);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 2; ++c) {
        ASSERT_NEAR(t.value(multi)(i, c), w1(i, c), 1e-10);
        ASSERT_NEAR(t.value(multi)(i, c + 2), w2(i, c), 1e-10);
      }
  }
}

TEST(Gat, SingleLayerGradCheck) {
  got::Rng rng(28);
  // 4-node path graph
  ThoughtGraph g;
  g.nodes = {"a", "b", "c", "d"};
  g.adj = Matrix<uint8_t>(4, 4);
  for (int i = 0; i + 1 < 4; ++i) {
    g.adj(i, i + 1) = 1;
    g.adj(i + 1, i) = 1;
  }
  const auto nb = neighbor_lists(g);
  std::vector<Matrix<double>> inputs{rng.randn(4, 3), rng.randn(2, 3), rng.randn(1, 4)};
  got::ad::ScalarFn<double> f = [&nb](Tape<double>& t, const std::vector<Var<double>>& in) {
    GatHeadVars<double> head{in[1], in[2]};
    auto out = got::gat_layer(t, in[0], head, nb, 0.2);
    return got::ad::sum(t, out);
  };
  auto report = got::ad::grad_check<double>(f, inputs, {"h", "W", "a"});
  EXPECT_LT(report.max_err, 1e-4);
}

TEST(Gat, EncodeGraphGradCheckAllParams) {
  got::Rng rng(29);
  ThoughtGraph g;
  g.nodes = {"a", "b", "c"};
  g.adj = Matrix<uint8_t>(3, 3);
  g.adj(0, 1) = g.adj(1, 0) = 1;
  g.adj(1, 2) = g.adj(2, 1) = 1;

  // h, head1(W,a), head2(W,a), output(W,a), ffnn w, ffnn b
  std::vector<Matrix<double>> inputs{
      rng.randn(3, 4), rng.randn(2, 4), rng.randn(1, 4), rng.randn(2, 4), rng.randn(1, 4),
      rng.randn(3, 4), rng.randn(1, 6), rng.randn(4, 3), rng.randn(1, 4)};
  got::ad::ScalarFn<double> f = [&g](Tape<double>& t, const std::vector<Var<double>>& in) {
    got::GatEncoderVars<double> vars;
    vars.heads = {{in[1], in[2]}, {in[3], in[4]}};
    vars.output = {in[5], in[6]};
    vars.ffnn_w = in[7];
    vars.ffnn_b = in[8];
    auto hg = got::encode_graph(t, in[0], g, vars);
    auto act = got::ad::sigmoid(t, hg);  // bend the landscape a little
    return got::ad::sum(t, act);
  };
  auto report = got::ad::grad_check<double>(f, inputs);
  EXPECT_LT(report.max_err, 1e-4);
}

TEST(Gat, EncodeGraphEmptyGivesZeroRowMarker) {
  got::Rng rng(30);
  got::GatConfig cfg;
  cfg.heads = 2;
  cfg.head_dim = 3;
  cfg.out_dim = 6;
  cfg.fusion_dim = 6;
  auto weights = got::init_gat<double>(cfg, 5, rng);
  ThoughtGraph g;
  Tape<double> t;
  auto vars = got::leaf_gat(t, weights);
  auto hg = got::encode_graph(t, t.leaf(Matrix<double>(0, 5)), g, vars);
  EXPECT_EQ(t.value(hg).rows(), 0);
  EXPECT_EQ(t.value(hg).cols(), 6);
}

TEST(Gat, ExportAttentionRoundTrip) {
  got::Rng rng(31);
  got::GatConfig cfg;
  cfg.heads = 2;
  cfg.head_dim = 2;
  cfg.out_dim = 4;
  cfg.fusion_dim = 4;
  auto weights = got::init_gat<double>(cfg, 4, rng);

  ThoughtGraph g;
  g.nodes = {"a", "b", "c"};
  g.adj = Matrix<uint8_t>(3, 3);
  g.adj(0, 1) = g.adj(1, 0) = 1;

  auto report = got::export_attention(g, weights, rng.randn(3, 4));
  ASSERT_EQ(report["nodes"].size(), 3u);
  ASSERT_EQ(report["heads"].size(), 3u);  // 2 heads + output layer
  for (const auto& head : report["heads"]) {
    for (size_t i = 0; i < 3; ++i) {
      double row_sum = 0.0;
      for (size_t j = 0; j < 3; ++j) row_sum += head["alpha"][i][j].get<double>();
      EXPECT_NEAR(row_sum, 1.0, 1e-9);
    }
    // node 2 is isolated: self-loop only
    EXPECT_DOUBLE_EQ(head["alpha"][2][2].get<double>(), 1.0);
    EXPECT_DOUBLE_EQ(head["alpha"][2][0].get<double>(), 0.0);
  }
}

TEST(Gat, SingleNodeExportAlphaIsOne) {
  got::Rng rng(32);
  got::GatConfig cfg;
  cfg.heads = 1;
  cfg.head_dim = 2;
  cfg.out_dim = 2;
  cfg.fusion_dim = 2;
  auto weights = got::init_gat<double>(cfg, 3, rng);
  ThoughtGraph g;
  g.nodes = {"solo"};
  g.adj = Matrix<uint8_t>(1, 1);
  auto report = got::export_attention(g, weights, rng.randn(1, 3));
  for (const auto& head : report["heads"])
    EXPECT_DOUBLE_EQ(head["alpha"][0][0].get<double>(), 1.0);
}
