#include "got/matrix.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using got::Matrix;

namespace {

// Textbook triple loop, kept deliberately separate from the library kernels.
Matrix<double> naive_matmul(const Matrix<double>& a, const Matrix<double>& b) {
  Matrix<double> out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  return out;
}

}  // namespace

TEST(Matrix, MatmulMatchesNaiveOracle) {
  got::Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = rng.uniform_int(1, 8);
    const int k = rng.uniform_int(1, 8);
    const int n = rng.uniform_int(1, 8);
    Matrix<double> a = rng.randn(m, k);
    Matrix<double> b = rng.randn(k, n);
    Matrix<double> got_out = got::matmul(a, b);
    Matrix<double> want = naive_matmul(a, b);
    ASSERT_TRUE(got_out.same_shape(want));
    for (size_t idx = 0; idx < want.size(); ++idx)
      EXPECT_NEAR(got_out[idx], want[idx], 1e-12);
  }
}

TEST(Matrix, TransposedProductsMatchExplicitTranspose) {
  got::Rng rng(11);
  Matrix<double> a = rng.randn(5, 3);
  Matrix<double> b = rng.randn(4, 3);
  Matrix<double> nt = got::matmul_nt(a, b);
  Matrix<double> want_nt = naive_matmul(a, got::transpose(b));
  for (size_t idx = 0; idx < want_nt.size(); ++idx) EXPECT_NEAR(nt[idx], want_nt[idx], 1e-12);
}

TEST(Matrix, MatmulTnMatchesExplicitTranspose) {
  got::Rng rng(13);
  Matrix<double> a = rng.randn(6, 3);
  Matrix<double> b = rng.randn(6, 4);
  Matrix<double> tn = got::matmul_tn(a, b);
  Matrix<double> want = naive_matmul(got::transpose(a), b);
  ASSERT_EQ(tn.rows(), 3);
  ASSERT_EQ(tn.cols(), 4);
  for (size_t idx = 0; idx < want.size(); ++idx) EXPECT_NEAR(tn[idx], want[idx], 1e-12);
}

TEST(Matrix, ShapeMismatchThrows) {
  Matrix<double> a(2, 3);
  Matrix<double> b(2, 3);
  EXPECT_THROW(got::matmul(a, b), got::DimensionError);
  Matrix<double> c(4, 2);
  EXPECT_THROW(got::add(a, c), got::DimensionError);
  EXPECT_THROW(got::hadamard(a, c), got::DimensionError);
}

TEST(Matrix, EmptyMatrixSemantics) {
  Matrix<double> e;
  EXPECT_TRUE(e.empty());
  Matrix<double> z(0, 4);
  EXPECT_TRUE(z.empty());
  Matrix<double> full(1, 1);
  EXPECT_FALSE(full.empty());
}

TEST(Activations, GeluMatchesTanhFormula) {
  const double scale = std::sqrt(2.0 / M_PI);
  for (double x : {-3.0, -1.0, -0.1, 0.0, 0.3, 1.0, 2.5}) {
    const double want = 0.5 * x * (1.0 + std::tanh(scale * (x + 0.044715 * x * x * x)));
    EXPECT_NEAR(got::gelu(x), want, 1e-14);
  }
  EXPECT_DOUBLE_EQ(got::gelu(0.0), 0.0);
}

TEST(Activations, GeluGradMatchesCentralDifference) {
  const double eps = 1e-6;
  for (double x : {-2.0, -0.5, 0.0, 0.4, 1.3, 3.0}) {
    const double numeric = (got::gelu(x + eps) - got::gelu(x - eps)) / (2.0 * eps);
    EXPECT_NEAR(got::gelu_grad(x), numeric, 1e-8);
  }
}

TEST(Activations, LeakyReluSlopeAndGrad) {
  EXPECT_DOUBLE_EQ(got::leaky_relu(2.0, 0.2), 2.0);
  EXPECT_DOUBLE_EQ(got::leaky_relu(-2.0, 0.2), -0.4);
  EXPECT_DOUBLE_EQ(got::leaky_relu_grad(5.0, 0.2), 1.0);
  EXPECT_DOUBLE_EQ(got::leaky_relu_grad(-5.0, 0.2), 0.2);
}

TEST(Activations, SigmoidStableAtExtremes) {
  EXPECT_DOUBLE_EQ(got::sigmoid(0.0), 0.5);
  EXPECT_NEAR(got::sigmoid(1000.0), 1.0, 1e-15);
  EXPECT_NEAR(got::sigmoid(-1000.0), 0.0, 1e-15);
  EXPECT_TRUE(std::isfinite(got::sigmoid(-1000.0)));
  for (double x : {-3.0, -0.7, 0.9, 4.0})
    EXPECT_NEAR(got::sigmoid(-x), 1.0 - got::sigmoid(x), 1e-15);
}

TEST(Softmax, MaskedRowsSumToOneAndZeroOffSupport) {
  std::vector<double> scores{1.0, 2.0, 3.0, 4.0};
  std::vector<uint8_t> mask{1, 0, 1, 1};
  auto p = got::softmax_masked(scores, mask);
  EXPECT_DOUBLE_EQ(p[1], 0.0);
  double total = 0.0;
  for (double v : p) total += v;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_GT(p[3], p[2]);
  EXPECT_GT(p[2], p[0]);
}

TEST(Softmax, ShiftInvariantAndStable) {
  std::vector<double> scores{1000.0, 1001.0, 999.0};
  std::vector<uint8_t> mask{1, 1, 1};
  auto p = got::softmax_masked(scores, mask);
  std::vector<double> shifted{0.0, 1.0, -1.0};
  auto q = got::softmax_masked(shifted, mask);
  for (size_t i = 0; i < p.size(); ++i) {
    EXPECT_TRUE(std::isfinite(p[i]));
    EXPECT_NEAR(p[i], q[i], 1e-12);
  }
}

TEST(Softmax, SingleSupportIsExactlyOne) {
  std::vector<double> scores{-50.0, 3.0};
  std::vector<uint8_t> mask{0, 1};
  auto p = got::softmax_masked(scores, mask);
  EXPECT_DOUBLE_EQ(p[0], 0.0);
  EXPECT_DOUBLE_EQ(p[1], 1.0);
}

TEST(Softmax, EmptySupportThrows) {
  std::vector<double> scores{1.0, 2.0};
  std::vector<uint8_t> mask{0, 0};
  EXPECT_THROW(got::softmax_masked(scores, mask), got::EmptySupportError);
}

TEST(Rng, SameSeedSameStream) {
  got::Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_DOUBLE_EQ(a.uniform(), b.uniform());
  for (int i = 0; i < 100; ++i) EXPECT_DOUBLE_EQ(a.normal(), b.normal());
  got::Rng c(43);
  bool any_diff = false;
  got::Rng a2(42);
  for (int i = 0; i < 10; ++i) any_diff |= (a2.uniform() != c.uniform());
  EXPECT_TRUE(any_diff);
}

TEST(Rng, UniformRangeAndNormalMoments) {
  got::Rng rng(1234);
  double sum = 0.0, sumsq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  for (int i = 0; i < n; ++i) {
    double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.03);
  EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(Rng, UniformIntWithinBoundsInclusive) {
  got::Rng rng(5);
  bool saw_lo = false, saw_hi = false;
  for (int i = 0; i < 1000; ++i) {
    int v = rng.uniform_int(2, 5);
    ASSERT_GE(v, 2);
    ASSERT_LE(v, 5);
    saw_lo |= v == 2;
    saw_hi |= v == 5;
  }
  EXPECT_TRUE(saw_lo);
  EXPECT_TRUE(saw_hi);
}
