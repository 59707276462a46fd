#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "got/error.hpp"
#include "got/matrix.hpp"

namespace got::ad {

template <typename T>
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode tape over a small fixed op set. Each op records its value and
/// a closure that scatters the output gradient back to its parents. A tape is
/// confined to one thread; node values are immutable once pushed.
template <typename T = double>
class Tape {
 public:
  Var<T> leaf(Matrix<T> value, std::string name = "leaf") {
    return push(std::move(value), std::move(name), nullptr);
  }

  /// Next node id; ops capture this before pushing so the backward closure
  /// can read its own output gradient.
  int next_id() const { return static_cast<int>(nodes_.size()); }

  Var<T> push(Matrix<T> value, std::string op, std::function<void(Tape&)> backward) {
    nodes_.push_back(Node{std::move(value), Matrix<T>{}, std::move(backward), op});
    return Var<T>{static_cast<int>(nodes_.size()) - 1};
  }

  const Matrix<T>& value(Var<T> v) const { return nodes_[v.id].value; }

  /// Gradient accumulated for `v`; valid after backward().
  const Matrix<T>& grad(Var<T> v) const { return nodes_[v.id].grad; }
  Matrix<T>& grad_mut(Var<T> v) { return nodes_[v.id].grad; }
  Matrix<T>& grad_mut(int id) { return nodes_[id].grad; }

  const std::string& op_name(Var<T> v) const { return nodes_[v.id].op; }
  size_t size() const { return nodes_.size(); }

  /// Seeds d(root)/d(root) = 1 and propagates to every node below it.
  void backward(Var<T> root) {
    for (auto& n : nodes_) n.grad = Matrix<T>(n.value.rows(), n.value.cols());
    nodes_[root.id].grad.fill(T{1});
    for (int i = root.id; i >= 0; --i) {
      if (nodes_[i].backward) nodes_[i].backward(*this);
    }
  }

  /// Throws NumericError naming the first op whose value is not finite.
  void check_finite() const {
    for (size_t i = 0; i < nodes_.size(); ++i) {
      if (!all_finite(nodes_[i].value))
        throw NumericError(std::string("non-finite value produced by op '") + nodes_[i].op +
                           "' (node " + std::to_string(i) + ")");
    }
  }

  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Matrix<T> value;
    Matrix<T> grad;
    std::function<void(Tape&)> backward;
    std::string op;
  };
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Ops. Closures capture node ids, never references into the tape, since the
// node vector may reallocate while the graph is still being built.
// ---------------------------------------------------------------------------

namespace detail {
template <typename T>
void axpy(Matrix<T>& dst, const Matrix<T>& src, T alpha = T{1}) {
  for (size_t k = 0; k < dst.size(); ++k) dst[k] += alpha * src[k];
}
}  // namespace detail

template <typename T>
Var<T> add(Tape<T>& t, Var<T> a, Var<T> b) {
  Matrix<T> v = got::add(t.value(a), t.value(b));
  const int out = t.next_id();
  return t.push(std::move(v), "add", [a, b, out](Tape<T>& tp) {
    const auto& g = tp.grad_mut(out);
    detail::axpy(tp.grad_mut(a), g);
    detail::axpy(tp.grad_mut(b), g);
  });
}

template <typename T>
Var<T> sub(Tape<T>& t, Var<T> a, Var<T> b) {
  Matrix<T> v = got::sub(t.value(a), t.value(b));
  const int out = t.next_id();
  return t.push(std::move(v), "sub", [a, b, out](Tape<T>& tp) {
    const auto& g = tp.grad_mut(out);
    detail::axpy(tp.grad_mut(a), g);
    detail::axpy(tp.grad_mut(b), g, T{-1});
  });
}

template <typename T>
Var<T> hadamard(Tape<T>& t, Var<T> a, Var<T> b) {
  Matrix<T> v = got::hadamard(t.value(a), t.value(b));
  const int out = t.next_id();
  return t.push(std::move(v), "hadamard", [a, b, out](Tape<T>& tp) {
    const auto& g = tp.grad_mut(out);
    const auto& va = tp.value(a);
    const auto& vb = tp.value(b);
    auto& ga = tp.grad_mut(a);
    auto& gb = tp.grad_mut(b);
    for (size_t k = 0; k < g.size(); ++k) {
      ga[k] += g[k] * vb[k];
      gb[k] += g[k] * va[k];
    }
  });
}

/// value = alpha * a + beta, elementwise.
template <typename T>
Var<T> affine(Tape<T>& t, Var<T> a, T alpha, T beta) {
  Matrix<T> v = t.value(a);
  for (size_t k = 0; k < v.size(); ++k) v[k] = alpha * v[k] + beta;
  const int out = t.next_id();
  return t.push(std::move(v), "affine", [a, alpha, out](Tape<T>& tp) {
    detail::axpy(tp.grad_mut(a), tp.grad_mut(out), alpha);
  });
}

template <typename T>
Var<T> scale(Tape<T>& t, Var<T> a, T s) {
  return affine(t, a, s, T{});
}

/// 1 - a, used for the complement side of a gate.
template <typename T>
Var<T> one_minus(Tape<T>& t, Var<T> a) {
  return affine(t, a, T{-1}, T{1});
}

/// Adds a constant matrix (no gradient flows into it).
template <typename T>
Var<T> add_const(Tape<T>& t, Var<T> a, const Matrix<T>& c) {
  Matrix<T> v = got::add(t.value(a), c);
  const int out = t.next_id();
  return t.push(std::move(v), "add_const", [a, out](Tape<T>& tp) {
    detail::axpy(tp.grad_mut(a), tp.grad_mut(out));
  });
}

/// a (n x c) + row (1 x c) broadcast over rows.
template <typename T>
Var<T> add_rowvec(Tape<T>& t, Var<T> a, Var<T> row) {
  const auto& va = t.value(a);
  const auto& vr = t.value(row);
  got::detail::require(vr.rows() == 1 && vr.cols() == va.cols(),
                       "add_rowvec: " + va.shape_str() + " vs " + vr.shape_str());
  Matrix<T> v = va;
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < v.cols(); ++j) v(i, j) += vr(0, j);
  const int out = t.next_id();
  return t.push(std::move(v), "add_rowvec", [a, row, out](Tape<T>& tp) {
    const auto& g = tp.grad_mut(out);
    detail::axpy(tp.grad_mut(a), g);
    auto& gr = tp.grad_mut(row);
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) gr(0, j) += g(i, j);
  });
}

template <typename T>
Var<T> matmul(Tape<T>& t, Var<T> a, Var<T> b) {
  Matrix<T> v = got::matmul(t.value(a), t.value(b));
  const int out = t.next_id();
  return t.push(std::move(v), "matmul", [a, b, out](Tape<T>& tp) {
    const auto& g = tp.grad_mut(out);
    detail::axpy(tp.grad_mut(a), got::matmul_nt(g, tp.value(b)));
    detail::axpy(tp.grad_mut(b), got::matmul_tn(tp.value(a), g));
  });
}

/// a * b^T without materializing the transpose.
template <typename T>
Var<T> matmul_nt(Tape<T>& t, Var<T> a, Var<T> b) {
  Matrix<T> v = got::matmul_nt(t.value(a), t.value(b));
  const int out = t.next_id();
  return t.push(std::move(v), "matmul_nt", [a, b, out](Tape<T>& tp) {
    const auto& g = tp.grad_mut(out);
    detail::axpy(tp.grad_mut(a), got::matmul(g, tp.value(b)));
    detail::axpy(tp.grad_mut(b), got::matmul_tn(g, tp.value(a)));
  });
}

template <typename T>
Var<T> concat_cols(Tape<T>& t, const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw EmptyInputError("concat_cols: no parts");
  int rows = t.value(parts[0]).rows();
  int cols = 0;
  for (auto p : parts) {
    got::detail::require(t.value(p).rows() == rows, "concat_cols: row mismatch");
    cols += t.value(p).cols();
  }
  Matrix<T> v(rows, cols);
  int off = 0;
  for (auto p : parts) {
    const auto& vp = t.value(p);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < vp.cols(); ++j) v(i, off + j) = vp(i, j);
    off += vp.cols();
  }
  const int out = t.next_id();
  return t.push(std::move(v), "concat_cols", [parts, out](Tape<T>& tp) {
    const auto& g = tp.grad_mut(out);
    int off2 = 0;
    for (auto p : parts) {
      auto& gp = tp.grad_mut(p);
      for (int i = 0; i < gp.rows(); ++i)
        for (int j = 0; j < gp.cols(); ++j) gp(i, j) += g(i, off2 + j);
      off2 += gp.cols();
    }
  });
}

template <typename T>
Var<T> concat_rows(Tape<T>& t, const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw EmptyInputError("concat_rows: no parts");
  int cols = t.value(parts[0]).cols();
  int rows = 0;
  for (auto p : parts) {
    got::detail::require(t.value(p).cols() == cols, "concat_rows: column mismatch");
    rows += t.value(p).rows();
  }
  Matrix<T> v(rows, cols);
  int off = 0;
  for (auto p : parts) {
    const auto& vp = t.value(p);
    for (int i = 0; i < vp.rows(); ++i)
      for (int j = 0; j < cols; ++j) v(off + i, j) = vp(i, j);
    off += vp.rows();
  }
  const int out = t.next_id();
  return t.push(std::move(v), "concat_rows", [parts, out](Tape<T>& tp) {
    const auto& g = tp.grad_mut(out);
    int off2 = 0;
    for (auto p : parts) {
      auto& gp = tp.grad_mut(p);
      for (int i = 0; i < gp.rows(); ++i)
        for (int j = 0; j < gp.cols(); ++j) gp(i, j) += g(off2 + i, j);
      off2 += gp.rows();
    }
  });
}

/// Columns [c0, c1) of a.
template <typename T>
Var<T> slice_cols(Tape<T>& t, Var<T> a, int c0, int c1) {
  const auto& va = t.value(a);
  got::detail::require(0 <= c0 && c0 < c1 && c1 <= va.cols(),
                       "slice_cols: [" + std::to_string(c0) + "," + std::to_string(c1) +
                           ") out of range for " + va.shape_str());
  Matrix<T> v(va.rows(), c1 - c0);
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < v.cols(); ++j) v(i, j) = va(i, c0 + j);
  const int out = t.next_id();
  return t.push(std::move(v), "slice_cols", [a, c0, out](Tape<T>& tp) {
    const auto& g = tp.grad_mut(out);
    auto& ga = tp.grad_mut(a);
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) ga(i, c0 + j) += g(i, j);
  });
}

/// Rows [r0, r1) of a.
template <typename T>
Var<T> slice_rows(Tape<T>& t, Var<T> a, int r0, int r1) {
  const auto& va = t.value(a);
  got::detail::require(0 <= r0 && r0 < r1 && r1 <= va.rows(),
                       "slice_rows: [" + std::to_string(r0) + "," + std::to_string(r1) +
                           ") out of range for " + va.shape_str());
  Matrix<T> v(r1 - r0, va.cols());
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < v.cols(); ++j) v(i, j) = va(r0 + i, j);
  const int out = t.next_id();
  return t.push(std::move(v), "slice_rows", [a, r0, out](Tape<T>& tp) {
    const auto& g = tp.grad_mut(out);
    auto& ga = tp.grad_mut(a);
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) ga(r0 + i, j) += g(i, j);
  });
}

/// Row gather; repeated indices accumulate gradient (embedding lookup).
template <typename T>
Var<T> gather_rows(Tape<T>& t, Var<T> a, std::vector<int> idx) {
  const auto& va = t.value(a);
  Matrix<T> v(static_cast<int>(idx.size()), va.cols());
  for (size_t i = 0; i < idx.size(); ++i) {
    got::detail::require(idx[i] >= 0 && idx[i] < va.rows(),
                         "gather_rows: index " + std::to_string(idx[i]) + " out of range for " +
                             va.shape_str());
    for (int j = 0; j < va.cols(); ++j) v(static_cast<int>(i), j) = va(idx[i], j);
  }
  const int out = t.next_id();
  return t.push(std::move(v), "gather_rows", [a, idx = std::move(idx), out](Tape<T>& tp) {
    const auto& g = tp.grad_mut(out);
    auto& ga = tp.grad_mut(a);
    for (size_t i = 0; i < idx.size(); ++i)
      for (int j = 0; j < g.cols(); ++j) ga(idx[i], j) += g(static_cast<int>(i), j);
  });
}

/// Per-row masked softmax. mask01 holds 1 on support, 0 elsewhere; output
/// entries off support are exactly zero. Every row needs non-empty support.
template <typename T>
Var<T> row_softmax_masked(Tape<T>& t, Var<T> scores, const Matrix<T>& mask01) {
  const auto& s = t.value(scores);
  got::detail::require(s.same_shape(mask01),
                       "row_softmax_masked: scores " + s.shape_str() + " vs mask " +
                           mask01.shape_str());
  Matrix<T> v(s.rows(), s.cols());
  for (int i = 0; i < s.rows(); ++i) {
    std::vector<T> row(s.row_ptr(i), s.row_ptr(i) + s.cols());
    std::vector<uint8_t> m(s.cols());
    for (int j = 0; j < s.cols(); ++j) m[j] = mask01(i, j) != T{} ? 1 : 0;
    auto soft = softmax_masked(row, m);
    for (int j = 0; j < s.cols(); ++j) v(i, j) = soft[j];
  }
  const int out = t.next_id();
  return t.push(std::move(v), "row_softmax_masked", [scores, out](Tape<T>& tp) {
    const auto& y = tp.value(Var<T>{out});
    const auto& g = tp.grad_mut(out);
    auto& gs = tp.grad_mut(scores);
    for (int i = 0; i < y.rows(); ++i) {
      T dot{};
      for (int j = 0; j < y.cols(); ++j) dot += y(i, j) * g(i, j);
      for (int j = 0; j < y.cols(); ++j) gs(i, j) += y(i, j) * (g(i, j) - dot);
    }
  });
}

template <typename T>
Var<T> leaky_relu(Tape<T>& t, Var<T> a, T slope) {
  Matrix<T> v = t.value(a);
  for (size_t k = 0; k < v.size(); ++k) v[k] = got::leaky_relu(v[k], slope);
  const int out = t.next_id();
  return t.push(std::move(v), "leaky_relu", [a, slope, out](Tape<T>& tp) {
    const auto& g = tp.grad_mut(out);
    const auto& x = tp.value(a);
    auto& ga = tp.grad_mut(a);
    for (size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * got::leaky_relu_grad(x[k], slope);
  });
}

template <typename T>
Var<T> gelu(Tape<T>& t, Var<T> a) {
  Matrix<T> v = t.value(a);
  for (size_t k = 0; k < v.size(); ++k) v[k] = got::gelu(v[k]);
  const int out = t.next_id();
  return t.push(std::move(v), "gelu", [a, out](Tape<T>& tp) {
    const auto& g = tp.grad_mut(out);
    const auto& x = tp.value(a);
    auto& ga = tp.grad_mut(a);
    for (size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * got::gelu_grad(x[k]);
  });
}

template <typename T>
Var<T> sigmoid(Tape<T>& t, Var<T> a) {
  Matrix<T> v = t.value(a);
  for (size_t k = 0; k < v.size(); ++k) v[k] = got::sigmoid(v[k]);
  const int out = t.next_id();
  return t.push(std::move(v), "sigmoid", [a, out](Tape<T>& tp) {
    const auto& y = tp.value(Var<T>{out});
    const auto& g = tp.grad_mut(out);
    auto& ga = tp.grad_mut(a);
    for (size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * y[k] * (T{1} - y[k]);
  });
}

/// Row-wise RMS normalization with a learned gain (1 x cols).
template <typename T>
Var<T> rmsnorm(Tape<T>& t, Var<T> x, Var<T> gain, T eps = T{1e-6}) {
  const auto& vx = t.value(x);
  const auto& vg = t.value(gain);
  got::detail::require(vg.rows() == 1 && vg.cols() == vx.cols(),
                       "rmsnorm: gain " + vg.shape_str() + " vs input " + vx.shape_str());
  const int d = vx.cols();
  Matrix<T> v(vx.rows(), d);
  std::vector<T> inv_rms(vx.rows());
  for (int i = 0; i < vx.rows(); ++i) {
    T ms{};
    for (int j = 0; j < d; ++j) ms += vx(i, j) * vx(i, j);
    ms = ms / static_cast<T>(d) + eps;
    inv_rms[i] = T{1} / std::sqrt(ms);
    for (int j = 0; j < d; ++j) v(i, j) = vx(i, j) * inv_rms[i] * vg(0, j);
  }
  const int out = t.next_id();
  return t.push(std::move(v), "rmsnorm",
                [x, gain, inv_rms = std::move(inv_rms), out](Tape<T>& tp) {
    const auto& g = tp.grad_mut(out);
    const auto& vx = tp.value(x);
    const auto& vg = tp.value(gain);
    auto& gx = tp.grad_mut(x);
    auto& gg = tp.grad_mut(gain);
    const int d = vx.cols();
    for (int i = 0; i < vx.rows(); ++i) {
      const T ir = inv_rms[i];
      T dot{};
      for (int j = 0; j < d; ++j) dot += g(i, j) * vg(0, j) * vx(i, j);
      const T corr = dot * ir * ir * ir / static_cast<T>(d);
      for (int j = 0; j < d; ++j) {
        gx(i, j) += g(i, j) * vg(0, j) * ir - vx(i, j) * corr;
        gg(0, j) += g(i, j) * vx(i, j) * ir;
      }
    }
  });
}

/// Sum of all entries, as a 1x1 matrix.
template <typename T>
Var<T> sum(Tape<T>& t, Var<T> a) {
  const auto& va = t.value(a);
  T acc{};
  for (size_t k = 0; k < va.size(); ++k) acc += va[k];
  Matrix<T> v(1, 1);
  v(0, 0) = acc;
  const int out = t.next_id();
  return t.push(std::move(v), "sum", [a, out](Tape<T>& tp) {
    const T g = tp.grad_mut(out)(0, 0);
    auto& ga = tp.grad_mut(a);
    for (size_t k = 0; k < ga.size(); ++k) ga[k] += g;
  });
}

/// Mean token-level cross entropy of row-wise logits against target ids.
template <typename T>
Var<T> cross_entropy_mean(Tape<T>& t, Var<T> logits, const std::vector<int>& targets) {
  const auto& z = t.value(logits);
  got::detail::require(static_cast<int>(targets.size()) == z.rows(),
                       "cross_entropy_mean: " + std::to_string(targets.size()) +
                           " targets vs logits " + z.shape_str());
  const int n = z.rows();
  const int vsz = z.cols();
  Matrix<T> probs(n, vsz);
  T loss{};
  for (int i = 0; i < n; ++i) {
    got::detail::require(targets[i] >= 0 && targets[i] < vsz,
                         "cross_entropy_mean: target id out of vocabulary");
    T mx = z(i, 0);
    for (int j = 1; j < vsz; ++j) mx = std::max(mx, z(i, j));
    T denom{};
    for (int j = 0; j < vsz; ++j) {
      probs(i, j) = std::exp(z(i, j) - mx);
      denom += probs(i, j);
    }
    for (int j = 0; j < vsz; ++j) probs(i, j) /= denom;
    loss += mx + std::log(denom) - z(i, targets[i]);
  }
  Matrix<T> v(1, 1);
  v(0, 0) = loss / static_cast<T>(n);
  const int out = t.next_id();
  return t.push(std::move(v), "cross_entropy_mean",
                [logits, targets, probs = std::move(probs), out](Tape<T>& tp) {
    const T g = tp.grad_mut(out)(0, 0);
    auto& gl = tp.grad_mut(logits);
    const int n = gl.rows();
    const T inv_n = T{1} / static_cast<T>(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < gl.cols(); ++j) gl(i, j) += g * inv_n * probs(i, j);
      gl(i, targets[i]) -= g * inv_n;
    }
  });
}

}  // namespace got::ad
