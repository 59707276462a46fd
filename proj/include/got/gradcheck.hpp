#pragma once

#include <functional>
#include <string>
#include <vector>

#include "got/error.hpp"
#include "got/matrix.hpp"
#include "got/tape.hpp"

namespace got::ad {

/// Builds a scalar (1x1) loss from leaves that mirror the checked inputs.
template <typename T>
using ScalarFn = std::function<Var<T>(Tape<T>&, const std::vector<Var<T>>&)>;

template <typename T>
struct GradCheckEntry {
  std::string name;
  T max_err{};
  int worst_row = -1;
  int worst_col = -1;
  T analytic{};
  T numeric{};
};

template <typename T>
struct GradCheckReport {
  std::vector<GradCheckEntry<T>> inputs;
  T max_err{};

  bool pass(T tol) const { return max_err < tol; }
};

namespace detail {

/// Hybrid error: relative when either side is large enough to trust, else
/// absolute, so near-zero gradients do not blow up the ratio.
template <typename T>
T grad_err(T analytic, T numeric) {
  const T denom = std::max(std::abs(analytic), std::abs(numeric));
  const T diff = std::abs(analytic - numeric);
  return denom >= T{1e-6} ? diff / denom : diff;
}

template <typename T>
T eval_scalar(const ScalarFn<T>& f, const std::vector<Matrix<T>>& inputs) {
  Tape<T> tape;
  std::vector<Var<T>> leaves;
  leaves.reserve(inputs.size());
  for (const auto& m : inputs) leaves.push_back(tape.leaf(m));
  Var<T> out = f(tape, leaves);
  got::detail::require(tape.value(out).rows() == 1 && tape.value(out).cols() == 1,
                       "grad_check: loss must be 1x1, got " + tape.value(out).shape_str());
  tape.check_finite();
  return tape.value(out)(0, 0);
}

}  // namespace detail

/// Central-difference check of every input entry against the tape gradient.
template <typename T>
GradCheckReport<T> grad_check(const ScalarFn<T>& f, std::vector<Matrix<T>> inputs,
                              std::vector<std::string> names = {}, T eps = T{1e-5}) {
  if (inputs.empty()) throw EmptyInputError("grad_check: no inputs");

  Tape<T> tape;
  std::vector<Var<T>> leaves;
  leaves.reserve(inputs.size());
  for (const auto& m : inputs) leaves.push_back(tape.leaf(m));
  Var<T> out = f(tape, leaves);
  got::detail::require(tape.value(out).rows() == 1 && tape.value(out).cols() == 1,
                       "grad_check: loss must be 1x1, got " + tape.value(out).shape_str());
  tape.check_finite();
  tape.backward(out);

  GradCheckReport<T> report;
  for (size_t idx = 0; idx < inputs.size(); ++idx) {
    const Matrix<T> analytic = tape.grad(leaves[idx]);
    GradCheckEntry<T> entry;
    entry.name = idx < names.size() ? names[idx] : "input" + std::to_string(idx);
    for (int i = 0; i < inputs[idx].rows(); ++i) {
      for (int j = 0; j < inputs[idx].cols(); ++j) {
        const T saved = inputs[idx](i, j);
        inputs[idx](i, j) = saved + eps;
        const T fp = detail::eval_scalar(f, inputs);
        inputs[idx](i, j) = saved - eps;
        const T fm = detail::eval_scalar(f, inputs);
        inputs[idx](i, j) = saved;
        const T numeric = (fp - fm) / (T{2} * eps);
        const T err = detail::grad_err(analytic(i, j), numeric);
        if (err > entry.max_err) {
          entry.max_err = err;
          entry.worst_row = i;
          entry.worst_col = j;
          entry.analytic = analytic(i, j);
          entry.numeric = numeric;
        }
      }
    }
    report.max_err = std::max(report.max_err, entry.max_err);
    report.inputs.push_back(std::move(entry));
  }
  return report;
}

}  // namespace got::ad
