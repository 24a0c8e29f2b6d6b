#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "inp/autodiff/tensor.hpp"

namespace inp::ad {

// Differentiable primitives. Every op checks operand shapes (ValidationError
// naming the op and shapes) and that its result is finite (NumericalError).
// Broadcasting exists only in add_bias and repeat_rows.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
/// max(x,0) + log1p(exp(-|x|)).
Tensor softplus(const Tensor& a);
Tensor square(const Tensor& a);

Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);

/// Full reductions to 1x1.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// Column-wise reductions over rows: (r x c) -> (1 x c).
Tensor sum_rows(const Tensor& a);
Tensor mean_rows(const Tensor& a);

/// axis 0 stacks rows, axis 1 stacks columns.
Tensor concat(std::span<const Tensor> parts, int axis);
Tensor concat(std::initializer_list<Tensor> parts, int axis);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);

/// (r x c) + (1 x c) broadcast over rows.
Tensor add_bias(const Tensor& a, const Tensor& bias);
/// (1 x c) -> (n x c).
Tensor repeat_rows(const Tensor& a, std::size_t n);
/// Reinterprets row-major storage with a new shape of equal size.
Tensor reshape(const Tensor& a, Shape shape);
/// Applies the (n x n) matrix m to every consecutive block of n rows of x,
/// i.e. blockdiag(m, ..., m) * x without forming the block-diagonal matrix.
Tensor block_mix(const Tensor& m, const Tensor& x);

/// Enumeration of the primitive kinds, used by the generic dispatcher and by
/// exhaustive gradient checks.
enum class OpKind {
  matmul, add, sub, mul, div, tanh, sigmoid, relu, exp, log, softplus, square,
  scale, add_scalar, sum, mean, sum_rows, mean_rows, concat, slice_rows, slice_cols,
  add_bias, repeat_rows, reshape, block_mix
};

std::string_view op_name(OpKind kind);
const std::vector<OpKind>& all_op_kinds();

/// Extra arguments for ops that take them.
struct OpArgs {
  int axis = 1;
  std::size_t begin = 0;
  std::size_t end = 0;
  double scalar = 1.0;
  std::size_t count = 1;
  Shape shape{};
};

Tensor forward_op(OpKind kind, std::span<const Tensor> inputs, const OpArgs& args = {});

}  // namespace inp::ad
