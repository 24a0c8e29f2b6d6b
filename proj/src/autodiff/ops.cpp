#include "inp/autodiff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>

#include "inp/autodiff/tape.hpp"
#include "inp/core/errors.hpp"

namespace inp::ad {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

[[noreturn]] void shape_error(std::string_view op, std::initializer_list<Shape> shapes) {
  std::string msg = std::string(op) + ": incompatible shapes";
  for (const auto& s : shapes) msg += " " + s.str();
  throw ValidationError(msg);
}

void require_same(std::string_view op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error(op, {a.shape(), b.shape()});
}

Tape* common_tape(std::span<const Tensor> inputs) {
  Tape* tape = nullptr;
  for (const auto& t : inputs) {
    if (!t.on_tape()) continue;
    if (tape && tape != t.tape()) throw ValidationError("operands recorded on different tapes");
    tape = t.tape();
  }
  return tape;
}

void check_finite(std::string_view op, const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericalError(std::string(op) + ": non-finite result");
  }
}

Tensor finish(std::string_view op, Shape shape, std::vector<double> value,
              std::span<const Tensor> inputs, BackwardFn backward) {
  check_finite(op, value);
  if (Tape* tape = common_tape(inputs)) {
    return tape->record(shape, std::move(value), inputs, std::move(backward));
  }
  return Tensor(shape, std::move(value));
}

// Elementwise unary op whose derivative is expressed through input x and output y.
template <class F, class D>
Tensor unary(std::string_view op, const Tensor& a, F f, D dfdx) {
  const auto in = a.data();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  if (!a.on_tape()) {
    check_finite(op, out);
    return Tensor(a.shape(), std::move(out));
  }
  auto x = a.storage();
  auto y = std::make_shared<std::vector<double>>(out);
  std::array<Tensor, 1> ins{a};
  return finish(op, a.shape(), std::move(out), ins,
                [x, y, dfdx](std::span<const double> g, std::span<std::span<double>> gi) {
                  for (std::size_t i = 0; i < g.size(); ++i) gi[0][i] += g[i] * dfdx((*x)[i], (*y)[i]);
                });
}

double stable_softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_error("matmul", {a.shape(), b.shape()});
  const Shape out_shape{a.rows(), b.cols()};
  std::vector<double> out(out_shape.size());
  MutMap(out.data(), out_shape.rows, out_shape.cols).noalias() =
      ConstMap(a.data().data(), a.rows(), a.cols()) * ConstMap(b.data().data(), b.rows(), b.cols());
  auto av = a.storage();
  auto bv = b.storage();
  const Shape as = a.shape(), bs = b.shape();
  std::array<Tensor, 2> ins{a, b};
  return finish("matmul", out_shape, std::move(out), ins,
                [av, bv, as, bs](std::span<const double> g, std::span<std::span<double>> gi) {
                  ConstMap G(g.data(), as.rows, bs.cols);
                  if (!gi[0].empty()) {
                    MutMap(gi[0].data(), as.rows, as.cols).noalias() +=
                        G * ConstMap(bv->data(), bs.rows, bs.cols).transpose();
                  }
                  if (!gi[1].empty()) {
                    MutMap(gi[1].data(), bs.rows, bs.cols).noalias() +=
                        ConstMap(av->data(), as.rows, as.cols).transpose() * G;
                  }
                });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same("add", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  std::array<Tensor, 2> ins{a, b};
  return finish("add", a.shape(), std::move(out), ins,
                [](std::span<const double> g, std::span<std::span<double>> gi) {
                  for (auto& buf : gi)
                    if (!buf.empty())
                      for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
                });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same("sub", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  std::array<Tensor, 2> ins{a, b};
  return finish("sub", a.shape(), std::move(out), ins,
                [](std::span<const double> g, std::span<std::span<double>> gi) {
                  if (!gi[0].empty())
                    for (std::size_t i = 0; i < g.size(); ++i) gi[0][i] += g[i];
                  if (!gi[1].empty())
                    for (std::size_t i = 0; i < g.size(); ++i) gi[1][i] -= g[i];
                });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same("mul", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  auto av = a.storage();
  auto bv = b.storage();
  std::array<Tensor, 2> ins{a, b};
  return finish("mul", a.shape(), std::move(out), ins,
                [av, bv](std::span<const double> g, std::span<std::span<double>> gi) {
                  if (!gi[0].empty())
                    for (std::size_t i = 0; i < g.size(); ++i) gi[0][i] += g[i] * (*bv)[i];
                  if (!gi[1].empty())
                    for (std::size_t i = 0; i < g.size(); ++i) gi[1][i] += g[i] * (*av)[i];
                });
}

Tensor div(const Tensor& a, const Tensor& b) {
  require_same("div", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] / b.data()[i];
  auto av = a.storage();
  auto bv = b.storage();
  std::array<Tensor, 2> ins{a, b};
  return finish("div", a.shape(), std::move(out), ins,
                [av, bv](std::span<const double> g, std::span<std::span<double>> gi) {
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    const double inv = 1.0 / (*bv)[i];
                    if (!gi[0].empty()) gi[0][i] += g[i] * inv;
                    if (!gi[1].empty()) gi[1][i] -= g[i] * (*av)[i] * inv * inv;
                  }
                });
}

Tensor tanh(const Tensor& a) {
  return unary("tanh", a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary("sigmoid", a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& a) {
  return unary("relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& a) {
  return unary("exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary("log", a, [](double x) { return std::log(x); },
               [](double x, double) { return 1.0 / x; });
}

Tensor softplus(const Tensor& a) {
  return unary("softplus", a, stable_softplus,
               [](double x, double) { return stable_sigmoid(x); });
}

Tensor square(const Tensor& a) {
  return unary("square", a, [](double x) { return x * x; },
               [](double x, double) { return 2.0 * x; });
}

Tensor scale(const Tensor& a, double factor) {
  return unary("scale", a, [factor](double x) { return factor * x; },
               [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double offset) {
  return unary("add_scalar", a, [offset](double x) { return x + offset; },
               [](double, double) { return 1.0; });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double x : a.data()) s += x;
  std::array<Tensor, 1> ins{a};
  return finish("sum", {1, 1}, {s}, ins,
                [](std::span<const double> g, std::span<std::span<double>> gi) {
                  for (auto& v : gi[0]) v += g[0];
                });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) shape_error("mean", {a.shape()});
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor sum_rows(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(c, 0.0);
  const auto in = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j] += in[i * c + j];
  std::array<Tensor, 1> ins{a};
  return finish("sum_rows", {1, c}, std::move(out), ins,
                [r, c](std::span<const double> g, std::span<std::span<double>> gi) {
                  for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < c; ++j) gi[0][i * c + j] += g[j];
                });
}

Tensor mean_rows(const Tensor& a) {
  if (a.rows() == 0) shape_error("mean_rows", {a.shape()});
  return scale(sum_rows(a), 1.0 / static_cast<double>(a.rows()));
}

Tensor concat(std::span<const Tensor> parts, int axis) {
  if (parts.empty()) throw ValidationError("concat: no operands");
  if (axis != 0 && axis != 1) throw ValidationError("concat: axis must be 0 or 1");
  Shape out_shape = parts[0].shape();
  for (std::size_t p = 1; p < parts.size(); ++p) {
    const Shape& s = parts[p].shape();
    if (axis == 1) {
      if (s.rows != out_shape.rows) shape_error("concat(axis=1)", {parts[0].shape(), s});
      out_shape.cols += s.cols;
    } else {
      if (s.cols != out_shape.cols) shape_error("concat(axis=0)", {parts[0].shape(), s});
      out_shape.rows += s.rows;
    }
  }
  std::vector<double> out(out_shape.size());
  std::vector<Shape> shapes;
  shapes.reserve(parts.size());
  if (axis == 0) {
    std::size_t off = 0;
    for (const auto& p : parts) {
      std::copy(p.data().begin(), p.data().end(), out.begin() + off);
      off += p.size();
      shapes.push_back(p.shape());
    }
  } else {
    std::size_t col_off = 0;
    for (const auto& p : parts) {
      for (std::size_t i = 0; i < p.rows(); ++i)
        for (std::size_t j = 0; j < p.cols(); ++j)
          out[i * out_shape.cols + col_off + j] = p.at(i, j);
      col_off += p.cols();
      shapes.push_back(p.shape());
    }
  }
  const std::size_t total_cols = out_shape.cols;
  return finish("concat", out_shape, std::move(out), parts,
                [shapes, axis, total_cols](std::span<const double> g, std::span<std::span<double>> gi) {
                  std::size_t off = 0;
                  for (std::size_t p = 0; p < shapes.size(); ++p) {
                    const Shape& s = shapes[p];
                    if (!gi[p].empty()) {
                      if (axis == 0) {
                        for (std::size_t k = 0; k < s.size(); ++k) gi[p][k] += g[off + k];
                      } else {
                        for (std::size_t i = 0; i < s.rows; ++i)
                          for (std::size_t j = 0; j < s.cols; ++j)
                            gi[p][i * s.cols + j] += g[i * total_cols + off + j];
                      }
                    }
                    off += axis == 0 ? s.size() : s.cols;
                  }
                });
}

Tensor concat(std::initializer_list<Tensor> parts, int axis) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  if (begin >= end || end > a.rows()) {
    throw ValidationError("slice_rows: range [" + std::to_string(begin) + "," + std::to_string(end) +
                          ") invalid for shape " + a.shape().str());
  }
  const std::size_t c = a.cols();
  std::vector<double> out(a.data().begin() + begin * c, a.data().begin() + end * c);
  std::array<Tensor, 1> ins{a};
  return finish("slice_rows", {end - begin, c}, std::move(out), ins,
                [begin, c](std::span<const double> g, std::span<std::span<double>> gi) {
                  for (std::size_t k = 0; k < g.size(); ++k) gi[0][begin * c + k] += g[k];
                });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  if (begin >= end || end > a.cols()) {
    throw ValidationError("slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) +
                          ") invalid for shape " + a.shape().str());
  }
  const std::size_t r = a.rows(), c = a.cols(), w = end - begin;
  std::vector<double> out(r * w);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < w; ++j) out[i * w + j] = a.at(i, begin + j);
  std::array<Tensor, 1> ins{a};
  return finish("slice_cols", {r, w}, std::move(out), ins,
                [r, c, w, begin](std::span<const double> g, std::span<std::span<double>> gi) {
                  for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < w; ++j) gi[0][i * c + begin + j] += g[i * w + j];
                });
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) shape_error("add_bias", {a.shape(), bias.shape()});
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(a.data().begin(), a.data().end());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += bias.data()[j];
  std::array<Tensor, 2> ins{a, bias};
  return finish("add_bias", a.shape(), std::move(out), ins,
                [r, c](std::span<const double> g, std::span<std::span<double>> gi) {
                  if (!gi[0].empty())
                    for (std::size_t k = 0; k < g.size(); ++k) gi[0][k] += g[k];
                  if (!gi[1].empty())
                    for (std::size_t i = 0; i < r; ++i)
                      for (std::size_t j = 0; j < c; ++j) gi[1][j] += g[i * c + j];
                });
}

Tensor repeat_rows(const Tensor& a, std::size_t n) {
  if (a.rows() != 1 || n == 0) shape_error("repeat_rows", {a.shape()});
  const std::size_t c = a.cols();
  std::vector<double> out(n * c);
  for (std::size_t i = 0; i < n; ++i) std::copy(a.data().begin(), a.data().end(), out.begin() + i * c);
  std::array<Tensor, 1> ins{a};
  return finish("repeat_rows", {n, c}, std::move(out), ins,
                [n, c](std::span<const double> g, std::span<std::span<double>> gi) {
                  for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < c; ++j) gi[0][j] += g[i * c + j];
                });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape.size() != a.size()) shape_error("reshape", {a.shape(), shape});
  std::vector<double> out(a.data().begin(), a.data().end());
  std::array<Tensor, 1> ins{a};
  return finish("reshape", shape, std::move(out), ins,
                [](std::span<const double> g, std::span<std::span<double>> gi) {
                  for (std::size_t k = 0; k < g.size(); ++k) gi[0][k] += g[k];
                });
}

Tensor block_mix(const Tensor& m, const Tensor& x) {
  const std::size_t n = m.rows();
  if (n == 0 || m.cols() != n || x.rows() % n != 0) shape_error("block_mix", {m.shape(), x.shape()});
  const std::size_t blocks = x.rows() / n, c = x.cols();
  std::vector<double> out(x.size());
  ConstMap M(m.data().data(), n, n);
  for (std::size_t b = 0; b < blocks; ++b)
    MutMap(out.data() + b * n * c, n, c).noalias() = M * ConstMap(x.data().data() + b * n * c, n, c);
  auto mv = m.storage();
  auto xv = x.storage();
  std::array<Tensor, 2> ins{m, x};
  return finish("block_mix", x.shape(), std::move(out), ins,
                [mv, xv, n, c, blocks](std::span<const double> g, std::span<std::span<double>> gi) {
                  ConstMap M(mv->data(), n, n);
                  for (std::size_t b = 0; b < blocks; ++b) {
                    ConstMap G(g.data() + b * n * c, n, c);
                    if (!gi[0].empty())
                      MutMap(gi[0].data(), n, n).noalias() +=
                          G * ConstMap(xv->data() + b * n * c, n, c).transpose();
                    if (!gi[1].empty())
                      MutMap(gi[1].data() + b * n * c, n, c).noalias() += M.transpose() * G;
                  }
                });
}

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::matmul: return "matmul";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::div: return "div";
    case OpKind::tanh: return "tanh";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::relu: return "relu";
    case OpKind::exp: return "exp";
    case OpKind::log: return "log";
    case OpKind::softplus: return "softplus";
    case OpKind::square: return "square";
    case OpKind::scale: return "scale";
    case OpKind::add_scalar: return "add_scalar";
    case OpKind::sum: return "sum";
    case OpKind::mean: return "mean";
    case OpKind::sum_rows: return "sum_rows";
    case OpKind::mean_rows: return "mean_rows";
    case OpKind::concat: return "concat";
    case OpKind::slice_rows: return "slice_rows";
    case OpKind::slice_cols: return "slice_cols";
    case OpKind::add_bias: return "add_bias";
    case OpKind::repeat_rows: return "repeat_rows";
    case OpKind::reshape: return "reshape";
    case OpKind::block_mix: return "block_mix";
  }
  return "unknown";
}

const std::vector<OpKind>& all_op_kinds() {
  static const std::vector<OpKind> kinds = {
      OpKind::matmul,   OpKind::add,        OpKind::sub,        OpKind::mul,       OpKind::div,
      OpKind::tanh,     OpKind::sigmoid,    OpKind::relu,       OpKind::exp,       OpKind::log,
      OpKind::softplus, OpKind::square,     OpKind::scale,      OpKind::add_scalar, OpKind::sum,
      OpKind::mean,     OpKind::sum_rows,   OpKind::mean_rows,  OpKind::concat,    OpKind::slice_rows,
      OpKind::slice_cols, OpKind::add_bias, OpKind::repeat_rows, OpKind::reshape,
      OpKind::block_mix};
  return kinds;
}

Tensor forward_op(OpKind kind, std::span<const Tensor> in, const OpArgs& args) {
  auto need = [&](std::size_t n) {
    if (in.size() != n) {
      throw ValidationError(std::string(op_name(kind)) + ": expected " + std::to_string(n) +
                            " operands, got " + std::to_string(in.size()));
    }
  };
  switch (kind) {
    case OpKind::matmul: need(2); return matmul(in[0], in[1]);
    case OpKind::add: need(2); return add(in[0], in[1]);
    case OpKind::sub: need(2); return sub(in[0], in[1]);
    case OpKind::mul: need(2); return mul(in[0], in[1]);
    case OpKind::div: need(2); return div(in[0], in[1]);
    case OpKind::tanh: need(1); return tanh(in[0]);
    case OpKind::sigmoid: need(1); return sigmoid(in[0]);
    case OpKind::relu: need(1); return relu(in[0]);
    case OpKind::exp: need(1); return exp(in[0]);
    case OpKind::log: need(1); return log(in[0]);
    case OpKind::softplus: need(1); return softplus(in[0]);
    case OpKind::square: need(1); return square(in[0]);
    case OpKind::scale: need(1); return scale(in[0], args.scalar);
    case OpKind::add_scalar: need(1); return add_scalar(in[0], args.scalar);
    case OpKind::sum: need(1); return sum(in[0]);
    case OpKind::mean: need(1); return mean(in[0]);
    case OpKind::sum_rows: need(1); return sum_rows(in[0]);
    case OpKind::mean_rows: need(1); return mean_rows(in[0]);
    case OpKind::concat: return concat(in, args.axis);
    case OpKind::slice_rows: need(1); return slice_rows(in[0], args.begin, args.end);
    case OpKind::slice_cols: need(1); return slice_cols(in[0], args.begin, args.end);
    case OpKind::add_bias: need(2); return add_bias(in[0], in[1]);
    case OpKind::repeat_rows: need(1); return repeat_rows(in[0], args.count);
    case OpKind::reshape: need(1); return reshape(in[0], args.shape);
    case OpKind::block_mix: need(2); return block_mix(in[0], in[1]);
  }
  throw ValidationError("forward_op: unknown kind");
}

}  // namespace inp::ad
