#include "inp/np/layers.hpp"

#include <cmath>

#include "inp/autodiff/ops.hpp"
#include "inp/core/errors.hpp"

namespace inp::np {

using ad::Binder;
using ad::Parameter;
using ad::Shape;
using ad::Tensor;

Parameter& ParameterSet::add(std::string name, Shape shape, std::vector<double> init) {
  for (const auto& p : params_) {
    if (p.name() == name) throw ValidationError("parameter set: duplicate name " + name);
  }
  return params_.emplace_back(std::move(name), shape, std::move(init));
}

Parameter& ParameterSet::add_glorot(std::string name, std::size_t in, std::size_t out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(in + out));
  std::vector<double> w(in * out);
  for (auto& v : w) v = a * (2.0 * uniform01(rng) - 1.0);
  return add(std::move(name), {in, out}, std::move(w));
}

Parameter& ParameterSet::add_zeros(std::string name, Shape shape) {
  return add(std::move(name), shape, std::vector<double>(shape.size(), 0.0));
}

std::vector<Parameter*> ParameterSet::pointers() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> ParameterSet::pointers() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

Parameter* ParameterSet::find(const std::string& name) {
  for (auto& p : params_) {
    if (p.name() == name) return &p;
  }
  return nullptr;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.shape().size();
  return n;
}

Linear::Linear(ParameterSet& ps, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng)
    : w_(&ps.add_glorot(prefix + ".w", in, out, rng)),
      b_(&ps.add_zeros(prefix + ".b", {1, out})),
      in_(in),
      out_(out) {}

Tensor Linear::operator()(const Tensor& x, const Binder& bind) const {
  return ad::add_bias(ad::matmul(x, bind(*w_)), bind(*b_));
}

Mlp::Mlp(ParameterSet& ps, const std::string& prefix, std::size_t in,
         const std::vector<std::size_t>& hidden, std::size_t out, Rng& rng) {
  std::size_t prev = in;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    layers_.emplace_back(ps, prefix + ".l" + std::to_string(i), prev, hidden[i], rng);
    prev = hidden[i];
  }
  layers_.emplace_back(ps, prefix + ".out", prev, out, rng);
}

Tensor Mlp::operator()(const Tensor& x, const Binder& bind) const {
  Tensor h = x;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) h = ad::tanh(layers_[i](h, bind));
  return layers_.back()(h, bind);
}

namespace {

// h' = u*h + (1-u)*c
Tensor gru_mix(const Tensor& u, const Tensor& h, const Tensor& c) {
  const Tensor one_minus_u = ad::add_scalar(ad::scale(u, -1.0), 1.0);
  return ad::add(ad::mul(u, h), ad::mul(one_minus_u, c));
}

}  // namespace

DcgruCell::DcgruCell(ParameterSet& ps, const std::string& prefix, std::size_t in, std::size_t hidden,
                     std::size_t order, std::size_t nodes, std::vector<double> transition, Rng& rng)
    : in_(in), hidden_(hidden), order_(order), nodes_(nodes), transition_(std::move(transition)) {
  if (order_ > 0 && transition_.size() != nodes_ * nodes_) {
    throw ValidationError("dcgru: transition matrix must be nodes x nodes");
  }
  for (std::size_t k = 0; k <= order_; ++k) {
    gate_w_.push_back(&ps.add_glorot(prefix + ".gate_w" + std::to_string(k), in + hidden, 2 * hidden, rng));
  }
  gate_b_ = &ps.add(prefix + ".gate_b", {1, 2 * hidden}, std::vector<double>(2 * hidden, 1.0));
  for (std::size_t k = 0; k <= order_; ++k) {
    cand_w_.push_back(&ps.add_glorot(prefix + ".cand_w" + std::to_string(k), in + hidden, hidden, rng));
  }
  cand_b_ = &ps.add_zeros(prefix + ".cand_b", {1, hidden});
}

// Applies the block-diagonal I_B (x) M to rows grouped per batch element.
Tensor DcgruCell::propagate(const Tensor& x) const {
  if (x.rows() % nodes_ != 0) throw ValidationError("dcgru: rows not a multiple of node count");
  return ad::block_mix(Tensor({nodes_, nodes_}, transition_), x);
}

Tensor DcgruCell::diffuse(const Tensor& x, const std::vector<Parameter*>& w, const Binder& bind) const {
  Tensor acc = ad::matmul(x, bind(*w[0]));
  Tensor xk = x;
  for (std::size_t k = 1; k < w.size(); ++k) {
    xk = propagate(xk);
    acc = ad::add(acc, ad::matmul(xk, bind(*w[k])));
  }
  return acc;
}

Tensor DcgruCell::operator()(const Tensor& x, const Tensor& h, const Binder& bind) const {
  if (x.cols() != in_ || h.cols() != hidden_ || x.rows() != h.rows()) {
    throw ValidationError("dcgru: input " + x.shape().str() + " / hidden " + h.shape().str());
  }
  const Tensor xh = ad::concat({x, h}, 1);
  const Tensor gates = ad::sigmoid(ad::add_bias(diffuse(xh, gate_w_, bind), bind(*gate_b_)));
  const Tensor r = ad::slice_cols(gates, 0, hidden_);
  const Tensor u = ad::slice_cols(gates, hidden_, 2 * hidden_);
  const Tensor xrh = ad::concat({x, ad::mul(r, h)}, 1);
  const Tensor c = ad::tanh(ad::add_bias(diffuse(xrh, cand_w_, bind), bind(*cand_b_)));
  return gru_mix(u, h, c);
}

GruCell::GruCell(ParameterSet& ps, const std::string& prefix, std::size_t in, std::size_t hidden, Rng& rng)
    : hidden_(hidden) {
  gate_w_ = &ps.add_glorot(prefix + ".gate_w0", in + hidden, 2 * hidden, rng);
  gate_b_ = &ps.add(prefix + ".gate_b", {1, 2 * hidden}, std::vector<double>(2 * hidden, 1.0));
  cand_w_ = &ps.add_glorot(prefix + ".cand_w0", in + hidden, hidden, rng);
  cand_b_ = &ps.add_zeros(prefix + ".cand_b", {1, hidden});
}

Tensor GruCell::operator()(const Tensor& x, const Tensor& h, const Binder& bind) const {
  if (h.cols() != hidden_ || x.rows() != h.rows()) {
    throw ValidationError("gru: input " + x.shape().str() + " / hidden " + h.shape().str());
  }
  const Tensor xh = ad::concat({x, h}, 1);
  const Tensor gates = ad::sigmoid(ad::add_bias(ad::matmul(xh, bind(*gate_w_)), bind(*gate_b_)));
  const Tensor r = ad::slice_cols(gates, 0, hidden_);
  const Tensor u = ad::slice_cols(gates, hidden_, 2 * hidden_);
  const Tensor xrh = ad::concat({x, ad::mul(r, h)}, 1);
  const Tensor c = ad::tanh(ad::add_bias(ad::matmul(xrh, bind(*cand_w_)), bind(*cand_b_)));
  return gru_mix(u, h, c);
}

}  // namespace inp::np
