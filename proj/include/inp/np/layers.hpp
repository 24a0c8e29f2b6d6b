#pragma once

#include <deque>
#include <string>
#include <vector>

#include "inp/autodiff/tape.hpp"
#include "inp/core/rng.hpp"

namespace inp::np {

/// Owns parameters with stable addresses, in creation order.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet&) = delete;
  ParameterSet& operator=(const ParameterSet&) = delete;

  ad::Parameter& add(std::string name, ad::Shape shape, std::vector<double> init);
  /// Glorot-uniform weight drawn from rng.
  ad::Parameter& add_glorot(std::string name, std::size_t in, std::size_t out, Rng& rng);
  ad::Parameter& add_zeros(std::string name, ad::Shape shape);

  std::vector<ad::Parameter*> pointers();
  std::vector<const ad::Parameter*> pointers() const;
  ad::Parameter* find(const std::string& name);
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

 private:
  std::deque<ad::Parameter> params_;
};

/// y = x W + b.
class Linear {
 public:
  Linear() = default;
  Linear(ParameterSet& ps, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng);

  ad::Tensor operator()(const ad::Tensor& x, const ad::Binder& bind) const;
  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }
  const ad::Parameter& weight() const { return *w_; }
  const ad::Parameter& bias() const { return *b_; }

 private:
  ad::Parameter* w_ = nullptr;
  ad::Parameter* b_ = nullptr;
  std::size_t in_ = 0, out_ = 0;
};

/// tanh hidden layers followed by a linear output layer. With no hidden
/// widths this is a single Linear.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParameterSet& ps, const std::string& prefix, std::size_t in,
      const std::vector<std::size_t>& hidden, std::size_t out, Rng& rng);

  ad::Tensor operator()(const ad::Tensor& x, const ad::Binder& bind) const;

 private:
  std::vector<Linear> layers_;
};

/// GRU cell whose linear maps are diffusion operators
///   sum_{k=0..K} M^k X W_k
/// acting on rows grouped in blocks of `nodes` (one block per batch element).
/// With K=0 it is a plain GRU applied row by row.
class DcgruCell {
 public:
  DcgruCell() = default;
  /// `transition` is the nodes x nodes row-normalized matrix (ignored for K=0).
  DcgruCell(ParameterSet& ps, const std::string& prefix, std::size_t in, std::size_t hidden,
            std::size_t order, std::size_t nodes, std::vector<double> transition, Rng& rng);

  /// x: (B*nodes x in), h: (B*nodes x hidden).
  ad::Tensor operator()(const ad::Tensor& x, const ad::Tensor& h, const ad::Binder& bind) const;

  std::size_t hidden() const { return hidden_; }
  std::size_t order() const { return order_; }

 private:
  ad::Tensor diffuse(const ad::Tensor& x, const std::vector<ad::Parameter*>& w,
                     const ad::Binder& bind) const;
  ad::Tensor propagate(const ad::Tensor& x) const;

  std::size_t in_ = 0, hidden_ = 0, order_ = 0, nodes_ = 1;
  std::vector<double> transition_;
  std::vector<ad::Parameter*> gate_w_, cand_w_;
  ad::Parameter* gate_b_ = nullptr;
  ad::Parameter* cand_b_ = nullptr;
};

/// Plain GRU cell; parameter names match a DcgruCell with K=0.
class GruCell {
 public:
  GruCell() = default;
  GruCell(ParameterSet& ps, const std::string& prefix, std::size_t in, std::size_t hidden, Rng& rng);

  ad::Tensor operator()(const ad::Tensor& x, const ad::Tensor& h, const ad::Binder& bind) const;
  std::size_t hidden() const { return hidden_; }

 private:
  std::size_t hidden_ = 0;
  ad::Parameter* gate_w_ = nullptr;
  ad::Parameter* gate_b_ = nullptr;
  ad::Parameter* cand_w_ = nullptr;
  ad::Parameter* cand_b_ = nullptr;
};

}  // namespace inp::np
