#include "inp/autodiff/tape.hpp"

#include "inp/core/errors.hpp"

namespace inp::ad {

Tensor Tape::watch(const Parameter& param) {
  if (auto it = watched_.find(&param); it != watched_.end()) return it->second;
  Tensor t = param.constant();
  t.tape_ = this;
  t.generation_ = generation_;
  t.node_ = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{param.shape(), {}, {}, &param});
  watched_.emplace(&param, t);
  return t;
}

Tensor Tape::record(Shape shape, std::vector<double> value, std::span<const Tensor> inputs,
                    BackwardFn backward) {
  Node node{shape, {}, std::move(backward), nullptr};
  node.parents.reserve(inputs.size());
  for (const auto& in : inputs) {
    if (in.tape_ == this) {
      if (in.generation_ != generation_) {
        throw ValidationError("tape: operand belongs to a cleared tape generation");
      }
      node.parents.push_back(in.node_);
    } else {
      node.parents.push_back(-1);
    }
  }
  Tensor t(shape, std::move(value));
  t.tape_ = this;
  t.generation_ = generation_;
  t.node_ = static_cast<int>(nodes_.size());
  nodes_.push_back(std::move(node));
  return t;
}

void Tape::backward(const Tensor& loss) {
  if (loss.tape_ != this || loss.generation_ != generation_) {
    throw ValidationError("backward: loss is not recorded on this tape");
  }
  if (loss.size() != 1) throw ValidationError("backward: loss must be scalar, got " + loss.shape().str());
  if (nodes_.empty()) throw ValidationError("backward: tape is empty");

  std::vector<std::vector<double>> grads(nodes_.size());
  grads[loss.node_].assign(1, 1.0);

  std::vector<std::span<double>> in_buffers;
  for (int i = loss.node_; i >= 0; --i) {
    Node& node = nodes_[i];
    auto& g = grads[i];
    if (g.empty()) continue;
    if (node.param) {
      node.param->accumulate_grad(g);
      continue;
    }
    in_buffers.assign(node.parents.size(), std::span<double>{});
    bool any = false;
    for (std::size_t p = 0; p < node.parents.size(); ++p) {
      const int pid = node.parents[p];
      if (pid < 0) continue;
      auto& pg = grads[pid];
      if (pg.empty()) pg.assign(nodes_[pid].shape.size(), 0.0);
      in_buffers[p] = pg;
      any = true;
    }
    if (any) node.backward(g, in_buffers);
    g.clear();
    g.shrink_to_fit();
  }
  clear();
}

void Tape::clear() {
  nodes_.clear();
  watched_.clear();
  ++generation_;
}

}  // namespace inp::ad
