#pragma once

#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "inp/autodiff/tensor.hpp"

namespace inp::ad {

/// Receives the output gradient and one gradient buffer per parent (empty
/// span when that parent is not tracked) and accumulates into the buffers.
using BackwardFn =
    std::function<void(std::span<const double> grad_out, std::span<std::span<double>> grad_in)>;

/// Define-by-run tape. Nodes are appended in execution order, so every node's
/// parents precede it and a single reverse sweep is a valid topological order.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf for a parameter; gradients flow into Parameter::mutable_grad() on
  /// backward(). Watching the same parameter twice returns the same node.
  Tensor watch(const Parameter& param);

  /// Records an op result. `inputs` are the op's operands in order; constants
  /// (or tensors from no tape) simply receive no gradient.
  Tensor record(Shape shape, std::vector<double> value, std::span<const Tensor> inputs,
                BackwardFn backward);

  /// Reverse sweep from a 1x1 loss. Accumulates into watched parameters and
  /// clears the tape.
  void backward(const Tensor& loss);

  void clear();
  std::size_t size() const { return nodes_.size(); }
  std::uint64_t generation() const { return generation_; }

 private:
  struct Node {
    Shape shape;
    std::vector<int> parents;  // -1 for untracked operands
    BackwardFn backward;
    const Parameter* param = nullptr;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, Tensor> watched_;
  std::uint64_t generation_ = 1;
};

/// Resolves parameters to tensors: tracked leaves when a tape is present,
/// constant snapshots otherwise (inference).
struct Binder {
  Tape* tape = nullptr;

  Tensor operator()(const Parameter& p) const { return tape ? tape->watch(p) : p.constant(); }
};

}  // namespace inp::ad
