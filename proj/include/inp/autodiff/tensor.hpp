#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace inp::ad {

/// Rank-2 shape. Vectors are 1 x n rows, scalars 1 x 1.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

class Tape;
class Parameter;

/// Dense row-major float64 matrix. A tensor either is a constant or refers to
/// a node on a Tape, in which case operations on it are recorded.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape);
  static Tensor filled(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor row(std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rows() const { return shape_.rows; }
  std::size_t cols() const { return shape_.cols; }
  std::size_t size() const { return shape_.size(); }
  bool empty() const { return data_ == nullptr; }

  std::span<const double> data() const;
  double at(std::size_t r, std::size_t c) const { return (*data_)[r * shape_.cols + c]; }
  double item() const;
  std::vector<double> to_vector() const;

  bool on_tape() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int node() const { return node_; }
  std::uint64_t generation() const { return generation_; }

  /// Same values, detached from any tape.
  Tensor detach() const;

  const std::shared_ptr<const std::vector<double>>& storage() const { return data_; }

 private:
  friend class Tape;
  friend class Parameter;

  Shape shape_;
  std::shared_ptr<const std::vector<double>> data_;
  Tape* tape_ = nullptr;
  int node_ = -1;
  std::uint64_t generation_ = 0;
};

/// Learnable tensor with a gradient slot. Values are copy-on-write so that
/// constant snapshots handed out by constant() stay immutable.
class Parameter {
 public:
  Parameter(std::string name, Shape shape, std::vector<double> init);

  const std::string& name() const { return name_; }
  const Shape& shape() const { return shape_; }

  std::span<const double> value() const { return *value_; }
  std::span<double> mutable_value();
  std::span<const double> grad() const { return grad_; }
  std::span<double> mutable_grad() { return grad_; }
  void zero_grad();

  /// Gradient accumulation is allowed through const access; training owns
  /// the parameter exclusively while a tape is live.
  void accumulate_grad(std::span<const double> g) const;

  /// Untracked view of the current value.
  Tensor constant() const;

 private:
  std::string name_;
  Shape shape_;
  std::shared_ptr<std::vector<double>> value_;
  mutable std::vector<double> grad_;
};

}  // namespace inp::ad
