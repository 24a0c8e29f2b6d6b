#include "inp/autodiff/tensor.hpp"

#include "inp/core/errors.hpp"

namespace inp::ad {

std::string Shape::str() const {
  return "(" + std::to_string(rows) + "," + std::to_string(cols) + ")";
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(shape) {
  if (data.size() != shape.size()) {
    throw ValidationError("tensor: shape " + shape.str() + " needs " + std::to_string(shape.size()) +
                          " values, got " + std::to_string(data.size()));
  }
  data_ = std::make_shared<const std::vector<double>>(std::move(data));
}

Tensor Tensor::zeros(Shape shape) { return Tensor(shape, std::vector<double>(shape.size(), 0.0)); }

Tensor Tensor::filled(Shape shape, double value) {
  return Tensor(shape, std::vector<double>(shape.size(), value));
}

Tensor Tensor::scalar(double value) { return Tensor({1, 1}, {value}); }

Tensor Tensor::row(std::vector<double> values) {
  const auto n = values.size();
  return Tensor({1, n}, std::move(values));
}

std::span<const double> Tensor::data() const {
  if (!data_) return {};
  return {data_->data(), data_->size()};
}

double Tensor::item() const {
  if (shape_.size() != 1) throw ValidationError("item: tensor is not a scalar, shape " + shape_.str());
  return (*data_)[0];
}

std::vector<double> Tensor::to_vector() const { return data_ ? *data_ : std::vector<double>{}; }

Tensor Tensor::detach() const {
  Tensor t;
  t.shape_ = shape_;
  t.data_ = data_;
  return t;
}

Parameter::Parameter(std::string name, Shape shape, std::vector<double> init)
    : name_(std::move(name)), shape_(shape) {
  if (init.size() != shape.size()) {
    throw ValidationError("parameter " + name_ + ": shape " + shape.str() + " needs " +
                          std::to_string(shape.size()) + " values");
  }
  value_ = std::make_shared<std::vector<double>>(std::move(init));
  grad_.assign(shape.size(), 0.0);
}

std::span<double> Parameter::mutable_value() {
  if (value_.use_count() > 1) value_ = std::make_shared<std::vector<double>>(*value_);
  return *value_;
}

void Parameter::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

void Parameter::accumulate_grad(std::span<const double> g) const {
  for (std::size_t i = 0; i < grad_.size(); ++i) grad_[i] += g[i];
}

Tensor Parameter::constant() const {
  Tensor t;
  t.shape_ = shape_;
  t.data_ = value_;
  return t;
}

}  // namespace inp::ad
