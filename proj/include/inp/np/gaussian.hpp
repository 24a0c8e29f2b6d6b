#pragma once

#include <vector>

#include "inp/autodiff/tensor.hpp"

namespace inp::np {

/// Floor added to every softplus-parameterized standard deviation.
inline constexpr double kStdFloor = 1e-3;

/// Diagonal Gaussian as plain values.
struct GaussianDiag {
  std::vector<double> mean;
  std::vector<double> std;

  std::size_t size() const { return mean.size(); }
  void validate() const;
};

/// Diagonal Gaussian on the autodiff tape; both tensors are (1 x L).
struct GaussianDiagTensor {
  ad::Tensor mean;
  ad::Tensor std;

  GaussianDiag values() const;
};

/// Closed-form KL(q || p) summed over dimensions, differentiable.
ad::Tensor kl_divergence(const GaussianDiagTensor& q, const GaussianDiagTensor& p);

}  // namespace inp::np
