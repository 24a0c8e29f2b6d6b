#include "inp/np/gaussian.hpp"

#include <cmath>

#include "inp/autodiff/ops.hpp"
#include "inp/core/errors.hpp"

namespace inp::np {

void GaussianDiag::validate() const {
  if (mean.size() != std.size()) throw ValidationError("gaussian: mean/std length mismatch");
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (!std::isfinite(mean[i]) || !std::isfinite(std[i])) throw NumericalError("gaussian: non-finite");
    if (!(std[i] > 0.0)) throw ValidationError("gaussian: std must be positive");
  }
}

GaussianDiag GaussianDiagTensor::values() const { return {mean.to_vector(), std.to_vector()}; }

ad::Tensor kl_divergence(const GaussianDiagTensor& q, const GaussianDiagTensor& p) {
  using namespace ad;
  const Tensor log_ratio = sub(log(p.std), log(q.std));
  const Tensor diff = sub(q.mean, p.mean);
  const Tensor num = add(square(q.std), square(diff));
  const Tensor quad = div(num, scale(square(p.std), 2.0));
  return sum(add_scalar(add(log_ratio, quad), -0.5));
}

}  // namespace inp::np
