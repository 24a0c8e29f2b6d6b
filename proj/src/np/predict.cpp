#include "inp/np/predict.hpp"

#include <cmath>

#include "inp/autodiff/ops.hpp"
#include "inp/core/errors.hpp"

namespace inp::np {

GaussianDiag context_posterior(const Surrogate& s, const NormalizedBatch& context) {
  if (context.size() == 0) throw ValidationError("predict: empty context");
  return s.model().encode(context.theta, context.x, ad::Binder{}).values();
}

void column_stats(std::span<const double> rows, std::size_t width, std::vector<double>& mean,
                  std::vector<double>& std) {
  const std::size_t n = rows.size() / width;
  if (n < 2) throw ValidationError("predict: need at least 2 samples for a std");
  mean.assign(width, 0.0);
  std.assign(width, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < width; ++j) mean[j] += rows[i * width + j];
  for (auto& m : mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < width; ++j) {
      const double d = rows[i * width + j] - mean[j];
      std[j] += d * d;
    }
  for (auto& v : std) v = std::sqrt(v / static_cast<double>(n - 1));
}

Prediction predict(const Surrogate& s, const GaussianDiag& prior, std::span<const double> theta_norm,
                   std::size_t n_z, Rng& rng) {
  if (n_z < 2) throw ValidationError("predict: n_z must be >= 2");
  const auto& arch = s.arch();
  const std::size_t lw = arch.latent_width(), xw = arch.x_width();
  if (prior.size() != lw) throw ValidationError("predict: prior width mismatch");
  if (theta_norm.size() != arch.theta_width()) throw ValidationError("predict: theta width mismatch");
  std::vector<double> z(n_z * lw);
  for (std::size_t i = 0; i < n_z; ++i)
    for (std::size_t j = 0; j < lw; ++j) z[i * lw + j] = prior.mean[j] + prior.std[j] * standard_normal(rng);
  const ad::Tensor theta_row({1, arch.theta_width()}, {theta_norm.begin(), theta_norm.end()});
  const ad::Binder bind{};
  const ad::Tensor mu = s.model().decode_mean(ad::Tensor({n_z, lw}, std::move(z)), ad::repeat_rows(theta_row, n_z), bind);
  const auto sigma = s.model().obs_std(bind).to_vector();

  Prediction p;
  p.n_samples = n_z;
  p.x_width = xw;
  p.samples = mu.to_vector();
  p.decoded_mean.assign(xw, 0.0);
  for (std::size_t i = 0; i < n_z; ++i)
    for (std::size_t j = 0; j < xw; ++j) {
      p.decoded_mean[j] += p.samples[i * xw + j] / static_cast<double>(n_z);
      p.samples[i * xw + j] += sigma[j] * standard_normal(rng);
    }
  column_stats(p.samples, xw, p.mean, p.std);
  return p;
}

}  // namespace inp::np
