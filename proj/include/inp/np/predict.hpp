#pragma once

#include <span>
#include <vector>

#include "inp/core/rng.hpp"
#include "inp/np/surrogate.hpp"

namespace inp::np {

/// Sampled predictions for one theta, in normalized x units.
struct Prediction {
  std::size_t n_samples = 0;
  std::size_t x_width = 0;
  std::vector<double> samples;       // n_samples x x_width, decoded mean + obs noise
  std::vector<double> decoded_mean;  // average of the decoded means
  std::vector<double> mean;          // empirical over samples
  std::vector<double> std;           // empirical over samples, n-1

  std::span<const double> sample(std::size_t i) const {
    return std::span(samples).subspan(i * x_width, x_width);
  }
};

/// q(z | context) for a normalized context batch.
GaussianDiag context_posterior(const Surrogate& s, const NormalizedBatch& context);

/// Draws n_z latents from `prior`, decodes each at `theta_norm` (one row) and
/// adds observation noise.
Prediction predict(const Surrogate& s, const GaussianDiag& prior, std::span<const double> theta_norm,
                   std::size_t n_z, Rng& rng);

/// Mean and sample std (n-1) of each column of an n x width matrix.
void column_stats(std::span<const double> rows, std::size_t width, std::vector<double>& mean,
                  std::vector<double>& std);

}  // namespace inp::np
