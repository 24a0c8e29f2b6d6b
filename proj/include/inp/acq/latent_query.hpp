#pragma once

#include <span>
#include <vector>

#include "inp/np/gaussian.hpp"
#include "inp/np/surrogate.hpp"

namespace inp::acq {

/// What the information-based scores need from a latent-variable model: the
/// current latent belief, the belief after conditioning on extra rows, and a
/// Gaussian decoder.
class LatentQueryModel {
 public:
  virtual ~LatentQueryModel() = default;

  virtual std::size_t theta_width() const = 0;
  virtual std::size_t x_width() const = 0;
  virtual std::size_t latent_width() const = 0;

  virtual np::GaussianDiag prior() const = 0;
  /// Belief after adding `theta`/`x` (both row-major, `rows` rows) to the
  /// conditioning set.
  virtual np::GaussianDiag posterior(std::span<const double> theta, std::span<const double> x,
                                     std::size_t rows) const = 0;
  /// One single-row posterior per row of x, all at the same theta.
  virtual std::vector<np::GaussianDiag> posterior_each(std::span<const double> theta,
                                                       std::span<const double> x, std::size_t rows) const;
  /// Decoder means for each z row (n x latent_width) at one theta row; `std`
  /// receives the per-coordinate observation std.
  virtual void decode(std::span<const double> z, std::size_t n, std::span<const double> theta,
                      std::vector<double>& means, std::vector<double>& std) const = 0;
};

/// z ~ N(0, prior_std^2) in one dimension, x_j = theta_0 * z + N(0, noise_std^2)
/// for j < x_width. Posteriors are exact.
class ConjugateLinearModel final : public LatentQueryModel {
 public:
  ConjugateLinearModel(double prior_std, double noise_std, std::size_t x_width = 1);

  std::size_t theta_width() const override { return 1; }
  std::size_t x_width() const override { return x_width_; }
  std::size_t latent_width() const override { return 1; }
  np::GaussianDiag prior() const override;
  np::GaussianDiag posterior(std::span<const double> theta, std::span<const double> x,
                             std::size_t rows) const override;
  void decode(std::span<const double> z, std::size_t n, std::span<const double> theta,
              std::vector<double>& means, std::vector<double>& std) const override;

  /// I(z; x) for one query at gain theta_0.
  double mutual_information(double theta0) const;

 private:
  double prior_std_, noise_std_;
  std::size_t x_width_;
};

/// A trained surrogate conditioned on a fixed normalized context. The context
/// representation is aggregated once; posteriors add rows incrementally.
class SurrogateQuery final : public LatentQueryModel {
 public:
  SurrogateQuery(const np::Surrogate& surrogate, const np::NormalizedBatch& context);

  std::size_t theta_width() const override { return s_.arch().theta_width(); }
  std::size_t x_width() const override { return s_.arch().x_width(); }
  std::size_t latent_width() const override { return s_.arch().latent_width(); }
  np::GaussianDiag prior() const override { return prior_; }
  np::GaussianDiag posterior(std::span<const double> theta, std::span<const double> x,
                             std::size_t rows) const override;
  std::vector<np::GaussianDiag> posterior_each(std::span<const double> theta, std::span<const double> x,
                                               std::size_t rows) const override;
  void decode(std::span<const double> z, std::size_t n, std::span<const double> theta,
              std::vector<double>& means, std::vector<double>& std) const override;

 private:
  np::GaussianDiag latent_from_sum(std::span<const double> extra_sum, std::size_t extra_rows) const;

  const np::Surrogate& s_;
  std::vector<double> context_sum_;
  std::size_t context_rows_;
  np::GaussianDiag prior_;
  std::vector<double> obs_std_;
};

}  // namespace inp::acq
