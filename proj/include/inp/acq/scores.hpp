#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "inp/acq/latent_query.hpp"
#include "inp/core/rng.hpp"

namespace inp::acq {

enum class Acquisition { lig, meanstd, maxent, random };

Acquisition acquisition_from_string(const std::string& name);
std::string to_string(Acquisition a);

struct AcquisitionScore {
  int scenario_id = -1;
  std::string acquisition;
  double score = 0.0;
  double stderr_ = std::numeric_limits<double>::quiet_NaN();  // NaN when undefined
  std::size_t n_samples = 0;
  std::size_t n_inner = 0;
};

/// sum_j log(p.std/q.std) + (q.std^2 + (q.mean - p.mean)^2) / (2 p.std^2) - 1/2
double kl_diag_gaussian(const np::GaussianDiag& q, const np::GaussianDiag& p);

/// Average over coordinates of the sample std (n-1) across rows.
double mean_std(std::span<const double> samples, std::size_t width);

/// Differential entropy of N(., cov + ridge*I), dim x dim row-major.
double gaussian_entropy(std::span<const double> cov, std::size_t dim, double ridge = 0.0);

inline constexpr double kEntropyRidge = 1e-6;

/// Gaussian entropy of the empirical covariance (n-1) of the samples.
double max_entropy(std::span<const double> samples, std::size_t width, double ridge = kEntropyRidge);

/// Predictive draws at theta: z from the prior, decoded mean plus
/// observation noise. n x x_width row-major.
std::vector<double> sample_predictive(const LatentQueryModel& model, std::span<const double> theta,
                                      std::size_t n, Rng& rng);

/// Mean KL(q(z | x_hat, theta, S) || q(z | S)) over n_x predictive draws.
AcquisitionScore latent_information_gain(const LatentQueryModel& model, std::span<const double> theta,
                                         std::size_t n_x, Rng& rng);

/// Joint LIG of several thetas: one shared latent draw per sample, all rows
/// added to the conditioning set together. `thetas` is rows x theta_width.
AcquisitionScore group_latent_information_gain(const LatentQueryModel& model, std::span<const double> thetas,
                                               std::size_t rows, std::size_t n_x, Rng& rng);

/// Nested Monte Carlo EIG with N outer and M inner latent draws from the
/// prior; the inner marginal uses log-sum-exp.
AcquisitionScore eig_nested_mc(const LatentQueryModel& model, std::span<const double> theta,
                               std::size_t n_outer, std::size_t m_inner, Rng& rng);

/// Uniform(0,1) keyed by (seed, round, scenario id).
double random_score(std::uint64_t seed, std::uint64_t round, int scenario_id);

/// round,scenario_id,acquisition,score,stderr,n_samples
void write_scores_csv_header(std::ostream& out);
void write_scores_csv(std::ostream& out, int round, std::span<const AcquisitionScore> scores);

}  // namespace inp::acq
