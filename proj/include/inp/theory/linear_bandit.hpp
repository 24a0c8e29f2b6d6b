#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "inp/core/rng.hpp"

namespace inp::theory {

/// Bayesian linear model X = <phi(theta), z*> + sigma*eps with normalized
/// features phi = Psi theta / |Psi theta|.
struct LinearBanditState {
  std::size_t d = 0;
  double m = 1.0;
  double sigma = 0.0;
  Eigen::MatrixXd psi;
  Eigen::VectorXd z_star;
  Eigen::MatrixXd v;   // m I + sum phi phi^T
  Eigen::VectorXd b;   // sum X phi
  Eigen::VectorXd z_hat;
  std::size_t k = 0;

  double error() const { return (z_hat - z_star).norm(); }
};

/// Psi with i.i.d. N(0,1) entries, z* uniform on the unit sphere.
LinearBanditState make_state(std::size_t d, double m, double sigma, std::uint64_t seed);
/// Same, with a caller-supplied feature matrix and target.
LinearBanditState make_state(Eigen::MatrixXd psi, Eigen::VectorXd z_star, double m, double sigma);

Eigen::VectorXd feature(const LinearBanditState& s, const Eigen::VectorXd& theta);

/// One observation at theta with standard-normal noise draw `eps`.
void observe(LinearBanditState& s, const Eigen::VectorXd& theta, double eps);

/// Theta whose feature is the smallest-eigenvalue eigenvector of V (lowest
/// index among ties), mapped back through Psi^{-1} and normalized.
Eigen::VectorXd select_greedy_exact(const LinearBanditState& s);

/// Row index of argmax phi^T V^{-2} phi over candidate thetas (rows); ties
/// go to the lowest index.
std::size_t select_greedy_candidates(const LinearBanditState& s, const Eigen::MatrixXd& candidates);

Eigen::VectorXd select_random(std::size_t d, Rng& rng);

enum class Policy { greedy, random };
std::string to_string(Policy p);

struct ScalingConfig {
  std::vector<std::size_t> dims{4, 8, 16, 32};
  std::size_t rounds_per_dim = 40;
  double sigma = 0.5;
  double m = 1.0;
  std::size_t replicates = 50;
  std::uint64_t seed = 0;
};

struct ScalingRow {
  Policy policy;
  std::size_t d;
  std::size_t k;
  std::size_t replicate;
  double error;
};

struct ScalingSummary {
  std::vector<ScalingRow> rows;
  std::vector<double> mean_greedy;  // per entry of dims
  std::vector<double> mean_random;
  std::vector<double> ratio;        // random / greedy
  double slope_greedy = 0.0;        // log mean error vs log d
  double slope_random = 0.0;
  double slope_difference = 0.0;
  double spearman_ratio = 0.0;      // between d and ratio
};

/// Error after k rounds of one policy on one replicate; both policies of a
/// replicate share Psi, z* and the noise sequence.
double run_policy(Policy policy, std::size_t d, std::size_t k, double sigma, double m, std::uint64_t seed,
                  std::size_t replicate);

ScalingSummary scaling_experiment(const ScalingConfig& config);

/// Least-squares slope of y on x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);
/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace inp::theory

#include <ostream>

namespace inp::theory {

/// policy,d,k,replicate,error
void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows);

}  // namespace inp::theory
