#include "inp/theory/linear_bandit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "inp/core/errors.hpp"

namespace inp::theory {

LinearBanditState make_state(Eigen::MatrixXd psi, Eigen::VectorXd z_star, double m, double sigma) {
  const std::size_t d = static_cast<std::size_t>(psi.rows());
  if (d == 0 || psi.cols() != psi.rows() || z_star.size() != psi.rows()) {
    throw ValidationError("linear model: psi must be d x d and z* length d");
  }
  if (!(m > 0.0) || !(sigma >= 0.0)) throw ValidationError("linear model: need m > 0 and sigma >= 0");
  LinearBanditState s;
  s.d = d;
  s.m = m;
  s.sigma = sigma;
  s.psi = std::move(psi);
  s.z_star = std::move(z_star);
  s.v = m * Eigen::MatrixXd::Identity(d, d);
  s.b = Eigen::VectorXd::Zero(d);
  s.z_hat = Eigen::VectorXd::Zero(d);
  return s;
}

LinearBanditState make_state(std::size_t d, double m, double sigma, std::uint64_t seed) {
  Rng rng(stream_seed(seed, "bandit-problem"));
  Eigen::MatrixXd psi(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) psi(i, j) = standard_normal(rng);
  Eigen::VectorXd z(d);
  for (std::size_t i = 0; i < d; ++i) z(i) = standard_normal(rng);
  z.normalize();
  return make_state(std::move(psi), std::move(z), m, sigma);
}

Eigen::VectorXd feature(const LinearBanditState& s, const Eigen::VectorXd& theta) {
  Eigen::VectorXd phi = s.psi * theta;
  const double n = phi.norm();
  if (!(n > 0.0)) throw ValidationError("linear model: theta maps to a zero feature");
  return phi / n;
}

void observe(LinearBanditState& s, const Eigen::VectorXd& theta, double eps) {
  const Eigen::VectorXd phi = feature(s, theta);
  const double x = phi.dot(s.z_star) + s.sigma * eps;
  s.v.noalias() += phi * phi.transpose();
  s.b += x * phi;
  Eigen::LLT<Eigen::MatrixXd> llt(s.v);
  if (llt.info() != Eigen::Success) throw NumericalError("linear model: V is not positive definite");
  s.z_hat = llt.solve(s.b);
  s.k += 1;
}

Eigen::VectorXd select_greedy_exact(const LinearBanditState& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.v);
  if (eig.info() != Eigen::Success) throw NumericalError("linear model: eigen decomposition failed");
  // eigenvalues ascending; among (numerically) equal minima keep the lowest index
  const Eigen::VectorXd phi = eig.eigenvectors().col(0);
  Eigen::VectorXd theta = s.psi.partialPivLu().solve(phi);
  const double n = theta.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("linear model: psi is singular");
  return theta / n;
}

std::size_t select_greedy_candidates(const LinearBanditState& s, const Eigen::MatrixXd& candidates) {
  if (candidates.rows() == 0 || static_cast<std::size_t>(candidates.cols()) != s.d) {
    throw ValidationError("linear model: candidates must be n x d");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(s.v);
  std::size_t best = 0;
  double best_score = -INFINITY;
  for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
    const Eigen::VectorXd phi = feature(s, candidates.row(i).transpose());
    const double score = llt.solve(phi).squaredNorm();  // phi^T V^-2 phi
    if (score > best_score) {
      best_score = score;
      best = static_cast<std::size_t>(i);
    }
  }
  return best;
}

Eigen::VectorXd select_random(std::size_t d, Rng& rng) {
  Eigen::VectorXd t(d);
  for (std::size_t i = 0; i < d; ++i) t(i) = standard_normal(rng);
  return t;
}

std::string to_string(Policy p) { return p == Policy::greedy ? "greedy" : "random"; }

double run_policy(Policy policy, std::size_t d, std::size_t k, double sigma, double m, std::uint64_t seed,
                  std::size_t replicate) {
  auto s = make_state(d, m, sigma, stream_seed(seed, {d, replicate}));
  Rng noise(stream_seed(seed, "bandit-noise", {d, replicate}));
  Rng pick(stream_seed(seed, "bandit-random-policy", {d, replicate}));
  for (std::size_t r = 0; r < k; ++r) {
    const Eigen::VectorXd theta = policy == Policy::greedy ? select_greedy_exact(s) : select_random(d, pick);
    observe(s, theta, standard_normal(noise));
  }
  return s.error();
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("slope: need two or more points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxx > 0 && syy > 0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

ScalingSummary scaling_experiment(const ScalingConfig& c) {
  if (c.dims.size() < 2) throw ValidationError("scaling: need at least two dimensions");
  if (c.replicates < 1) throw ValidationError("scaling: need at least one replicate");
  ScalingSummary out;
  std::vector<double> log_d, log_g, log_r, dd;
  for (std::size_t d : c.dims) {
    const std::size_t k = c.rounds_per_dim * d;
    double sg = 0.0, sr = 0.0;
    for (std::size_t rep = 0; rep < c.replicates; ++rep) {
      const double eg = run_policy(Policy::greedy, d, k, c.sigma, c.m, c.seed, rep);
      const double er = run_policy(Policy::random, d, k, c.sigma, c.m, c.seed, rep);
      out.rows.push_back({Policy::greedy, d, k, rep, eg});
      out.rows.push_back({Policy::random, d, k, rep, er});
      sg += eg;
      sr += er;
    }
    const double mg = sg / c.replicates, mr = sr / c.replicates;
    out.mean_greedy.push_back(mg);
    out.mean_random.push_back(mr);
    out.ratio.push_back(mr / mg);
    log_d.push_back(std::log(static_cast<double>(d)));
    log_g.push_back(std::log(mg));
    log_r.push_back(std::log(mr));
    dd.push_back(static_cast<double>(d));
  }
  out.slope_greedy = fit_slope(log_d, log_g);
  out.slope_random = fit_slope(log_d, log_r);
  out.slope_difference = out.slope_random - out.slope_greedy;
  out.spearman_ratio = spearman(dd, out.ratio);
  return out;
}

}  // namespace inp::theory

#include <iomanip>

namespace inp::theory {

void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows) {
  out << "policy,d,k,replicate,error\n" << std::setprecision(17);
  for (const auto& r : rows) out << to_string(r.policy) << ',' << r.d << ',' << r.k << ',' << r.replicate << ',' << r.error << '\n';
}

}  // namespace inp::theory
