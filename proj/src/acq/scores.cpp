#include "inp/acq/scores.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "inp/core/errors.hpp"

namespace inp::acq {

Acquisition acquisition_from_string(const std::string& name) {
  if (name == "lig") return Acquisition::lig;
  if (name == "meanstd") return Acquisition::meanstd;
  if (name == "maxent") return Acquisition::maxent;
  if (name == "random") return Acquisition::random;
  throw ValidationError("unknown acquisition: " + name);
}

std::string to_string(Acquisition a) {
  switch (a) {
    case Acquisition::lig: return "lig";
    case Acquisition::meanstd: return "meanstd";
    case Acquisition::maxent: return "maxent";
    case Acquisition::random: return "random";
  }
  return "?";
}

double kl_diag_gaussian(const np::GaussianDiag& q, const np::GaussianDiag& p) {
  if (q.size() != p.size()) throw ValidationError("kl: length mismatch");
  double kl = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double d = q.mean[j] - p.mean[j];
    kl += std::log(p.std[j] / q.std[j]) + (q.std[j] * q.std[j] + d * d) / (2.0 * p.std[j] * p.std[j]) - 0.5;
  }
  if (!std::isfinite(kl)) throw NumericalError("kl: non-finite result");
  return kl;
}

namespace {

std::size_t row_count(std::span<const double> samples, std::size_t width) {
  if (width == 0 || samples.size() % width != 0) throw ValidationError("samples are not whole rows");
  const std::size_t n = samples.size() / width;
  if (n < 2) throw ValidationError("need at least 2 samples");
  return n;
}

double clamp_kl(double v) { return v < 0.0 ? 0.0 : v; }

struct MeanSe {
  double mean, se;
};

MeanSe mean_se(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double n = static_cast<double>(v.size());
  return {m, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

std::vector<double> draw_latents(const np::GaussianDiag& prior, std::size_t n, Rng& rng) {
  const std::size_t l = prior.size();
  std::vector<double> z(n * l);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < l; ++j) z[i * l + j] = prior.mean[j] + prior.std[j] * standard_normal(rng);
  return z;
}

}  // namespace

double mean_std(std::span<const double> samples, std::size_t width) {
  const std::size_t n = row_count(samples, width);
  double total = 0.0;
  for (std::size_t j = 0; j < width; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += samples[i * width + j];
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (samples[i * width + j] - m) * (samples[i * width + j] - m);
    total += std::sqrt(ss / static_cast<double>(n - 1));
  }
  return total / static_cast<double>(width);
}

double gaussian_entropy(std::span<const double> cov, std::size_t dim, double ridge) {
  if (cov.size() != dim * dim || dim == 0) throw ValidationError("entropy: covariance must be dim x dim");
  Eigen::MatrixXd m = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      cov.data(), dim, dim);
  m.diagonal().array() += ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError("entropy: covariance is not positive definite");
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double h = 0.5 * logdet + 0.5 * static_cast<double>(dim) * (1.0 + std::log(2.0 * std::numbers::pi));
  if (!std::isfinite(h)) throw NumericalError("entropy: non-finite determinant");
  return h;
}

double max_entropy(std::span<const double> samples, std::size_t width, double ridge) {
  const std::size_t n = row_count(samples, width);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(samples.data(), n, width);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  std::vector<double> flat(width * width);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(flat.data(), width, width) = cov;
  return gaussian_entropy(flat, width, ridge);
}

std::vector<double> sample_predictive(const LatentQueryModel& model, std::span<const double> theta, std::size_t n,
                                      Rng& rng) {
  const auto z = draw_latents(model.prior(), n, rng);
  std::vector<double> means, sd;
  model.decode(z, n, theta, means, sd);
  const std::size_t w = model.x_width();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < w; ++j) means[i * w + j] += sd[j] * standard_normal(rng);
  return means;
}

AcquisitionScore latent_information_gain(const LatentQueryModel& model, std::span<const double> theta,
                                         std::size_t n_x, Rng& rng) {
  if (n_x < 1) throw ValidationError("lig: need at least one x sample");
  if (theta.size() != model.theta_width()) throw ValidationError("lig: theta width mismatch");
  const auto prior = model.prior();
  const auto x = sample_predictive(model, theta, n_x, rng);
  const auto posts = model.posterior_each(theta, x, n_x);
  std::vector<double> kls;
  kls.reserve(n_x);
  for (const auto& q : posts) kls.push_back(clamp_kl(kl_diag_gaussian(q, prior)));
  const auto ms = mean_se(kls);
  return {-1, "lig", ms.mean, ms.se, n_x, 0};
}

AcquisitionScore group_latent_information_gain(const LatentQueryModel& model, std::span<const double> thetas,
                                               std::size_t rows, std::size_t n_x, Rng& rng) {
  const std::size_t tw = model.theta_width(), xw = model.x_width();
  if (rows == 0 || thetas.size() != rows * tw) throw ValidationError("group lig: theta shape mismatch");
  const auto prior = model.prior();
  std::vector<double> kls;
  for (std::size_t s = 0; s < n_x; ++s) {
    const auto z = draw_latents(prior, 1, rng);
    std::vector<double> x(rows * xw);
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<double> means, sd;
      model.decode(z, 1, thetas.subspan(r * tw, tw), means, sd);
      for (std::size_t j = 0; j < xw; ++j) x[r * xw + j] = means[j] + sd[j] * standard_normal(rng);
    }
    kls.push_back(clamp_kl(kl_diag_gaussian(model.posterior(thetas, x, rows), prior)));
  }
  const auto ms = mean_se(kls);
  return {-1, "lig", ms.mean, ms.se, n_x, 0};
}

AcquisitionScore eig_nested_mc(const LatentQueryModel& model, std::span<const double> theta, std::size_t n_outer,
                               std::size_t m_inner, Rng& rng) {
  if (m_inner < 2) throw ValidationError("eig: inner sample count must be >= 2");
  if (n_outer < 1) throw ValidationError("eig: outer sample count must be >= 1");
  const auto prior = model.prior();
  const std::size_t w = model.x_width();
  const auto z_out = draw_latents(prior, n_outer, rng);
  const auto z_in = draw_latents(prior, m_inner, rng);
  std::vector<double> mu_out, mu_in, sd;
  model.decode(z_out, n_outer, theta, mu_out, sd);
  model.decode(z_in, m_inner, theta, mu_in, sd);
  double log_norm = 0.0;
  for (double s : sd) log_norm -= std::log(s) + 0.5 * std::log(2.0 * std::numbers::pi);
  auto log_lik = [&](const double* x, const double* mu) {
    double q = 0.0;
    for (std::size_t j = 0; j < w; ++j) {
      const double r = (x[j] - mu[j]) / sd[j];
      q += r * r;
    }
    return log_norm - 0.5 * q;
  };
  std::vector<double> terms(n_outer), x(w), inner(m_inner);
  for (std::size_t n = 0; n < n_outer; ++n) {
    for (std::size_t j = 0; j < w; ++j) x[j] = mu_out[n * w + j] + sd[j] * standard_normal(rng);
    const double own = log_lik(x.data(), &mu_out[n * w]);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < m_inner; ++m) {
      inner[m] = log_lik(x.data(), &mu_in[m * w]);
      mx = std::max(mx, inner[m]);
    }
    double acc = 0.0;
    for (double v : inner) acc += std::exp(v - mx);
    terms[n] = own - (mx + std::log(acc / static_cast<double>(m_inner)));
  }
  const auto ms = mean_se(terms);
  return {-1, "eig", ms.mean, ms.se, n_outer, m_inner};
}

double random_score(std::uint64_t seed, std::uint64_t round, int scenario_id) {
  Rng rng(stream_seed(seed, "random-score", {round, static_cast<std::uint64_t>(scenario_id)}));
  return uniform01(rng);
}

void write_scores_csv_header(std::ostream& out) { out << "round,scenario_id,acquisition,score,stderr,n_samples\n"; }

void write_scores_csv(std::ostream& out, int round, std::span<const AcquisitionScore> scores) {
  out << std::setprecision(17);
  for (const auto& s : scores) {
    out << round << ',' << s.scenario_id << ',' << s.acquisition << ',' << s.score << ',';
    if (!std::isnan(s.stderr_)) out << s.stderr_;
    out << ',' << s.n_samples << '\n';
  }
}

}  // namespace inp::acq
