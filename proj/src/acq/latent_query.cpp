#include "inp/acq/latent_query.hpp"

#include <cmath>

#include "inp/autodiff/ops.hpp"
#include "inp/core/errors.hpp"

namespace inp::acq {

std::vector<np::GaussianDiag> LatentQueryModel::posterior_each(std::span<const double> theta,
                                                               std::span<const double> x,
                                                               std::size_t rows) const {
  std::vector<np::GaussianDiag> out;
  out.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) out.push_back(posterior(theta, x.subspan(i * x_width(), x_width()), 1));
  return out;
}

ConjugateLinearModel::ConjugateLinearModel(double prior_std, double noise_std, std::size_t x_width)
    : prior_std_(prior_std), noise_std_(noise_std), x_width_(x_width) {
  if (!(prior_std > 0.0) || !(noise_std > 0.0) || x_width == 0) {
    throw ValidationError("conjugate model: stds must be positive");
  }
}

np::GaussianDiag ConjugateLinearModel::prior() const { return {{0.0}, {prior_std_}}; }

np::GaussianDiag ConjugateLinearModel::posterior(std::span<const double> theta, std::span<const double> x,
                                                 std::size_t rows) const {
  if (theta.size() != rows || x.size() != rows * x_width_) throw ValidationError("conjugate model: shape");
  double precision = 1.0 / (prior_std_ * prior_std_);
  double b = 0.0;
  const double nv = noise_std_ * noise_std_;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < x_width_; ++j) {
      precision += theta[i] * theta[i] / nv;
      b += theta[i] * x[i * x_width_ + j] / nv;
    }
  return {{b / precision}, {1.0 / std::sqrt(precision)}};
}

void ConjugateLinearModel::decode(std::span<const double> z, std::size_t n, std::span<const double> theta,
                                  std::vector<double>& means, std::vector<double>& std) const {
  means.assign(n * x_width_, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < x_width_; ++j) means[i * x_width_ + j] = theta[0] * z[i];
  std.assign(x_width_, noise_std_);
}

double ConjugateLinearModel::mutual_information(double theta0) const {
  const double snr = static_cast<double>(x_width_) * theta0 * theta0 * prior_std_ * prior_std_ /
                     (noise_std_ * noise_std_);
  return 0.5 * std::log1p(snr);
}

SurrogateQuery::SurrogateQuery(const np::Surrogate& surrogate, const np::NormalizedBatch& context)
    : s_(surrogate), context_rows_(context.size()) {
  if (context.size() == 0) throw ValidationError("surrogate query: empty context");
  const auto r = s_.model().represent(context.theta, context.x, ad::Binder{});
  context_sum_ = ad::sum_rows(r).to_vector();
  prior_ = latent_from_sum({}, 0);
  obs_std_ = s_.model().obs_std(ad::Binder{}).to_vector();
}

np::GaussianDiag SurrogateQuery::latent_from_sum(std::span<const double> extra_sum, std::size_t extra_rows) const {
  std::vector<double> mean = context_sum_;
  for (std::size_t j = 0; j < extra_sum.size(); ++j) mean[j] += extra_sum[j];
  const double n = static_cast<double>(context_rows_ + extra_rows);
  for (auto& v : mean) v /= n;
  const std::size_t w = mean.size();
  const ad::Tensor r({1, w}, std::move(mean));
  return s_.model().latent(r, ad::Binder{}).values();
}

np::GaussianDiag SurrogateQuery::posterior(std::span<const double> theta, std::span<const double> x,
                                           std::size_t rows) const {
  if (theta.size() != rows * theta_width() || x.size() != rows * x_width()) {
    throw ValidationError("surrogate query: posterior shape mismatch");
  }
  const ad::Tensor th({rows, theta_width()}, {theta.begin(), theta.end()});
  const ad::Tensor xs({rows, x_width()}, {x.begin(), x.end()});
  const auto extra = ad::sum_rows(s_.model().represent(th, xs, ad::Binder{})).to_vector();
  return latent_from_sum(extra, rows);
}

std::vector<np::GaussianDiag> SurrogateQuery::posterior_each(std::span<const double> theta,
                                                             std::span<const double> x, std::size_t rows) const {
  if (theta.size() != theta_width() || x.size() != rows * x_width()) {
    throw ValidationError("surrogate query: posterior shape mismatch");
  }
  const ad::Tensor th = ad::repeat_rows(ad::Tensor({1, theta_width()}, {theta.begin(), theta.end()}), rows);
  const ad::Tensor xs({rows, x_width()}, {x.begin(), x.end()});
  const auto r = s_.model().represent(th, xs, ad::Binder{});
  const std::size_t w = r.cols();
  std::vector<np::GaussianDiag> out;
  out.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) out.push_back(latent_from_sum(r.data().subspan(i * w, w), 1));
  return out;
}

void SurrogateQuery::decode(std::span<const double> z, std::size_t n, std::span<const double> theta,
                            std::vector<double>& means, std::vector<double>& std) const {
  const ad::Tensor zt({n, latent_width()}, {z.begin(), z.end()});
  const ad::Tensor th = ad::repeat_rows(ad::Tensor({1, theta_width()}, {theta.begin(), theta.end()}), n);
  means = s_.model().decode_mean(zt, th, ad::Binder{}).to_vector();
  std = obs_std_;
}

}  // namespace inp::acq
