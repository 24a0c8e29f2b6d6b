#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "inp/acq/knn_entropy.hpp"
#include "inp/autodiff/ops.hpp"
#include "inp/acq/scores.hpp"
#include "inp/core/errors.hpp"
#include "inp/np/training.hpp"

using namespace inp;
using namespace inp::acq;
using np::GaussianDiag;

namespace {

/// Decoder that ignores z.
class FlatModel final : public LatentQueryModel {
 public:
  std::size_t theta_width() const override { return 1; }
  std::size_t x_width() const override { return 2; }
  std::size_t latent_width() const override { return 1; }
  GaussianDiag prior() const override { return {{0.0}, {1.0}}; }
  GaussianDiag posterior(std::span<const double>, std::span<const double>, std::size_t) const override {
    return prior();
  }
  void decode(std::span<const double>, std::size_t n, std::span<const double> theta, std::vector<double>& means,
              std::vector<double>& std) const override {
    means.assign(n * 2, theta[0]);
    std.assign(2, 0.5);
  }
};

np::Surrogate tiny_surrogate_with_context(np::NormalizedBatch& ctx) {
  np::NpArchitecture a;
  a.theta_dim = 1;
  a.x_dim = 1;
  a.horizon = 3;
  a.latent_dim = 2;
  a.encoder_widths = {6, 6};
  a.decoder_widths = {};
  a.init_seed = 4;
  np::Surrogate s(a);
  np::SampleSet data;
  Rng rng(8);
  for (int i = 0; i < 10; ++i) data.append(std::vector<double>{uniform01(rng)}, np::draw_normals(3, rng), i);
  s.fit_normalizers(data);
  ctx = s.normalize(data);
  return s;
}

}  // namespace

TEST_CASE("kl oracles") {
  const GaussianDiag a{{1.0}, {1.0}}, b{{0.0}, {1.0}};
  CHECK(kl_diag_gaussian(a, a) == 0.0);
  CHECK(std::abs(kl_diag_gaussian(a, b) - 0.5) <= 1e-10);
  CHECK_THROWS_AS(kl_diag_gaussian(a, GaussianDiag{{0.0, 1.0}, {1.0, 1.0}}), ValidationError);
}

TEST_CASE("kl matches a Monte Carlo estimate in 5 dimensions") {
  Rng rng(17);
  GaussianDiag q, p;
  for (int j = 0; j < 5; ++j) {
    q.mean.push_back(standard_normal(rng));
    q.std.push_back(0.5 + uniform01(rng));
    p.mean.push_back(standard_normal(rng));
    p.std.push_back(0.5 + uniform01(rng));
  }
  const std::size_t n = 1'000'000;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double lr = 0.0;
    for (int j = 0; j < 5; ++j) {
      const double x = q.mean[j] + q.std[j] * standard_normal(rng);
      const double zq = (x - q.mean[j]) / q.std[j], zp = (x - p.mean[j]) / p.std[j];
      lr += -std::log(q.std[j]) - 0.5 * zq * zq + std::log(p.std[j]) + 0.5 * zp * zp;
    }
    sum += lr;
    sum2 += lr * lr;
  }
  const double m = sum / n, se = std::sqrt((sum2 / n - m * m) / n);
  CHECK(std::abs(m - kl_diag_gaussian(q, p)) < 3 * se);
}

TEST_CASE("mean std") {
  const std::vector<double> same{1, 2, 3, 1, 2, 3};
  CHECK(mean_std(same, 3) == 0.0);
  const std::vector<double> two{0, 0, 0, 0, 2, 0};
  CHECK(mean_std(two, 3) == doctest::Approx(std::sqrt(2.0) / 3.0).epsilon(1e-15));
  const std::vector<double> a{0.1, 0.5, 0.9, -0.3, 0.4, 0.2}, b{0.4, 0.2, 0.9, -0.3, 0.1, 0.5};
  CHECK(mean_std(a, 2) == doctest::Approx(mean_std(b, 2)).epsilon(1e-15));
  CHECK_THROWS_AS(mean_std(std::vector<double>{1, 2}, 2), ValidationError);
}

TEST_CASE("gaussian entropy oracles") {
  const std::vector<double> eye{1, 0, 0, 1};
  CHECK(std::abs(gaussian_entropy(eye, 2) - (1.0 + std::log(2.0 * std::numbers::pi))) <= 1e-10);
  const std::vector<double> diag{0.5, 0, 0, 0, 2.0, 0, 0, 0, 7.0};
  double sum = 0.0;
  for (double v : {0.5, 2.0, 7.0}) sum += 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * v);
  CHECK(std::abs(gaussian_entropy(diag, 3) - sum) <= 1e-10);
  CHECK_THROWS_AS(gaussian_entropy(std::vector<double>{-1, 0, 0, 1}, 2), NumericalError);
}

TEST_CASE("max entropy with fewer samples than dims is finite and increases with the ridge") {
  Rng rng(3);
  std::vector<double> samples(5 * 12);
  for (auto& v : samples) v = standard_normal(rng);
  double prev = -INFINITY;
  for (double ridge : {1e-8, 1e-6, 1e-4, 1e-2, 1.0}) {
    const double h = max_entropy(samples, 12, ridge);
    CHECK(std::isfinite(h));
    CHECK(h > prev);
    prev = h;
  }
}

TEST_CASE("eig nested mc matches the linear-Gaussian mutual information") {
  ConjugateLinearModel m(1.0, 0.5);
  const std::vector<double> th{1.0};
  Rng rng(5);
  const auto eig = eig_nested_mc(m, th, 2000, 2000, rng);
  const double mi = 0.5 * std::log(1.0 + 1.0 / 0.25);
  CHECK(m.mutual_information(1.0) == doctest::Approx(mi));
  CHECK(std::abs(eig.score - mi) < 3 * eig.stderr_);
  CHECK_THROWS_AS(eig_nested_mc(m, th, 10, 1, rng), ValidationError);
}

TEST_CASE("eig is zero when the decoder ignores z") {
  FlatModel m;
  const std::vector<double> th{0.3};
  Rng rng(6);
  const auto eig = eig_nested_mc(m, th, 2000, 2000, rng);
  CHECK(std::abs(eig.score) <= 3 * eig.stderr_ + 1e-12);
}

TEST_CASE("lig and eig agree on the conjugate model") {
  ConjugateLinearModel m(1.0, 0.7, 2);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::vector<double> th{0.8};
    Rng r1(stream_seed(seed, "lig")), r2(stream_seed(seed, "eig"));
    const auto lig = latent_information_gain(m, th, 2000, r1);
    const auto eig = eig_nested_mc(m, th, 2000, 2000, r2);
    INFO("seed " << seed << " lig " << lig.score << " eig " << eig.score);
    CHECK(std::abs(lig.score - eig.score) <= 3 * std::hypot(lig.stderr_, eig.stderr_));
    CHECK(std::abs(lig.score - m.mutual_information(0.8)) <= 3 * lig.stderr_);
  }
}

TEST_CASE("lig is zero when the encoder ignores its inputs and deterministic under a seed") {
  np::NormalizedBatch ctx;
  auto s = tiny_surrogate_with_context(ctx);
  SurrogateQuery q(s, ctx);
  const std::vector<double> th{0.2};
  Rng a(1), b(1);
  CHECK(latent_information_gain(q, th, 30, a).score == latent_information_gain(q, th, 30, b).score);

  auto* w = s.model().parameters().find("enc.l0.w");
  for (auto& v : w->mutable_value()) v = 0.0;
  SurrogateQuery flat(s, ctx);
  for (double t : {-1.0, 0.0, 2.5}) {
    Rng r(2);
    CHECK(latent_information_gain(flat, std::vector<double>{t}, 30, r).score <= 1e-12);
  }
}

TEST_CASE("surrogate query posterior equals re-encoding context plus rows") {
  np::NormalizedBatch ctx;
  auto s = tiny_surrogate_with_context(ctx);
  SurrogateQuery q(s, ctx);
  const std::vector<double> th{0.4}, x{0.1, -0.2, 0.3};
  const auto inc = q.posterior(th, x, 1);
  const ad::Tensor all_th = ad::concat({ctx.theta, ad::Tensor({1, 1}, th)}, 0);
  const ad::Tensor all_x = ad::concat({ctx.x, ad::Tensor({1, 3}, x)}, 0);
  const auto direct = s.model().encode(all_th, all_x, {}).values();
  for (std::size_t j = 0; j < inc.size(); ++j) CHECK(inc.mean[j] == doctest::Approx(direct.mean[j]).epsilon(1e-12));
  const auto each = q.posterior_each(th, x, 1);
  CHECK(each[0].mean[0] == doctest::Approx(inc.mean[0]).epsilon(1e-12));
}

TEST_CASE("group lig of one row equals the single-row estimator in expectation") {
  ConjugateLinearModel m(1.0, 0.5);
  Rng r(9);
  const std::vector<double> two{1.0, 1.0};
  const auto g = group_latent_information_gain(m, two, 2, 4000, r);
  // two rows at gain 1 carry the information of one row with twice the snr
  const double mi = 0.5 * std::log1p(2.0 * 1.0 / 0.25);
  CHECK(std::abs(g.score - mi) <= 3 * g.stderr_);
}

TEST_CASE("kozachenko-leonenko oracles") {
  const std::size_t n = 100'000;
  Rng rng(1);
  std::vector<double> u(n), g(n);
  for (auto& v : u) v = uniform01(rng);
  for (auto& v : g) v = standard_normal(rng);
  CHECK(std::abs(kozachenko_leonenko_entropy(u, 1, 3) - 0.0) < 0.02);
  CHECK(std::abs(kozachenko_leonenko_entropy(g, 1, 3) - 1.41894) < 0.02);

  std::vector<double> g2(20'000 * 2), g2s(g2.size());
  for (std::size_t i = 0; i < g2.size(); ++i) {
    g2[i] = standard_normal(rng);
    g2s[i] = 2.0 * g2[i];
  }
  const double shift = kozachenko_leonenko_entropy(g2s, 2, 3) - kozachenko_leonenko_entropy(g2, 2, 3);
  CHECK(std::abs(shift - 2.0 * std::log(2.0)) < 0.05);

  CHECK_THROWS_AS(kozachenko_leonenko_entropy(std::vector<double>{1, 2, 3}, 1, 3), ValidationError);
  const std::vector<double> dup{0, 0, 0, 1, 2, 3, 4, 5};
  CHECK(std::isfinite(kozachenko_leonenko_entropy(dup, 1, 1)));
}

TEST_CASE("kd-tree agrees with brute force") {
  Rng rng(2);
  const std::size_t n = 500, d = 3;
  std::vector<double> pts(n * d);
  for (auto& v : pts) v = standard_normal(rng);
  KdTree tree(pts, d);
  for (std::size_t i = 0; i < n; i += 37) {
    std::vector<double> dist;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0;
      for (std::size_t a = 0; a < d; ++a) s += (pts[i * d + a] - pts[j * d + a]) * (pts[i * d + a] - pts[j * d + a]);
      dist.push_back(std::sqrt(s));
    }
    std::sort(dist.begin(), dist.end());
    CHECK(tree.kth_neighbor_distance(i, 4) == doctest::Approx(dist[3]).epsilon(1e-14));
  }
}

TEST_CASE("random scores: keyed, distinct and roughly uniform") {
  CHECK(random_score(7, 3, 12) == random_score(7, 3, 12));
  std::vector<double> s;
  std::set<double> seen;
  for (int id = 0; id < 270; ++id) {
    s.push_back(random_score(7, 1, id));
    seen.insert(s.back());
  }
  CHECK(seen.size() == 270);
  std::sort(s.begin(), s.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    ks = std::max({ks, std::abs(s[i] - static_cast<double>(i) / 270.0), std::abs(s[i] - (i + 1.0) / 270.0)});
  }
  CHECK(ks < 0.1);
  CHECK(random_score(7, 1, 5) != random_score(7, 2, 5));
}

TEST_CASE("score csv") {
  std::ostringstream out;
  write_scores_csv_header(out);
  const std::vector<AcquisitionScore> s{{4, "lig", 0.25, 0.01, 30, 0}, {5, "random", 0.5}};
  write_scores_csv(out, 2, s);
  CHECK(out.str() == "round,scenario_id,acquisition,score,stderr,n_samples\n2,4,lig,0.25,0.01,30\n2,5,random,0.5,,0\n");
  CHECK(acquisition_from_string("maxent") == Acquisition::maxent);
  CHECK_THROWS_AS(acquisition_from_string("bald"), ValidationError);
}
