#include <doctest.h>

#include <cmath>

#include "inp/autodiff/ops.hpp"
#include "inp/core/errors.hpp"
#include "inp/epi/grid.hpp"
#include "inp/epi/metapop.hpp"
#include "inp/np/features.hpp"
#include "inp/np/predict.hpp"
#include "inp/np/training.hpp"
#include "support/grad_check.hpp"

using namespace inp;
using namespace inp::np;
using ad::Tensor;

namespace {

Tensor random_tensor(ad::Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(shape.size());
  for (auto& x : v) x = standard_normal(rng);
  return Tensor(shape, std::move(v));
}

NpArchitecture tiny_np(std::size_t horizon = 6) {
  NpArchitecture a;
  a.theta_dim = 2;
  a.x_dim = 1;
  a.horizon = horizon;
  a.latent_dim = 3;
  a.encoder_widths = {5, 4};
  a.decoder_widths = {5};
  a.init_seed = 11;
  return a;
}

NpArchitecture tiny_stnp(std::size_t nodes, std::size_t order, std::size_t horizon = 4) {
  NpArchitecture a;
  a.kind = ModelKind::stnp;
  a.theta_dim = 3;
  a.x_dim = 2;
  a.horizon = horizon;
  a.nodes = nodes;
  a.latent_dim = 2;
  a.node_hidden = 3;
  a.state_hidden = 3;
  a.recurrent_width = 4;
  a.diffusion_order = order;
  a.transition = epi::MobilityGraph::ring_plus_self(nodes, 0.8).transition();
  a.init_seed = 5;
  return a;
}

NormalizedBatch random_batch(const NpArchitecture& a, std::size_t n, std::uint64_t seed) {
  return {random_tensor({n, a.theta_width()}, seed), random_tensor({n, a.x_width()}, seed + 1)};
}

bool same(const Tensor& a, const Tensor& b) { return a.to_vector() == b.to_vector(); }

void copy_parameters(const LatentModel& from, LatentModel& to) {
  for (auto* p : to.parameters().pointers()) {
    const ad::Parameter* src = nullptr;
    for (const auto* q : from.parameters().pointers())
      if (q->name() == p->name()) src = q;
    REQUIRE(src != nullptr);
    std::copy(src->value().begin(), src->value().end(), p->mutable_value().begin());
  }
}

SampleSet seir_samples(std::size_t n_scenarios, std::size_t per_scenario, int horizon, std::uint64_t seed) {
  epi::Scenario base;
  base.horizon = horizon;
  const auto grid = epi::scenario_grid(epi::GridSpec{.base = base});
  SampleSet out;
  for (std::size_t i = 0; i < n_scenarios; ++i) {
    const auto& sc = grid[i * grid.size() / n_scenarios];
    for (std::size_t k = 0; k < per_scenario; ++k) {
      const auto tr = epi::simulate_seir(sc, stream_seed(seed, {static_cast<std::uint64_t>(sc.id), k}));
      out.append(theta_features(sc, FeatureKind::infectious), x_features(tr, FeatureKind::infectious), sc.id);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("np encoder is permutation invariant") {
  NpModel m(tiny_np());
  const auto batch = random_batch(m.arch(), 7, 1);
  const std::vector<std::size_t> perm{3, 0, 6, 1, 5, 2, 4};
  const auto shuffled = batch.rows(perm);
  const auto a = m.encode(batch.theta, batch.x, {});
  const auto b = m.encode(shuffled.theta, shuffled.x, {});
  // mean aggregation is a sum in a different order; allow last-bit noise only
  for (std::size_t j = 0; j < a.mean.size(); ++j) {
    CHECK(a.mean.data()[j] == doctest::Approx(b.mean.data()[j]).epsilon(1e-14));
    CHECK(a.std.data()[j] == doctest::Approx(b.std.data()[j]).epsilon(1e-14));
  }
}

TEST_CASE("np encoder: duplicated pair equals the pair once") {
  NpModel m(tiny_np());
  const auto one = random_batch(m.arch(), 1, 3);
  const std::vector<std::size_t> twice{0, 0};
  const auto dup = one.rows(twice);
  CHECK(same(m.encode(one.theta, one.x, {}).mean, m.encode(dup.theta, dup.x, {}).mean));
  CHECK(same(m.encode(one.theta, one.x, {}).std, m.encode(dup.theta, dup.x, {}).std));
}

TEST_CASE("fresh np at zero inputs has finite floored std") {
  NpModel m(default_architecture(FeatureKind::infectious, 100));
  const auto q = m.encode(Tensor::zeros({1, 2}), Tensor::zeros({1, 100}), {}).values();
  for (double s : q.std) {
    CHECK(std::isfinite(s));
    CHECK(s >= kStdFloor);
  }
  CHECK_THROWS_AS(m.encode(Tensor::zeros({0, 2}), Tensor::zeros({0, 100}), {}), ValidationError);
  CHECK_THROWS_AS(m.encode(Tensor::zeros({1, 2}), Tensor::zeros({1, 99}), {}), ValidationError);
}

TEST_CASE("stnp encoder is causal") {
  StnpModel m(tiny_stnp(3, 2, 5));
  const auto batch = random_batch(m.arch(), 4, 9);
  const auto q = m.encode(batch.theta, batch.x, {}).values();
  const std::size_t t_cut = 2, step = m.arch().step_width(), l = m.arch().latent_dim;
  auto x = batch.x.to_vector();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t c = (t_cut + 1) * step; c < m.arch().x_width(); ++c) x[i * m.arch().x_width() + c] += 3.7;
  const auto q2 = m.encode(batch.theta, Tensor(batch.x.shape(), x), {}).values();
  for (std::size_t j = 0; j < (t_cut + 1) * l; ++j) {
    CHECK(q.mean[j] == q2.mean[j]);
    CHECK(q.std[j] == q2.std[j]);
  }
  bool later_changed = false;
  for (std::size_t j = (t_cut + 1) * l; j < q.size(); ++j) later_changed |= q.mean[j] != q2.mean[j];
  CHECK(later_changed);
}

TEST_CASE("stnp per-step aggregation is permutation invariant") {
  StnpModel m(tiny_stnp(3, 2));
  const auto batch = random_batch(m.arch(), 5, 21);
  const std::vector<std::size_t> perm{4, 2, 0, 3, 1};
  const auto a = m.encode(batch.theta, batch.x, {}).values();
  const auto sb = batch.rows(perm);
  const auto b = m.encode(sb.theta, sb.x, {}).values();
  for (std::size_t j = 0; j < a.size(); ++j) CHECK(a.mean[j] == doctest::Approx(b.mean[j]).epsilon(1e-13));
}

TEST_CASE("stnp with one node and K=0 equals the plain recurrent path") {
  auto arch = tiny_stnp(1, 0);
  StnpModel diff(arch);
  arch.plain_node_cell = true;
  StnpModel plain(arch);
  copy_parameters(diff, plain);
  const auto batch = random_batch(arch, 3, 4);
  const auto a = diff.encode(batch.theta, batch.x, {}).values();
  const auto b = plain.encode(batch.theta, batch.x, {}).values();
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(std::abs(a.mean[j] - b.mean[j]) <= 1e-10);
    CHECK(std::abs(a.std[j] - b.std[j]) <= 1e-10);
  }
}

TEST_CASE("diffusion with M=I and K=1 equals K=0 with merged weights") {
  const std::size_t nodes = 3, in = 4, hidden = 5;
  std::vector<double> eye(nodes * nodes, 0.0);
  for (std::size_t i = 0; i < nodes; ++i) eye[i * nodes + i] = 1.0;
  ParameterSet ps1, ps0;
  Rng r1(1), r0(2);
  DcgruCell k1(ps1, "c", in, hidden, 1, nodes, eye, r1);
  DcgruCell k0(ps0, "c", in, hidden, 0, nodes, eye, r0);
  for (const std::string g : {"gate", "cand"}) {
    auto* w0 = ps1.find("c." + g + "_w0");
    auto* w1 = ps1.find("c." + g + "_w1");
    auto* merged = ps0.find("c." + g + "_w0");
    for (std::size_t i = 0; i < merged->shape().size(); ++i) merged->mutable_value()[i] = w0->value()[i] + w1->value()[i];
    auto* b1 = ps1.find("c." + g + "_b");
    auto* b0 = ps0.find("c." + g + "_b");
    std::copy(b1->value().begin(), b1->value().end(), b0->mutable_value().begin());
  }
  const Tensor x = random_tensor({2 * nodes, in}, 8);
  const Tensor h = random_tensor({2 * nodes, hidden}, 9);
  const auto a = k1(x, h, {}).to_vector();
  const auto b = k0(x, h, {}).to_vector();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-10);
}

TEST_CASE("mismatched horizon or node count is rejected") {
  StnpModel m(tiny_stnp(3, 1));
  CHECK_THROWS_AS(m.encode(Tensor::zeros({2, 9}), Tensor::zeros({2, 3 * 2 * 3}), {}), ValidationError);
  CHECK_THROWS_AS(m.encode(Tensor::zeros({2, 6}), Tensor::zeros({2, 24}), {}), ValidationError);
}

TEST_CASE("decoder is deterministic and respects the std floor") {
  auto arch = tiny_np();
  NpModel m(arch);
  const Tensor z = random_tensor({2, 3}, 1), th = random_tensor({2, 2}, 2);
  CHECK(same(m.decode_mean(z, th, {}), m.decode_mean(z, th, {})));
  m.parameters().find("obs_std_raw")->mutable_value()[0] = -800.0;
  const auto sd = m.obs_std({}).to_vector();
  CHECK(sd[0] >= kStdFloor);
  CHECK(sd[0] == doctest::Approx(kStdFloor).epsilon(1e-12));
}

TEST_CASE("decoder gradient with respect to z matches finite differences") {
  for (auto arch : {tiny_np(), tiny_stnp(2, 1)}) {
    auto model = make_model(arch);
    ad::Parameter z("z", {3, arch.latent_width()}, random_tensor({3, arch.latent_width()}, 4).to_vector());
    const Tensor th = random_tensor({3, arch.theta_width()}, 5);
    const Tensor target = random_tensor({3, arch.x_width()}, 6);
    auto loss = [&](const ad::Binder& b) {
      return ad::sum(ad::square(ad::sub(model->decode_mean(b(z), th, b), target)));
    };
    const auto res = testing::check_gradients(loss, {&z});
    CHECK(res.max_rel_error < 1e-4);
    double norm = 0.0;
    for (double g : z.grad()) norm += g * g;
    CHECK(norm > 0.0);
  }
}

TEST_CASE("closed-form KL oracles") {
  const GaussianDiagTensor q{Tensor::row({1.0}), Tensor::row({1.0})};
  const GaussianDiagTensor p{Tensor::row({0.0}), Tensor::row({1.0})};
  CHECK(kl_divergence(q, p).item() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kl_divergence(q, q).item() == 0.0);
}

TEST_CASE("context equal to the whole batch gives zero KL") {
  NpModel m(tiny_np());
  const auto batch = random_batch(m.arch(), 6, 12);
  const std::vector<std::size_t> all{0, 1, 2, 3, 4, 5};
  Rng rng(3);
  const auto eta = draw_normals(m.arch().latent_width(), rng);
  const auto terms = elbo_loss(m, batch, all, eta, {});
  CHECK(terms.kl == 0.0);
  CHECK(terms.loss.item() == terms.nll);
  CHECK_THROWS_AS(elbo_loss(m, batch, std::vector<std::size_t>{}, eta, {}), ValidationError);
}

TEST_CASE("elbo gradients match finite differences with common random numbers") {
  for (auto arch : {tiny_np(), tiny_stnp(2, 2, 3)}) {
    auto model = make_model(arch);
    const auto batch = random_batch(arch, 5, 30);
    const std::vector<std::size_t> ctx{1, 3};
    Rng rng(31);
    const auto eta = draw_normals(2 * arch.latent_width(), rng);
    auto loss = [&](const ad::Binder& b) { return elbo_loss(*model, batch, ctx, eta, b).loss; };
    // loss is O(100) while some recurrent-gate gradients are O(1e-7); h=1e-5
    // leaves the difference quotient dominated by rounding
    const auto res = testing::check_gradients(loss, model->parameters().pointers(), 1e-3);
    INFO((arch.kind == ModelKind::np ? "np" : "stnp"));
    CHECK(res.max_rel_error < 1e-4);
  }
}

TEST_CASE("normalization round trip") {
  Rng rng(2);
  std::vector<double> data(40 * 3);
  for (auto& v : data) v = 1e4 * uniform01(rng) + 17.0;
  for (std::size_t i = 0; i < 40; ++i) data[i * 3 + 2] = 5.0;  // constant column
  const auto st = Standardizer::fit(data, 3);
  const auto back = st.denormalize(st.normalize(data));
  for (std::size_t i = 0; i < data.size(); ++i) CHECK(std::abs(back[i] - data[i]) <= 1e-10);
  CHECK(st.std()[2] == 1.0);
}

TEST_CASE("predict is reproducible and needs two samples") {
  Surrogate s(tiny_np());
  SampleSet data;
  Rng rng(1);
  for (int i = 0; i < 4; ++i) {
    data.append(std::vector<double>{uniform01(rng), uniform01(rng)}, draw_normals(6, rng), i);
  }
  s.fit_normalizers(data);
  const auto prior = context_posterior(s, s.normalize(data));
  const std::vector<double> th{0.1, -0.2};
  Rng a(9), b(9);
  CHECK(predict(s, prior, th, 10, a).samples == predict(s, prior, th, 10, b).samples);
  CHECK_THROWS_AS(predict(s, prior, th, 1, a), ValidationError);
}

TEST_CASE("with vanishing observation noise the predictive spread is the spread of decoded means") {
  auto arch = tiny_np();
  arch.obs_noise = ObsNoise::fixed;
  arch.fixed_obs_std = 1e-9;
  Surrogate s(arch);
  SampleSet data;
  Rng rng(1);
  for (int i = 0; i < 4; ++i) data.append(std::vector<double>{uniform01(rng), uniform01(rng)}, draw_normals(6, rng), i);
  s.fit_normalizers(data);
  const auto prior = context_posterior(s, s.normalize(data));
  const std::vector<double> th{0.3, 0.4};
  Rng r(5);
  const auto p = predict(s, prior, th, 4000, r);
  // floor 1e-3 remains: std^2 = spread^2 + 1e-6
  Rng r2(5);
  std::vector<double> means;
  const std::size_t lw = arch.latent_width();
  std::vector<double> z(4000 * lw);
  for (std::size_t i = 0; i < 4000; ++i)
    for (std::size_t j = 0; j < lw; ++j) z[i * lw + j] = prior.mean[j] + prior.std[j] * standard_normal(r2);
  const auto mu = s.model().decode_mean(Tensor({4000, lw}, z), ad::repeat_rows(Tensor::row(th), 4000), {});
  std::vector<double> m, sd;
  column_stats(mu.data(), arch.x_width(), m, sd);
  for (std::size_t j = 0; j < arch.x_width(); ++j) {
    CHECK(p.std[j] == doctest::Approx(std::sqrt(sd[j] * sd[j] + kStdFloor * kStdFloor)).epsilon(0.02));
  }
}

TEST_CASE("surrogate checkpoint round trip") {
  Surrogate s(tiny_stnp(2, 1));
  SampleSet data;
  Rng rng(4);
  for (int i = 0; i < 3; ++i) data.append(draw_normals(6, rng), draw_normals(16, rng), i);
  s.fit_normalizers(data);
  TrainOptions opt;
  opt.steps = 3;
  train(s, data, nullptr, opt);
  const auto text = s.to_json().dump();
  auto back = Surrogate::from_json(nlohmann::json::parse(text));
  CHECK(back->steps() == 3);
  CHECK(back->snapshot() == s.snapshot());
  const auto nb = s.normalize(data);
  CHECK(same(back->model().encode(nb.theta, nb.x, {}).mean, s.model().encode(nb.theta, nb.x, {}).mean));
  auto bad = nlohmann::json::parse(text);
  bad["version"] = 7;
  CHECK_THROWS_AS(Surrogate::from_json(bad), IoError);
}

TEST_CASE("200 adam steps reduce the loss on a 10-scenario SEIR subset") {
  const auto data = seir_samples(10, 5, 100, 77);
  for (std::uint64_t seed : {1, 2, 3}) {
    auto arch = default_architecture(FeatureKind::infectious, 100);
    arch.init_seed = seed;
    Surrogate s(arch);
    s.fit_normalizers(data);
    TrainOptions opt;
    opt.steps = 200;
    opt.seed = seed;
    const auto rep = train(s, data, nullptr, opt);
    INFO("seed " << seed << " " << rep.initial_loss << " -> " << rep.final_loss);
    CHECK(rep.final_loss < rep.initial_loss);
  }
}
