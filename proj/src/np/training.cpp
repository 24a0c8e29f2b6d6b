#include "inp/np/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "inp/autodiff/ops.hpp"
#include "inp/autodiff/tape.hpp"
#include "inp/core/errors.hpp"

namespace inp::np {

using ad::Binder;
using ad::Tensor;

namespace {

// -sum log N(x | mu(z_s), sigma) averaged over z samples.
Tensor expected_nll(const LatentModel& model, const GaussianDiagTensor& q, const NormalizedBatch& targets,
                    std::span<const double> eta, const Binder& bind) {
  const std::size_t lw = model.arch().latent_width();
  if (eta.empty() || eta.size() % lw != 0) throw ValidationError("elbo: eta must hold n_z rows of latent width");
  const std::size_t n_z = eta.size() / lw, b = targets.size(), xw = model.arch().x_width();
  const Tensor sigma = model.obs_std(bind);
  const Tensor sigma_rep = ad::repeat_rows(sigma, b);
  const double const_term = 0.5 * static_cast<double>(b * xw) * std::log(2.0 * std::numbers::pi);
  const Tensor log_sigma_sum = ad::scale(ad::sum(ad::log(sigma)), static_cast<double>(b));
  Tensor total;
  for (std::size_t s = 0; s < n_z; ++s) {
    const Tensor e({1, lw}, std::vector<double>(eta.begin() + s * lw, eta.begin() + (s + 1) * lw));
    const Tensor z = ad::add(q.mean, ad::mul(q.std, e));
    const Tensor mu = model.decode_mean(ad::repeat_rows(z, b), targets.theta, bind);
    const Tensor resid = ad::div(ad::sub(targets.x, mu), sigma_rep);
    const Tensor nll = ad::add_scalar(ad::add(ad::scale(ad::sum(ad::square(resid)), 0.5), log_sigma_sum), const_term);
    total = s == 0 ? nll : ad::add(total, nll);
  }
  return ad::scale(total, 1.0 / static_cast<double>(n_z));
}

NormalizedBatch concat_batches(const NormalizedBatch& a, const NormalizedBatch& b) {
  return {ad::concat({a.theta, b.theta}, 0), ad::concat({a.x, b.x}, 0)};
}

}  // namespace

ElboTerms elbo_loss(const LatentModel& model, const NormalizedBatch& batch, std::span<const std::size_t> context,
                    std::span<const double> eta, const Binder& bind) {
  if (context.empty()) throw ValidationError("elbo: context set is empty");
  if (batch.size() == 0) throw ValidationError("elbo: empty batch");
  const GaussianDiagTensor q_all = model.encode(batch.theta, batch.x, bind);
  const NormalizedBatch ctx = batch.rows(context);
  const GaussianDiagTensor q_ctx = model.encode(ctx.theta, ctx.x, bind);
  const Tensor nll = expected_nll(model, q_all, batch, eta, bind);
  const Tensor kl = kl_divergence(q_all, q_ctx);
  return {ad::add(nll, kl), nll.item(), std::max(0.0, kl.item())};
}

ElboTerms heldout_elbo(const LatentModel& model, const NormalizedBatch& context, const NormalizedBatch& targets,
                       std::span<const double> eta, const Binder& bind) {
  if (context.size() == 0) throw ValidationError("elbo: context set is empty");
  const NormalizedBatch all = concat_batches(context, targets);
  const GaussianDiagTensor q_all = model.encode(all.theta, all.x, bind);
  const GaussianDiagTensor q_ctx = model.encode(context.theta, context.x, bind);
  const Tensor nll = expected_nll(model, q_all, targets, eta, bind);
  const Tensor kl = kl_divergence(q_all, q_ctx);
  return {ad::add(nll, kl), nll.item(), std::max(0.0, kl.item())};
}

std::vector<std::size_t> choose_context(std::size_t n, double fraction, Rng& rng) {
  if (n == 0) throw ValidationError("context: no rows to choose from");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ValidationError("context: fraction must be in (0,1]");
  const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(fraction * n)), 1, n);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  // partial Fisher-Yates
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n - i));
    std::swap(idx[i], idx[std::min(j, n - 1)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<double> draw_normals(std::size_t count, Rng& rng) {
  std::vector<double> out(count);
  for (auto& v : out) v = standard_normal(rng);
  return out;
}

double evaluation_loss(const Surrogate& s, const NormalizedBatch& data, double context_fraction,
                       std::uint64_t seed) {
  Rng rng(stream_seed(seed, "eval-loss"));
  const auto ctx = choose_context(data.size(), context_fraction, rng);
  const auto eta = draw_normals(s.arch().latent_width(), rng);
  const auto terms = elbo_loss(s.model(), data, ctx, eta, Binder{});
  return terms.loss.item() / static_cast<double>(data.size() * s.arch().x_width());
}

double validation_loss(const Surrogate& s, const NormalizedBatch& train, const NormalizedBatch& validation,
                       double context_fraction, std::uint64_t seed) {
  Rng rng(stream_seed(seed, "val-loss"));
  const auto ctx = choose_context(train.size(), context_fraction, rng);
  const auto eta = draw_normals(s.arch().latent_width(), rng);
  const auto terms = heldout_elbo(s.model(), train.rows(ctx), validation, eta, Binder{});
  return terms.loss.item() / static_cast<double>(validation.size() * s.arch().x_width());
}

TrainReport train(Surrogate& s, const SampleSet& train_set, const SampleSet* validation,
                  const TrainOptions& opt) {
  if (train_set.size() == 0) throw ValidationError("train: empty training set");
  const NormalizedBatch data = s.normalize(train_set);
  std::optional<NormalizedBatch> val;
  if (validation != nullptr && validation->size() > 0) val = s.normalize(*validation);

  TrainReport report;
  report.initial_loss = evaluation_loss(s, data, opt.context_fraction, opt.seed);
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best_params;
  std::size_t since_best = 0;
  auto evaluate = [&](std::size_t step) {
    const double v = validation_loss(s, data, *val, opt.context_fraction, opt.seed);
    if (v < best) {
      best = v;
      report.best_step = step;
      best_params = s.snapshot();
      since_best = 0;
    }
  };
  if (val) evaluate(0);

  const std::size_t lw = s.arch().latent_width();
  const std::size_t n = data.size();
  const std::size_t batch_rows = opt.max_batch == 0 ? n : std::min(n, opt.max_batch);
  ad::Tape tape;
  for (std::size_t step = 1; step <= opt.steps; ++step) {
    Rng rng(stream_seed(opt.seed, "train-step", {opt.stream_key, static_cast<std::uint64_t>(s.steps())}));
    NormalizedBatch batch = data;
    if (batch_rows < n) batch = data.rows(choose_context(n, static_cast<double>(batch_rows) / n, rng));
    const auto ctx = choose_context(batch.size(), opt.context_fraction, rng);
    const auto eta = draw_normals(opt.n_z * lw, rng);
    s.optimizer().zero_grad();
    const ElboTerms terms = elbo_loss(s.model(), batch, ctx, eta, Binder{&tape});
    tape.backward(terms.loss);
    s.optimizer().step();
    s.add_steps(1);
    report.step_losses.push_back(terms.loss.item() / static_cast<double>(batch.size() * s.arch().x_width()));
    report.steps_run = step;
    if (val) {
      since_best += 1;
      if (step % opt.eval_every == 0 || step == opt.steps) evaluate(step);
      if (since_best >= opt.patience) {
        report.stopped_early = step < opt.steps;
        break;
      }
    }
  }
  if (val && !best_params.empty()) {
    s.restore(best_params);
    report.best_validation = best;
  }
  report.final_loss = evaluation_loss(s, data, opt.context_fraction, opt.seed);
  return report;
}

}  // namespace inp::np
