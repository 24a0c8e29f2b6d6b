#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "inp/core/rng.hpp"
#include "inp/np/surrogate.hpp"

namespace inp::np {

struct ElboTerms {
  ad::Tensor loss;  // scalar on the tape
  double nll = 0.0;
  double kl = 0.0;  // clamped at 0
};

/// Negative ELBO over all rows of `batch`:
///   -mean_s log p(x | z_s, theta) + KL(q(z | batch) || q(z | context)),
/// z_s = mean + std * eta_s. `eta` holds n_z rows of latent_width values.
ElboTerms elbo_loss(const LatentModel& model, const NormalizedBatch& batch,
                    std::span<const std::size_t> context, std::span<const double> eta,
                    const ad::Binder& bind);

/// Same objective with targets distinct from the context: the posterior is
/// q(z | context + targets) and only targets are reconstructed.
ElboTerms heldout_elbo(const LatentModel& model, const NormalizedBatch& context,
                       const NormalizedBatch& targets, std::span<const double> eta,
                       const ad::Binder& bind);

/// Sorted random subset of round(fraction * n) rows, at least one.
std::vector<std::size_t> choose_context(std::size_t n, double fraction, Rng& rng);

std::vector<double> draw_normals(std::size_t count, Rng& rng);

struct TrainOptions {
  std::size_t steps = 200;
  std::size_t patience = 50;     // in steps, on validation loss
  std::size_t eval_every = 10;
  double context_fraction = 0.1;
  std::size_t n_z = 1;
  std::size_t max_batch = 0;     // rows per step, 0 = all
  std::uint64_t seed = 0;
  std::uint64_t stream_key = 0;  // e.g. the round index
};

struct TrainReport {
  double initial_loss = 0.0;  // fixed-noise evaluation on the training set
  double final_loss = 0.0;
  std::vector<double> step_losses;
  double best_validation = std::numeric_limits<double>::quiet_NaN();
  std::size_t best_step = 0;
  std::size_t steps_run = 0;
  bool stopped_early = false;
};

/// Per-point training objective with fixed context and noise, for before/after
/// comparisons.
double evaluation_loss(const Surrogate& s, const NormalizedBatch& data, double context_fraction,
                       std::uint64_t seed);

/// Per-point validation loss: context drawn from `train`, targets `validation`.
double validation_loss(const Surrogate& s, const NormalizedBatch& train, const NormalizedBatch& validation,
                       double context_fraction, std::uint64_t seed);

/// Adam on the negative ELBO. With a validation set, keeps the parameters of
/// the best validation evaluation and stops after `patience` steps without
/// improvement. Normalizers must already be fitted.
TrainReport train(Surrogate& s, const SampleSet& train_set, const SampleSet* validation,
                  const TrainOptions& options);

}  // namespace inp::np
