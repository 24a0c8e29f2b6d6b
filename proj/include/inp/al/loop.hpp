#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "inp/acq/scores.hpp"
#include "inp/al/dataset.hpp"
#include "inp/np/surrogate.hpp"
#include "inp/np/training.hpp"

namespace inp::al {

struct LoopConfig {
  acq::Acquisition acquisition = acq::Acquisition::lig;
  std::size_t batch = 1;
  std::size_t samples = 30;  // per scenario
  std::size_t max_rounds = 9;
  std::size_t patience = 50;
  std::size_t train_steps = 200;  // per round, round 0 included
  std::size_t eval_every = 10;
  double context_fraction = 0.1;
  std::size_t n_z = 30;  // predictive draws for MAE, meanstd and maxent
  std::size_t n_x = 30;  // LIG draws per candidate
  std::size_t group_random = 0;  // > 0: best of this many random groups by joint LIG
  bool plateau_stop = true;
  double plateau_tol = 1e-3;
  std::size_t max_batch = 0;
  std::uint64_t seed = 7;
  std::uint64_t sim_seed = 0;  // base of sample_seed for simulator queries
  np::FeatureKind features = np::FeatureKind::infectious;
  np::NpArchitecture arch;
  ad::AdamConfig adam;

  void validate() const;
  nlohmann::json to_json() const;
  static LoopConfig from_json(const nlohmann::json& j);
};

/// Default loop configuration for the single-population SEIR task.
LoopConfig seir_loop_config(std::size_t horizon = 100);

using SurrogateFactory = std::function<std::unique_ptr<np::Surrogate>(const LoopConfig&)>;

/// Fresh surrogate with weights drawn from the config seed.
std::unique_ptr<np::Surrogate> default_surrogate(const LoopConfig& config);

struct RoundMetrics {
  int round = 0;
  std::size_t acquired = 0;  // scenarios
  double pct_data = 0.0;
  double test_mae = 0.0;
  double val_loss = 0.0;
  std::size_t steps = 0;
};

struct RunReport {
  std::vector<RoundMetrics> metrics;
  std::vector<HistoryEntry> history;
  std::string stop_reason;
  bool resumed = false;
  bool already_complete = false;
};

struct LoopHooks {
  /// Stop (as if interrupted) after this round is checkpointed.
  std::optional<int> interrupt_after;
};

/// Active-learning loop. With an output directory, every finished round is
/// checkpointed and rows are appended to metrics.csv, choices.csv and
/// scores.csv. An existing checkpoint is resumed; a finished one is returned
/// untouched. `data` must hold the scenario table; samples are simulated on
/// demand with sample_seed(config.sim_seed, id, k).
RunReport run_active_loop(SimDataset& data, const LoopConfig& config, const Simulator& sim,
                          const SurrogateFactory& factory, const std::filesystem::path& out_dir = {},
                          const LoopHooks& hooks = {});

/// Test MAE in simulator units: the surrogate conditioned on `context` predicts
/// every test scenario; compared against the seed-mean of its samples.
double test_mae(const np::Surrogate& s, const SimDataset& data, const np::NormalizedBatch& context,
                const LoopConfig& config, int round);

/// Scores every candidate. Candidates must be in `ids`.
std::vector<acq::AcquisitionScore> score_candidates(const np::Surrogate& s, const SimDataset& data,
                                                    std::span<const int> ids, const np::NormalizedBatch& context,
                                                    const LoopConfig& config, int round);

/// Top-b by score, ties to the lower id.
std::vector<int> select_top(std::span<const acq::AcquisitionScore> scores, std::size_t b);

struct OfflineResult {
  np::TrainReport train;
  double test_mae = 0.0;
  double untrained_mae = 0.0;
};

/// Trains a fresh surrogate on every pool scenario with the same per-step
/// options as the loop and `steps` total steps.
OfflineResult train_offline(SimDataset& data, const LoopConfig& config, const Simulator& sim,
                            const SurrogateFactory& factory, std::size_t steps,
                            std::unique_ptr<np::Surrogate>* out = nullptr);

std::string config_hash(const LoopConfig& config, const SimDataset& data);

}  // namespace inp::al
