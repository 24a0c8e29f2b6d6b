#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "inp/epi/grid.hpp"
#include "inp/epi/seir.hpp"
#include "inp/np/features.hpp"
#include "inp/np/surrogate.hpp"

namespace inp::al {

enum class Role { candidate, acquired, validation, test };
std::string to_string(Role r);
Role role_from_string(const std::string& name);

struct HistoryEntry {
  int round = 0;
  std::vector<int> ids;
  std::vector<double> scores;
};

using Simulator = std::function<epi::Trajectory(const epi::Scenario&, std::uint64_t seed)>;

/// Seed of the k-th sample of a scenario. Shared by the dataset generator and
/// the active loop so both see the same trajectories.
std::uint64_t sample_seed(std::uint64_t base, int scenario_id, std::size_t k);

/// Scenarios keyed by id, each with a role and its simulated samples.
class SimDataset {
 public:
  static SimDataset from_design(const epi::ScenarioDesign& design);

  void add(const epi::Scenario& scenario, Role role);
  std::size_t size() const { return entries_.size(); }
  bool contains(int id) const { return entries_.count(id) != 0; }
  const epi::Scenario& scenario(int id) const { return entry(id).scenario; }
  Role role(int id) const { return entry(id).role; }
  std::vector<int> ids(Role role) const;
  /// Scenarios that started as candidates (acquired or not).
  std::size_t pool_size() const;

  bool has_samples(int id) const { return !entry(id).samples.empty(); }
  const std::vector<epi::Trajectory>& samples(int id) const { return entry(id).samples; }
  void set_samples(int id, std::vector<epi::Trajectory> samples);
  /// Runs the simulator for samples 0..m-1 unless they are already present.
  void simulate(int id, std::size_t m, const Simulator& sim, std::uint64_t base_seed);

  /// Moves the starting scenarios to acquired without a history entry.
  void seed_initial(std::span<const int> ids);
  /// Moves candidates to acquired and records the round. Rounds must be
  /// contiguous from 1.
  void acquire(int round, std::span<const int> ids, std::span<const double> scores);
  const std::vector<HistoryEntry>& history() const { return history_; }
  const std::vector<int>& initial() const { return initial_; }

  /// Scenario table, roles and history. Samples are not stored.
  nlohmann::json to_json() const;
  static SimDataset from_json(const nlohmann::json& j);

 private:
  struct Entry {
    epi::Scenario scenario;
    Role role = Role::candidate;
    bool pool = false;
    std::vector<epi::Trajectory> samples;
  };
  const Entry& entry(int id) const;
  Entry& entry(int id);

  std::map<int, Entry> entries_;
  std::vector<int> initial_;
  std::vector<HistoryEntry> history_;
};

/// The lowest- and highest-beta candidates at the median epsilon.
std::vector<int> corner_initial_ids(const SimDataset& data);

/// One model row per (scenario, sample).
np::SampleSet sample_set(const SimDataset& data, std::span<const int> ids, np::FeatureKind kind);

/// Feature vector averaged over a scenario's samples.
std::vector<double> seed_mean(const SimDataset& data, int id, np::FeatureKind kind);

/// Mean absolute difference. Shapes must match.
double mae(std::span<const double> predictions, std::span<const double> truth);

}  // namespace inp::al
