#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace inp::epi {

enum Compartment : std::size_t { kS = 0, kE = 1, kI = 2, kR = 3, kCompartments = 4 };
enum Transition : std::size_t { kSE = 0, kEI = 1, kIR = 2, kTransitions = 3 };

/// Simulator parameters for one scenario. Rates are per day. Per-node vectors
/// have one entry per node (a single-population model has one node).
struct Scenario {
  int id = -1;
  double beta = 0.0;
  double epsilon = 0.0;
  double mu = 1.0;
  int horizon = 100;
  std::vector<std::int64_t> population{100000};
  std::vector<std::int64_t> e0{2000};
  std::vector<std::int64_t> i0{2000};

  std::size_t nodes() const { return population.size(); }

  /// Throws ValidationError on any invariant violation.
  void validate() const;
};

/// Counts for t = 1..T (the state at the end of each day), per node and
/// compartment, plus the daily transition counts that produced them.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::size_t horizon, std::size_t nodes, std::uint64_t seed);

  std::size_t horizon() const { return horizon_; }
  std::size_t nodes() const { return nodes_; }
  std::uint64_t seed() const { return seed_; }

  /// t is 1-based day index.
  std::int64_t state(std::size_t t, std::size_t node, std::size_t compartment) const {
    return states_[index(t, node) * kCompartments + compartment];
  }
  std::int64_t incidence(std::size_t t, std::size_t node, std::size_t transition) const {
    return incidence_[index(t, node) * kTransitions + transition];
  }
  void set_state(std::size_t t, std::size_t node, std::size_t c, std::int64_t v) {
    states_[index(t, node) * kCompartments + c] = v;
  }
  void set_incidence(std::size_t t, std::size_t node, std::size_t k, std::int64_t v) {
    incidence_[index(t, node) * kTransitions + k] = v;
  }

  std::span<const std::int64_t> raw_states() const { return states_; }
  std::span<const std::int64_t> raw_incidence() const { return incidence_; }
  std::vector<std::int64_t>& mutable_raw_states() { return states_; }
  std::vector<std::int64_t>& mutable_raw_incidence() { return incidence_; }

  /// Convenience: the series of one compartment at one node, days 1..T.
  std::vector<double> series(std::size_t node, std::size_t compartment) const;

  bool operator==(const Trajectory&) const = default;

 private:
  std::size_t index(std::size_t t, std::size_t node) const { return (t - 1) * nodes_ + node; }

  std::size_t horizon_ = 0;
  std::size_t nodes_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<std::int64_t> states_;
  std::vector<std::int64_t> incidence_;
};

/// Exponential-hazard transition probability over one day.
double daily_probability(double rate);

/// Single-population chain-binomial SEIR. All three transitions are sampled
/// from the start-of-day state and applied together.
Trajectory simulate_seir(const Scenario& scenario, std::uint64_t seed);

}  // namespace inp::epi
