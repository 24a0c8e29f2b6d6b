#pragma once

#include <vector>

#include "inp/epi/seir.hpp"

namespace inp::epi {

/// Contact coupling between nodes. `transition()` is row-stochastic with a
/// positive diagonal.
class MobilityGraph {
 public:
  /// Row-normalizes nonnegative weights. Every row needs a positive self weight.
  static MobilityGraph from_weights(std::size_t nodes, std::vector<double> weights);
  /// Takes an already normalized matrix; rows must sum to 1 within 1e-12.
  static MobilityGraph from_transition(std::size_t nodes, std::vector<double> transition);
  /// Each node keeps `self_weight` and splits the rest between its two ring
  /// neighbours.
  static MobilityGraph ring_plus_self(std::size_t nodes, double self_weight = 0.8);
  static MobilityGraph identity(std::size_t nodes);

  std::size_t nodes() const { return nodes_; }
  double at(std::size_t i, std::size_t j) const { return transition_[i * nodes_ + j]; }
  const std::vector<double>& transition() const { return transition_; }

 private:
  MobilityGraph(std::size_t nodes, std::vector<double> transition)
      : nodes_(nodes), transition_(std::move(transition)) {}

  std::size_t nodes_ = 0;
  std::vector<double> transition_;
};

/// Graph-coupled SEIR: node d sees force of infection
/// beta * sum_j M[d,j] * I_j / N_j. Populations never move between nodes.
Trajectory simulate_metapop(const Scenario& scenario, const MobilityGraph& graph,
                            std::uint64_t seed);

/// Scenario with `nodes` equal-sized nodes, seeding only node `seed_node`.
Scenario metapop_scenario(double beta, double epsilon, std::size_t nodes,
                          std::int64_t node_population, std::int64_t e0, std::int64_t i0,
                          std::size_t seed_node, int horizon, double mu = 1.0);

}  // namespace inp::epi
