#include "inp/epi/metapop.hpp"

#include <cmath>
#include <random>

#include "inp/core/errors.hpp"
#include "inp/core/rng.hpp"

namespace inp::epi {

MobilityGraph MobilityGraph::from_weights(std::size_t nodes, std::vector<double> weights) {
  if (nodes == 0 || weights.size() != nodes * nodes) {
    throw ValidationError("mobility graph: weights must be nodes x nodes");
  }
  for (std::size_t i = 0; i < nodes; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) {
      const double w = weights[i * nodes + j];
      if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("mobility graph: negative weight");
      row += w;
    }
    if (!(weights[i * nodes + i] > 0.0)) throw ValidationError("mobility graph: self weight must be positive");
    for (std::size_t j = 0; j < nodes; ++j) weights[i * nodes + j] /= row;
  }
  return MobilityGraph(nodes, std::move(weights));
}

MobilityGraph MobilityGraph::from_transition(std::size_t nodes, std::vector<double> transition) {
  if (nodes == 0 || transition.size() != nodes * nodes) {
    throw ValidationError("mobility graph: matrix must be nodes x nodes");
  }
  for (std::size_t i = 0; i < nodes; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) {
      const double w = transition[i * nodes + j];
      if (!(w >= 0.0)) throw ValidationError("mobility graph: negative weight");
      row += w;
    }
    if (std::abs(row - 1.0) > 1e-12) {
      throw ValidationError("mobility graph: row " + std::to_string(i) + " sums to " + std::to_string(row));
    }
    if (!(transition[i * nodes + i] > 0.0)) throw ValidationError("mobility graph: diagonal must be positive");
  }
  return MobilityGraph(nodes, std::move(transition));
}

MobilityGraph MobilityGraph::ring_plus_self(std::size_t nodes, double self_weight) {
  if (nodes < 2) return identity(nodes);
  std::vector<double> w(nodes * nodes, 0.0);
  for (std::size_t i = 0; i < nodes; ++i) {
    w[i * nodes + i] = self_weight;
    const double side = (1.0 - self_weight) / (nodes == 2 ? 1.0 : 2.0);
    w[i * nodes + (i + 1) % nodes] += side;
    if (nodes > 2) w[i * nodes + (i + nodes - 1) % nodes] += side;
  }
  return from_weights(nodes, std::move(w));
}

MobilityGraph MobilityGraph::identity(std::size_t nodes) {
  std::vector<double> w(nodes * nodes, 0.0);
  for (std::size_t i = 0; i < nodes; ++i) w[i * nodes + i] = 1.0;
  return MobilityGraph(nodes, std::move(w));
}

Trajectory simulate_metapop(const Scenario& scenario, const MobilityGraph& graph, std::uint64_t seed) {
  scenario.validate();
  const std::size_t D = scenario.nodes();
  if (graph.nodes() != D) throw ValidationError("simulate_metapop: graph size does not match node count");
  for (std::size_t i = 0; i < D; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < D; ++j) row += graph.at(i, j);
    if (std::abs(row - 1.0) > 1e-12) throw ValidationError("simulate_metapop: graph rows must sum to 1");
  }

  Rng rng(seed);
  const double p_ei = daily_probability(scenario.epsilon);
  const double p_ir = daily_probability(scenario.mu);

  std::vector<std::int64_t> S(D), E(D), I(D), R(D);
  for (std::size_t d = 0; d < D; ++d) {
    S[d] = scenario.population[d] - scenario.e0[d] - scenario.i0[d];
    E[d] = scenario.e0[d];
    I[d] = scenario.i0[d];
    R[d] = 0;
  }

  Trajectory traj(static_cast<std::size_t>(scenario.horizon), D, seed);
  std::vector<double> prevalence(D);
  for (std::size_t t = 1; t <= traj.horizon(); ++t) {
    for (std::size_t j = 0; j < D; ++j) {
      prevalence[j] = static_cast<double>(I[j]) / static_cast<double>(scenario.population[j]);
    }
    std::vector<std::int64_t> dSE(D), dEI(D), dIR(D);
    for (std::size_t d = 0; d < D; ++d) {
      double pressure = 0.0;
      for (std::size_t j = 0; j < D; ++j) pressure += graph.at(d, j) * prevalence[j];
      const double p_se = daily_probability(scenario.beta * pressure);
      dSE[d] = std::binomial_distribution<std::int64_t>(S[d], p_se)(rng);
      dEI[d] = std::binomial_distribution<std::int64_t>(E[d], p_ei)(rng);
      dIR[d] = std::binomial_distribution<std::int64_t>(I[d], p_ir)(rng);
    }
    for (std::size_t d = 0; d < D; ++d) {
      S[d] -= dSE[d];
      E[d] += dSE[d] - dEI[d];
      I[d] += dEI[d] - dIR[d];
      R[d] += dIR[d];
      traj.set_state(t, d, kS, S[d]);
      traj.set_state(t, d, kE, E[d]);
      traj.set_state(t, d, kI, I[d]);
      traj.set_state(t, d, kR, R[d]);
      traj.set_incidence(t, d, kSE, dSE[d]);
      traj.set_incidence(t, d, kEI, dEI[d]);
      traj.set_incidence(t, d, kIR, dIR[d]);
    }
  }
  return traj;
}

Scenario metapop_scenario(double beta, double epsilon, std::size_t nodes, std::int64_t node_population,
                          std::int64_t e0, std::int64_t i0, std::size_t seed_node, int horizon,
                          double mu) {
  Scenario s;
  s.beta = beta;
  s.epsilon = epsilon;
  s.mu = mu;
  s.horizon = horizon;
  s.population.assign(nodes, node_population);
  s.e0.assign(nodes, 0);
  s.i0.assign(nodes, 0);
  s.e0.at(seed_node) = e0;
  s.i0.at(seed_node) = i0;
  return s;
}

}  // namespace inp::epi
