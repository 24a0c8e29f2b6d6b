#include "inp/epi/seir.hpp"

#include <cmath>
#include <random>

#include "inp/core/errors.hpp"
#include "inp/core/rng.hpp"
#include "inp/epi/metapop.hpp"

namespace inp::epi {

void Scenario::validate() const {
  auto fail = [this](const std::string& what) {
    throw ValidationError("scenario " + std::to_string(id) + ": " + what);
  };
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail("beta must be >= 0");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) fail("epsilon must be in (0, 1]");
  if (!(mu > 0.0) || !std::isfinite(mu)) fail("mu must be > 0");
  if (horizon < 1) fail("horizon must be >= 1");
  if (population.empty()) fail("no nodes");
  if (e0.size() != population.size() || i0.size() != population.size()) {
    fail("per-node seed vectors must match node count");
  }
  for (std::size_t d = 0; d < population.size(); ++d) {
    if (population[d] <= 0) fail("population must be positive");
    if (e0[d] < 0 || i0[d] < 0) fail("initial counts must be nonnegative");
    if (e0[d] + i0[d] > population[d]) fail("E0 + I0 exceeds population");
  }
}

Trajectory::Trajectory(std::size_t horizon, std::size_t nodes, std::uint64_t seed)
    : horizon_(horizon),
      nodes_(nodes),
      seed_(seed),
      states_(horizon * nodes * kCompartments, 0),
      incidence_(horizon * nodes * kTransitions, 0) {}

std::vector<double> Trajectory::series(std::size_t node, std::size_t compartment) const {
  std::vector<double> out(horizon_);
  for (std::size_t t = 1; t <= horizon_; ++t) out[t - 1] = static_cast<double>(state(t, node, compartment));
  return out;
}

double daily_probability(double rate) { return -std::expm1(-rate); }

Trajectory simulate_seir(const Scenario& scenario, std::uint64_t seed) {
  scenario.validate();
  if (scenario.nodes() != 1) {
    throw ValidationError("simulate_seir: single-population model needs exactly one node");
  }
  return simulate_metapop(scenario, MobilityGraph::identity(1), seed);
}

}  // namespace inp::epi
