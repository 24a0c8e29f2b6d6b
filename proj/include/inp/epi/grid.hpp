#pragma once

#include <vector>

#include "inp/epi/seir.hpp"

namespace inp::epi {

/// Inclusive arithmetic range; the count is computed by rounding so that
/// decimal steps do not drop the end point.
struct Range {
  double start = 0.0;
  double stop = 0.0;
  double step = 0.1;

  std::vector<double> values() const;
};

struct GridSpec {
  Range beta{1.1, 4.0, 0.1};
  Range epsilon{0.25, 0.65, 0.05};
  Scenario base{};  // mu, horizon, population and seeds copied into every scenario
};

/// Cartesian grid in beta-major order with ids 0..n-1.
std::vector<Scenario> scenario_grid(const GridSpec& spec);

/// Candidate pool plus off-grid validation and test holdouts.
struct ScenarioDesign {
  std::vector<Scenario> candidates;
  std::vector<Scenario> validation;
  std::vector<Scenario> test;
};

/// Default SEIR design: the 30 x 9 grid as candidates (ids 0..269) and 30
/// holdouts at cell midpoints (10 beta midpoints x 3 epsilon midpoints, evenly
/// spaced), alternately assigned to validation and test (ids 270..299).
ScenarioDesign default_seir_design(const Scenario& base = {});

/// Design for an arbitrary grid: holdouts are `n_holdout` evenly spaced
/// beta midpoints crossed with `n_eps_holdout` evenly spaced epsilon midpoints.
ScenarioDesign grid_design(const GridSpec& spec, std::size_t n_beta_holdout, std::size_t n_eps_holdout);

}  // namespace inp::epi
