#include "inp/epi/grid.hpp"

#include <cmath>

#include "inp/core/errors.hpp"

namespace inp::epi {

std::vector<double> Range::values() const {
  if (!(step > 0.0) || stop < start - 1e-12) throw ValidationError("range: empty or invalid");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Round to 12 decimals so 1.1 + 3 * 0.1 prints and compares as 1.4.
    out[i] = std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12;
  }
  return out;
}

std::vector<Scenario> scenario_grid(const GridSpec& spec) {
  const auto betas = spec.beta.values();
  const auto eps = spec.epsilon.values();
  std::vector<Scenario> out;
  out.reserve(betas.size() * eps.size());
  for (double b : betas) {
    for (double e : eps) {
      Scenario s = spec.base;
      s.id = static_cast<int>(out.size());
      s.beta = b;
      s.epsilon = e;
      s.validate();
      out.push_back(std::move(s));
    }
  }
  return out;
}

namespace {

std::vector<double> spaced_midpoints(const std::vector<double>& grid, std::size_t count) {
  if (grid.size() < 2 || count == 0) return {};
  const std::size_t n_mid = grid.size() - 1;
  count = std::min(count, n_mid);
  std::vector<double> out;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t idx =
        count == 1 ? n_mid / 2
                   : static_cast<std::size_t>(std::lround(static_cast<double>(k) * (n_mid - 1) / (count - 1)));
    out.push_back(std::round((grid[idx] + grid[idx + 1]) * 0.5 * 1e12) / 1e12);
  }
  return out;
}

}  // namespace

ScenarioDesign grid_design(const GridSpec& spec, std::size_t n_beta_holdout, std::size_t n_eps_holdout) {
  ScenarioDesign design;
  design.candidates = scenario_grid(spec);
  const auto hb = spaced_midpoints(spec.beta.values(), n_beta_holdout);
  const auto he = spaced_midpoints(spec.epsilon.values(), n_eps_holdout);
  int next_id = static_cast<int>(design.candidates.size());
  bool to_validation = true;
  for (double b : hb) {
    for (double e : he) {
      Scenario s = spec.base;
      s.id = next_id++;
      s.beta = b;
      s.epsilon = e;
      s.validate();
      (to_validation ? design.validation : design.test).push_back(std::move(s));
      to_validation = !to_validation;
    }
  }
  return design;
}

ScenarioDesign default_seir_design(const Scenario& base) {
  GridSpec spec;
  spec.base = base;
  return grid_design(spec, 10, 3);
}

}  // namespace inp::epi
