#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "inp/autodiff/tensor.hpp"

namespace inp::ad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moments are keyed by position in the parameter list given at construction.
struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

/// Applies one bias-corrected Adam update using each parameter's current
/// gradient, then leaves the gradients untouched (callers zero them).
void adam_step(std::span<Parameter* const> params, AdamState& state);

class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig config = {});

  void step() { adam_step(params_, state_); }
  void zero_grad();

  const AdamState& state() const { return state_; }
  void set_state(AdamState state);

  nlohmann::json to_json() const;
  void load_json(const nlohmann::json& j);

 private:
  std::vector<Parameter*> params_;
  AdamState state_;
};

}  // namespace inp::ad
