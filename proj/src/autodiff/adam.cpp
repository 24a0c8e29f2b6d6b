#include "inp/autodiff/adam.hpp"

#include <cmath>

#include "inp/core/errors.hpp"

namespace inp::ad {

void adam_step(std::span<Parameter* const> params, AdamState& state) {
  if (state.m.empty()) {
    for (const Parameter* p : params) {
      state.m.emplace_back(p->shape().size(), 0.0);
      state.v.emplace_back(p->shape().size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw ValidationError("adam: state does not match parameter list");
  ++state.step;
  const auto& c = state.config;
  const double corr1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    auto& m = state.m[k];
    auto& v = state.v[k];
    if (m.size() != p.shape().size()) {
      throw ValidationError("adam: moment shape mismatch for " + p.name());
    }
    const auto g = p.grad();
    auto value = p.mutable_value();
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double mhat = m[i] / corr1;
      const double vhat = v[i] / corr2;
      value[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

Adam::Adam(std::vector<Parameter*> params, AdamConfig config) : params_(std::move(params)) {
  state_.config = config;
}

void Adam::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

void Adam::set_state(AdamState state) {
  if (!state.m.empty() && state.m.size() != params_.size()) {
    throw ValidationError("adam: restored state has wrong parameter count");
  }
  state_ = std::move(state);
}

nlohmann::json Adam::to_json() const {
  return {{"lr", state_.config.lr},       {"beta1", state_.config.beta1},
          {"beta2", state_.config.beta2}, {"eps", state_.config.eps},
          {"step", state_.step},          {"m", state_.m},
          {"v", state_.v}};
}

void Adam::load_json(const nlohmann::json& j) {
  AdamState s;
  s.config = {j.at("lr").get<double>(), j.at("beta1").get<double>(), j.at("beta2").get<double>(),
              j.at("eps").get<double>()};
  s.step = j.at("step").get<std::int64_t>();
  s.m = j.at("m").get<std::vector<std::vector<double>>>();
  s.v = j.at("v").get<std::vector<std::vector<double>>>();
  set_state(std::move(s));
}

}  // namespace inp::ad
