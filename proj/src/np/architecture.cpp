#include "inp/np/architecture.hpp"

#include <cmath>

#include "inp/core/errors.hpp"

namespace inp::np {

void NpArchitecture::validate() const {
  if (theta_dim < 1 || x_dim < 1 || horizon < 1 || nodes < 1 || latent_dim < 1) {
    throw ValidationError("architecture: all dimensions must be >= 1");
  }
  for (auto w : encoder_widths)
    if (w < 1) throw ValidationError("architecture: zero encoder width");
  for (auto w : decoder_widths)
    if (w < 1) throw ValidationError("architecture: zero decoder width");
  if (obs_noise == ObsNoise::fixed && !(fixed_obs_std > 0.0)) {
    throw ValidationError("architecture: fixed observation std must be positive");
  }
  if (kind == ModelKind::np) {
    if (encoder_widths.empty()) throw ValidationError("architecture: NP encoder needs a width");
    return;
  }
  if (node_hidden < 1 || state_hidden < 1 || recurrent_width < 1) {
    throw ValidationError("architecture: STNP widths must be >= 1");
  }
  if (plain_node_cell) {
    if (nodes != 1) throw ValidationError("architecture: plain node cell needs a single node");
    return;
  }
  if (transition.size() != nodes * nodes) {
    throw ValidationError("architecture: transition must be nodes x nodes");
  }
  for (std::size_t i = 0; i < nodes; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) s += transition[i * nodes + j];
    if (std::abs(s - 1.0) > 1e-12) throw ValidationError("architecture: transition rows must sum to 1");
  }
}

nlohmann::json NpArchitecture::to_json() const {
  return {{"kind", kind == ModelKind::np ? "np" : "stnp"},
          {"theta_dim", theta_dim},
          {"x_dim", x_dim},
          {"horizon", horizon},
          {"nodes", nodes},
          {"latent_dim", latent_dim},
          {"encoder_widths", encoder_widths},
          {"decoder_widths", decoder_widths},
          {"node_hidden", node_hidden},
          {"state_hidden", state_hidden},
          {"recurrent_width", recurrent_width},
          {"diffusion_order", diffusion_order},
          {"plain_node_cell", plain_node_cell},
          {"transition", transition},
          {"obs_noise", obs_noise == ObsNoise::learned ? "learned" : "fixed"},
          {"fixed_obs_std", fixed_obs_std},
          {"init_seed", init_seed}};
}

NpArchitecture NpArchitecture::from_json(const nlohmann::json& j) {
  NpArchitecture a;
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "np" && kind != "stnp") throw IoError("architecture: unknown kind " + kind);
  a.kind = kind == "np" ? ModelKind::np : ModelKind::stnp;
  a.theta_dim = j.at("theta_dim").get<std::size_t>();
  a.x_dim = j.at("x_dim").get<std::size_t>();
  a.horizon = j.at("horizon").get<std::size_t>();
  a.nodes = j.at("nodes").get<std::size_t>();
  a.latent_dim = j.at("latent_dim").get<std::size_t>();
  a.encoder_widths = j.at("encoder_widths").get<std::vector<std::size_t>>();
  a.decoder_widths = j.at("decoder_widths").get<std::vector<std::size_t>>();
  a.node_hidden = j.at("node_hidden").get<std::size_t>();
  a.state_hidden = j.at("state_hidden").get<std::size_t>();
  a.recurrent_width = j.at("recurrent_width").get<std::size_t>();
  a.diffusion_order = j.at("diffusion_order").get<std::size_t>();
  a.plain_node_cell = j.at("plain_node_cell").get<bool>();
  a.transition = j.at("transition").get<std::vector<double>>();
  a.obs_noise = j.at("obs_noise").get<std::string>() == "fixed" ? ObsNoise::fixed : ObsNoise::learned;
  a.fixed_obs_std = j.at("fixed_obs_std").get<double>();
  a.init_seed = j.at("init_seed").get<std::uint64_t>();
  a.validate();
  return a;
}

}  // namespace inp::np
