#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace inp::np {

enum class ModelKind { np, stnp };
enum class ObsNoise { learned, fixed };

/// Shape of a surrogate. For NP, theta is one row of theta_dim values and x
/// is the flattened horizon*nodes*x_dim series. For STNP theta is per node
/// (nodes*theta_dim) and x per step per node.
struct NpArchitecture {
  ModelKind kind = ModelKind::np;
  std::size_t theta_dim = 2;
  std::size_t x_dim = 1;
  std::size_t horizon = 100;
  std::size_t nodes = 1;
  std::size_t latent_dim = 32;
  std::vector<std::size_t> encoder_widths{128, 128};
  std::vector<std::size_t> decoder_widths{128, 128};

  // STNP only
  std::size_t node_hidden = 16;
  std::size_t state_hidden = 16;
  std::size_t recurrent_width = 64;
  std::size_t diffusion_order = 2;
  bool plain_node_cell = false;   // GRU node cell; needs nodes == 1
  std::vector<double> transition;  // nodes x nodes, row-normalized

  ObsNoise obs_noise = ObsNoise::learned;
  double fixed_obs_std = 0.1;
  std::uint64_t init_seed = 0;

  std::size_t theta_width() const { return kind == ModelKind::np ? theta_dim : nodes * theta_dim; }
  std::size_t x_width() const { return horizon * nodes * x_dim; }
  std::size_t latent_width() const { return kind == ModelKind::np ? latent_dim : horizon * latent_dim; }
  /// Per-step slice of x for STNP.
  std::size_t step_width() const { return nodes * x_dim; }

  void validate() const;
  nlohmann::json to_json() const;
  static NpArchitecture from_json(const nlohmann::json& j);
};

}  // namespace inp::np
