#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "inp/al/dataset.hpp"
#include "inp/epi/grid.hpp"
#include "inp/np/architecture.hpp"
#include "inp/np/features.hpp"

namespace inp::cli {

inline constexpr int kManifestVersion = 1;

/// What a dataset was generated from. Enough to rebuild the simulator.
struct DatasetSpec {
  std::string model = "seir";  // seir | metapop
  epi::GridSpec grid;
  std::size_t holdout_beta = 10;
  std::size_t holdout_eps = 3;
  std::size_t samples = 30;
  std::uint64_t seed = 0;
  std::size_t nodes = 1;
  double self_weight = 0.8;

  void validate() const;
  nlohmann::json to_json() const;
  static DatasetSpec from_json(const nlohmann::json& j);

  epi::ScenarioDesign design() const;
  al::Simulator simulator() const;
  np::FeatureKind features() const;
  np::NpArchitecture architecture() const;
};

/// SEIR defaults: the 30 x 9 grid, 100 days, 10 x 3 holdouts.
DatasetSpec default_seir_spec();
/// Metapopulation on a ring of `nodes` equal nodes seeded at node 0.
DatasetSpec default_metapop_spec(std::size_t nodes = 5);

std::filesystem::path manifest_path(const std::filesystem::path& jsonl);

/// Simulates every scenario and writes the JSONL plus its manifest (spec,
/// scenario table with splits, sample-seed rule, checksum).
void write_dataset(const std::filesystem::path& jsonl, const DatasetSpec& spec);

struct LoadedDataset {
  DatasetSpec spec;
  al::SimDataset data;
  nlohmann::json manifest;
};

/// Reads and cross-checks the JSONL against its manifest. IoError on any
/// mismatch.
LoadedDataset load_dataset(const std::filesystem::path& jsonl);

}  // namespace inp::cli
