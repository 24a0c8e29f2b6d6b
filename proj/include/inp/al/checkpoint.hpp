#pragma once

#include <filesystem>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "inp/al/dataset.hpp"
#include "inp/al/loop.hpp"
#include "inp/np/surrogate.hpp"

namespace inp::al {

inline constexpr int kCheckpointVersion = 1;

/// Everything needed to continue a run after `round`. Random streams are all
/// keyed by (seed, round, ...), so no generator state is stored.
struct LoopState {
  int round = -1;
  bool finished = false;
  std::string stop_reason;
  double best_val = std::numeric_limits<double>::infinity();
  SimDataset data;
  std::unique_ptr<np::Surrogate> surrogate;
  std::vector<RoundMetrics> metrics;
};

/// {version, config_hash, checksum, payload}; checksum is the SHA-256 of the
/// serialized payload.
void checkpoint_round(const std::filesystem::path& path, const LoopState& state, const std::string& config_hash);

/// IoError on unreadable, corrupt or wrong-version files; ValidationError when
/// the stored config hash differs from `expected_hash`.
LoopState resume_round(const std::filesystem::path& path, const std::string& expected_hash);

nlohmann::json metrics_to_json(const RoundMetrics& m);
RoundMetrics metrics_from_json(const nlohmann::json& j);

}  // namespace inp::al
