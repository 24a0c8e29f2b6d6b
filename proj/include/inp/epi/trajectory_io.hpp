#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "inp/epi/seir.hpp"

namespace inp::epi {

nlohmann::json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);

/// One JSONL line: scenario fields, seed, and per-day integer arrays
/// ("states": T rows of D*4 counts S,E,I,R per node; "incidence": T rows of
/// D*3 counts SE,EI,IR per node).
struct TrajectoryRecord {
  Scenario scenario;
  Trajectory trajectory;
};

nlohmann::json record_to_json(const TrajectoryRecord& r);
TrajectoryRecord record_from_json(const nlohmann::json& j);

void write_jsonl(const std::filesystem::path& path, const std::vector<TrajectoryRecord>& records);
std::vector<TrajectoryRecord> read_jsonl(const std::filesystem::path& path);

}  // namespace inp::epi
