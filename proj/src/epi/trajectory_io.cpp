#include "inp/epi/trajectory_io.hpp"

#include <fstream>

#include "inp/core/errors.hpp"

namespace inp::epi {

nlohmann::json scenario_to_json(const Scenario& s) {
  return {{"id", s.id},           {"beta", s.beta},       {"epsilon", s.epsilon},
          {"mu", s.mu},           {"horizon", s.horizon}, {"population", s.population},
          {"e0", s.e0},           {"i0", s.i0}};
}

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  s.id = j.at("id").get<int>();
  s.beta = j.at("beta").get<double>();
  s.epsilon = j.at("epsilon").get<double>();
  s.mu = j.at("mu").get<double>();
  s.horizon = j.at("horizon").get<int>();
  s.population = j.at("population").get<std::vector<std::int64_t>>();
  s.e0 = j.at("e0").get<std::vector<std::int64_t>>();
  s.i0 = j.at("i0").get<std::vector<std::int64_t>>();
  s.validate();
  return s;
}

nlohmann::json record_to_json(const TrajectoryRecord& r) {
  const auto& tr = r.trajectory;
  const std::size_t D = tr.nodes();
  nlohmann::json states = nlohmann::json::array();
  nlohmann::json incidence = nlohmann::json::array();
  for (std::size_t t = 1; t <= tr.horizon(); ++t) {
    std::vector<std::int64_t> srow, irow;
    for (std::size_t d = 0; d < D; ++d) {
      for (std::size_t c = 0; c < kCompartments; ++c) srow.push_back(tr.state(t, d, c));
      for (std::size_t k = 0; k < kTransitions; ++k) irow.push_back(tr.incidence(t, d, k));
    }
    states.push_back(std::move(srow));
    incidence.push_back(std::move(irow));
  }
  return {{"scenario_id", r.scenario.id},
          {"scenario", scenario_to_json(r.scenario)},
          {"seed", tr.seed()},
          {"states", std::move(states)},
          {"incidence", std::move(incidence)}};
}

TrajectoryRecord record_from_json(const nlohmann::json& j) {
  TrajectoryRecord r;
  r.scenario = scenario_from_json(j.at("scenario"));
  const std::size_t D = r.scenario.nodes();
  const auto& states = j.at("states");
  const auto& incidence = j.at("incidence");
  const std::size_t T = states.size();
  if (incidence.size() != T) throw IoError("trajectory record: states/incidence length mismatch");
  r.trajectory = Trajectory(T, D, j.at("seed").get<std::uint64_t>());
  for (std::size_t t = 1; t <= T; ++t) {
    const auto srow = states[t - 1].get<std::vector<std::int64_t>>();
    const auto irow = incidence[t - 1].get<std::vector<std::int64_t>>();
    if (srow.size() != D * kCompartments || irow.size() != D * kTransitions) {
      throw IoError("trajectory record: row width does not match node count");
    }
    for (std::size_t d = 0; d < D; ++d) {
      for (std::size_t c = 0; c < kCompartments; ++c) r.trajectory.set_state(t, d, c, srow[d * kCompartments + c]);
      for (std::size_t k = 0; k < kTransitions; ++k)
        r.trajectory.set_incidence(t, d, k, irow[d * kTransitions + k]);
    }
  }
  return r;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<TrajectoryRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<TrajectoryRecord> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<TrajectoryRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace inp::epi
