#include "inp/cli/dataset_store.hpp"

#include <map>
#include <sstream>

#include "inp/core/errors.hpp"
#include "inp/core/files.hpp"
#include "inp/epi/metapop.hpp"
#include "inp/epi/trajectory_io.hpp"

namespace inp::cli {

namespace fs = std::filesystem;

namespace {

nlohmann::json range_json(const epi::Range& r) { return {r.start, r.stop, r.step}; }

epi::Range range_from(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

}  // namespace

void DatasetSpec::validate() const {
  if (model != "seir" && model != "metapop") throw ValidationError("dataset: model must be seir or metapop");
  if (samples < 1) throw ValidationError("dataset: samples must be >= 1");
  if (model == "metapop" && nodes < 2) throw ValidationError("dataset: metapop needs at least 2 nodes");
  if (!(self_weight > 0.0 && self_weight <= 1.0)) throw ValidationError("dataset: self weight must be in (0, 1]");
  grid.beta.values();
  grid.epsilon.values();
}

nlohmann::json DatasetSpec::to_json() const {
  // The grid overwrites beta and epsilon; store valid placeholders.
  epi::Scenario base = grid.base;
  base.beta = grid.beta.start;
  base.epsilon = grid.epsilon.start;
  return {{"model", model},
          {"beta", range_json(grid.beta)},
          {"epsilon", range_json(grid.epsilon)},
          {"base", epi::scenario_to_json(base)},
          {"holdout_beta", holdout_beta},
          {"holdout_eps", holdout_eps},
          {"samples", samples},
          {"seed", seed},
          {"nodes", nodes},
          {"self_weight", self_weight}};
}

DatasetSpec DatasetSpec::from_json(const nlohmann::json& j) {
  DatasetSpec s;
  try {
    s.model = j.at("model").get<std::string>();
    s.grid.beta = range_from(j.at("beta"));
    s.grid.epsilon = range_from(j.at("epsilon"));
    s.grid.base = epi::scenario_from_json(j.at("base"));
    s.holdout_beta = j.at("holdout_beta").get<std::size_t>();
    s.holdout_eps = j.at("holdout_eps").get<std::size_t>();
    s.samples = j.at("samples").get<std::size_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.nodes = j.at("nodes").get<std::size_t>();
    s.self_weight = j.at("self_weight").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("dataset manifest: ") + e.what());
  }
  return s;
}

epi::ScenarioDesign DatasetSpec::design() const {
  validate();
  return epi::grid_design(grid, holdout_beta, holdout_eps);
}

al::Simulator DatasetSpec::simulator() const {
  if (model == "seir") return epi::simulate_seir;
  const auto graph = epi::MobilityGraph::ring_plus_self(nodes, self_weight);
  return [graph](const epi::Scenario& s, std::uint64_t seed) { return epi::simulate_metapop(s, graph, seed); };
}

np::FeatureKind DatasetSpec::features() const {
  return model == "seir" ? np::FeatureKind::infectious : np::FeatureKind::spatial;
}

np::NpArchitecture DatasetSpec::architecture() const {
  const auto h = static_cast<std::size_t>(grid.base.horizon);
  if (model == "seir") return np::default_architecture(features(), h);
  return np::default_architecture(features(), h, nodes,
                                  epi::MobilityGraph::ring_plus_self(nodes, self_weight).transition());
}

DatasetSpec default_seir_spec() { return DatasetSpec{}; }

DatasetSpec default_metapop_spec(std::size_t nodes) {
  DatasetSpec s;
  s.model = "metapop";
  s.nodes = nodes;
  s.grid.base = epi::metapop_scenario(2.0, 0.45, nodes, 20000, 400, 400, 0, 100);
  return s;
}

fs::path manifest_path(const fs::path& jsonl) {
  fs::path p = jsonl;
  p.replace_extension(".manifest.json");
  return p;
}

void write_dataset(const fs::path& jsonl, const DatasetSpec& spec) {
  al::SimDataset data = al::SimDataset::from_design(spec.design());
  const auto sim = spec.simulator();
  std::ostringstream out;
  nlohmann::json table = nlohmann::json::array();
  for (al::Role r : {al::Role::candidate, al::Role::validation, al::Role::test})
    for (int id : data.ids(r)) {
      auto j = epi::scenario_to_json(data.scenario(id));
      j["split"] = al::to_string(r);
      table.push_back(std::move(j));
    }
  std::sort(table.begin(), table.end(),
            [](const auto& a, const auto& b) { return a.at("id").template get<int>() < b.at("id").template get<int>(); });
  for (const auto& row : table) {
    const int id = row.at("id").get<int>();
    data.simulate(id, spec.samples, sim, spec.seed);
    for (const auto& tr : data.samples(id)) out << epi::record_to_json({data.scenario(id), tr}).dump() << '\n';
  }
  const std::string body = out.str();
  files::write_text_atomic(jsonl, body);
  const nlohmann::json manifest = {{"version", kManifestVersion},
                                   {"kind", "dataset"},
                                   {"spec", spec.to_json()},
                                   {"scenarios", table},
                                   {"sample_seed", "stream_seed(seed, \"sample\", {scenario_id, k})"},
                                   {"records", table.size() * spec.samples},
                                   {"files", {{jsonl.filename().string(), files::sha256_hex(body)}}}};
  files::write_text_atomic(manifest_path(jsonl), manifest.dump(2) + "\n");
}

LoadedDataset load_dataset(const fs::path& jsonl) {
  const fs::path mpath = manifest_path(jsonl);
  if (!fs::exists(mpath)) throw IoError("dataset manifest mismatch: missing " + mpath.string());
  LoadedDataset out;
  try {
    out.manifest = nlohmann::json::parse(files::read_text(mpath));
  } catch (const nlohmann::json::exception&) {
    throw IoError("dataset manifest mismatch: " + mpath.string() + " is not valid json");
  }
  if (out.manifest.value("version", -1) != kManifestVersion)
    throw IoError("dataset manifest mismatch: unsupported version");
  const std::string body = files::read_text(jsonl);
  const std::string name = jsonl.filename().string();
  if (!out.manifest.contains("files") || !out.manifest["files"].contains(name) ||
      out.manifest["files"][name].get<std::string>() != files::sha256_hex(body))
    throw IoError("dataset manifest mismatch: checksum of " + name + " differs");
  out.spec = DatasetSpec::from_json(out.manifest.at("spec"));
  try {
    for (const auto& row : out.manifest.at("scenarios"))
      out.data.add(epi::scenario_from_json(row), al::role_from_string(row.at("split").get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("dataset manifest mismatch: ") + e.what());
  }

  std::map<int, std::vector<epi::Trajectory>> samples;
  std::istringstream in(body);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    epi::TrajectoryRecord rec;
    try {
      rec = epi::record_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("dataset: malformed record: ") + e.what());
    }
    const int id = rec.scenario.id;
    if (!out.data.contains(id) || epi::scenario_to_json(out.data.scenario(id)) != epi::scenario_to_json(rec.scenario))
      throw IoError("dataset manifest mismatch: record for unknown or altered scenario " + std::to_string(id));
    auto& list = samples[id];
    if (rec.trajectory.seed() != al::sample_seed(out.spec.seed, id, list.size()))
      throw IoError("dataset manifest mismatch: unexpected seed for scenario " + std::to_string(id));
    list.push_back(std::move(rec.trajectory));
  }
  for (al::Role r : {al::Role::candidate, al::Role::validation, al::Role::test})
    for (int id : out.data.ids(r)) {
      auto it = samples.find(id);
      if (it == samples.end() || it->second.size() != out.spec.samples)
        throw IoError("dataset manifest mismatch: scenario " + std::to_string(id) + " sample count");
      out.data.set_samples(id, std::move(it->second));
    }
  return out;
}

}  // namespace inp::cli
