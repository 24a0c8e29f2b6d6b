#include "inp/al/checkpoint.hpp"

#include <cmath>

#include "inp/core/errors.hpp"
#include "inp/core/files.hpp"

namespace inp::al {

nlohmann::json metrics_to_json(const RoundMetrics& m) {
  return {{"round", m.round},       {"acquired", m.acquired}, {"pct_data", m.pct_data},
          {"test_mae", m.test_mae}, {"val_loss", m.val_loss}, {"steps", m.steps}};
}

RoundMetrics metrics_from_json(const nlohmann::json& j) {
  RoundMetrics m;
  m.round = j.at("round").get<int>();
  m.acquired = j.at("acquired").get<std::size_t>();
  m.pct_data = j.at("pct_data").get<double>();
  m.test_mae = j.at("test_mae").get<double>();
  m.val_loss = j.at("val_loss").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                          : j.at("val_loss").get<double>();
  m.steps = j.at("steps").get<std::size_t>();
  return m;
}

void checkpoint_round(const std::filesystem::path& path, const LoopState& state, const std::string& config_hash) {
  if (!state.surrogate) throw ValidationError("checkpoint: no surrogate");
  nlohmann::json metrics = nlohmann::json::array();
  for (const auto& m : state.metrics) metrics.push_back(metrics_to_json(m));
  const nlohmann::json payload = {
      {"round", state.round},
      {"finished", state.finished},
      {"stop_reason", state.stop_reason},
      {"best_val", std::isfinite(state.best_val) ? nlohmann::json(state.best_val) : nlohmann::json()},
      {"dataset", state.data.to_json()},
      {"surrogate", state.surrogate->to_json()},
      {"metrics", metrics}};
  const std::string body = payload.dump();
  const nlohmann::json doc = {{"version", kCheckpointVersion},
                              {"config_hash", config_hash},
                              {"checksum", files::sha256_hex(body)},
                              {"payload", payload}};
  files::write_text_atomic(path, doc.dump() + "\n");
}

LoopState resume_round(const std::filesystem::path& path, const std::string& expected_hash) {
  const std::string text = files::read_text(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint integrity error: " + path.string() + " is not valid json");
  }
  if (!doc.is_object() || !doc.contains("version") || !doc.contains("payload") || !doc.contains("checksum"))
    throw IoError("checkpoint integrity error: missing fields in " + path.string());
  if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kCheckpointVersion)
    throw IoError("checkpoint version mismatch: expected " + std::to_string(kCheckpointVersion) + ", found " +
                  doc["version"].dump());
  const auto& payload = doc["payload"];
  if (!doc["checksum"].is_string() || files::sha256_hex(payload.dump()) != doc["checksum"].get<std::string>())
    throw IoError("checkpoint integrity error: checksum mismatch in " + path.string());
  if (doc.value("config_hash", std::string{}) != expected_hash)
    throw ValidationError("checkpoint config hash mismatch: the run was started with a different configuration");

  LoopState s;
  try {
    s.round = payload.at("round").get<int>();
    s.finished = payload.at("finished").get<bool>();
    s.stop_reason = payload.at("stop_reason").get<std::string>();
    if (!payload.at("best_val").is_null()) s.best_val = payload.at("best_val").get<double>();
    s.data = SimDataset::from_json(payload.at("dataset"));
    s.surrogate = np::Surrogate::from_json(payload.at("surrogate"));
    for (const auto& m : payload.at("metrics")) s.metrics.push_back(metrics_from_json(m));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint integrity error: ") + e.what());
  }
  return s;
}

}  // namespace inp::al
