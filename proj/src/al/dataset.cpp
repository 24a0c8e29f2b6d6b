#include "inp/al/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "inp/core/errors.hpp"
#include "inp/core/rng.hpp"
#include "inp/epi/trajectory_io.hpp"

namespace inp::al {

std::string to_string(Role r) {
  switch (r) {
    case Role::candidate: return "candidate";
    case Role::acquired: return "acquired";
    case Role::validation: return "validation";
    case Role::test: return "test";
  }
  return "?";
}

Role role_from_string(const std::string& name) {
  if (name == "candidate") return Role::candidate;
  if (name == "acquired") return Role::acquired;
  if (name == "validation") return Role::validation;
  if (name == "test") return Role::test;
  throw ValidationError("unknown role: " + name);
}

std::uint64_t sample_seed(std::uint64_t base, int scenario_id, std::size_t k) {
  return stream_seed(base, "sample", {static_cast<std::uint64_t>(scenario_id), k});
}

SimDataset SimDataset::from_design(const epi::ScenarioDesign& design) {
  SimDataset d;
  for (const auto& s : design.candidates) d.add(s, Role::candidate);
  for (const auto& s : design.validation) d.add(s, Role::validation);
  for (const auto& s : design.test) d.add(s, Role::test);
  return d;
}

void SimDataset::add(const epi::Scenario& scenario, Role role) {
  scenario.validate();
  if (scenario.id < 0) throw ValidationError("dataset: scenario id must be >= 0");
  if (contains(scenario.id)) throw ValidationError("dataset: duplicate scenario id " + std::to_string(scenario.id));
  if (role == Role::acquired) throw ValidationError("dataset: scenarios enter as candidate, validation or test");
  entries_[scenario.id] = Entry{scenario, role, role == Role::candidate, {}};
}

const SimDataset::Entry& SimDataset::entry(int id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw ValidationError("dataset: unknown scenario id " + std::to_string(id));
  return it->second;
}

SimDataset::Entry& SimDataset::entry(int id) {
  return const_cast<Entry&>(static_cast<const SimDataset&>(*this).entry(id));
}

std::vector<int> SimDataset::ids(Role role) const {
  std::vector<int> out;
  for (const auto& [id, e] : entries_)
    if (e.role == role) out.push_back(id);
  return out;
}

std::size_t SimDataset::pool_size() const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const auto& kv) { return kv.second.pool; }));
}

void SimDataset::set_samples(int id, std::vector<epi::Trajectory> samples) {
  entry(id).samples = std::move(samples);
}

void SimDataset::simulate(int id, std::size_t m, const Simulator& sim, std::uint64_t base_seed) {
  Entry& e = entry(id);
  if (e.samples.size() >= m) return;
  for (std::size_t k = e.samples.size(); k < m; ++k) e.samples.push_back(sim(e.scenario, sample_seed(base_seed, id, k)));
}

void SimDataset::seed_initial(std::span<const int> ids) {
  if (!initial_.empty() || !history_.empty()) throw ValidationError("dataset: initial set already chosen");
  std::set<int> seen;
  for (int id : ids) {
    if (!seen.insert(id).second) throw ValidationError("dataset: duplicate initial id");
    if (entry(id).role != Role::candidate) throw ValidationError("dataset: initial scenario is not a candidate");
  }
  for (int id : ids) {
    entry(id).role = Role::acquired;
    initial_.push_back(id);
  }
}

void SimDataset::acquire(int round, std::span<const int> ids, std::span<const double> scores) {
  const int expected = history_.empty() ? 1 : history_.back().round + 1;
  if (round != expected)
    throw ValidationError("dataset: round " + std::to_string(round) + " out of order, expected " +
                          std::to_string(expected));
  if (scores.size() != ids.size()) throw ValidationError("dataset: one score per acquired id");
  std::set<int> seen;
  for (int id : ids) {
    if (!seen.insert(id).second) throw ValidationError("dataset: duplicate id in batch");
    const Entry& e = entry(id);
    if (e.role != Role::candidate || !e.pool)
      throw ValidationError("dataset: scenario " + std::to_string(id) + " is " + to_string(e.role) +
                            ", not a candidate");
  }
  for (int id : ids) entry(id).role = Role::acquired;
  history_.push_back({round, {ids.begin(), ids.end()}, {scores.begin(), scores.end()}});
}

nlohmann::json SimDataset::to_json() const {
  nlohmann::json scen = nlohmann::json::array();
  for (const auto& [id, e] : entries_) {
    auto j = epi::scenario_to_json(e.scenario);
    j["role"] = to_string(e.role);
    j["pool"] = e.pool;
    scen.push_back(std::move(j));
  }
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& h : history_) hist.push_back({{"round", h.round}, {"ids", h.ids}, {"scores", h.scores}});
  return {{"scenarios", scen}, {"initial", initial_}, {"history", hist}};
}

SimDataset SimDataset::from_json(const nlohmann::json& j) {
  SimDataset d;
  try {
    for (const auto& s : j.at("scenarios")) {
      const auto sc = epi::scenario_from_json(s);
      const bool pool = s.at("pool").get<bool>();
      d.add(sc, pool ? Role::candidate : role_from_string(s.at("role").get<std::string>()));
      d.entry(sc.id).role = role_from_string(s.at("role").get<std::string>());
      if (d.entry(sc.id).role == Role::acquired && !pool) throw ValidationError("dataset: acquired scenario outside pool");
    }
    d.initial_ = j.at("initial").get<std::vector<int>>();
    for (const auto& h : j.at("history"))
      d.history_.push_back({h.at("round").get<int>(), h.at("ids").get<std::vector<int>>(),
                            h.at("scores").get<std::vector<double>>()});
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("dataset: malformed json: ") + e.what());
  }
  for (std::size_t i = 0; i < d.history_.size(); ++i)
    if (d.history_[i].round != static_cast<int>(i) + 1) throw IoError("dataset: history rounds not contiguous");
  return d;
}

std::vector<int> corner_initial_ids(const SimDataset& data) {
  const auto cand = data.ids(Role::candidate);
  if (cand.size() < 2) throw ValidationError("dataset: need two candidates for the initial set");
  std::vector<double> eps;
  for (int id : cand) eps.push_back(data.scenario(id).epsilon);
  std::sort(eps.begin(), eps.end());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  const double median_eps = eps[(eps.size() - 1) / 2];
  int lo = -1, hi = -1;
  for (int id : cand) {
    const auto& s = data.scenario(id);
    if (s.epsilon != median_eps) continue;
    if (lo < 0 || s.beta < data.scenario(lo).beta) lo = id;
    if (hi < 0 || s.beta > data.scenario(hi).beta) hi = id;
  }
  if (lo == hi) throw ValidationError("dataset: beta grid has a single value");
  return {lo, hi};
}

np::SampleSet sample_set(const SimDataset& data, std::span<const int> ids, np::FeatureKind kind) {
  np::SampleSet out;
  for (int id : ids) {
    const auto theta = np::theta_features(data.scenario(id), kind);
    if (!data.has_samples(id)) throw ValidationError("dataset: scenario " + std::to_string(id) + " has no samples");
    for (const auto& tr : data.samples(id)) {
      const auto x = np::x_features(tr, kind);
      if (out.theta_width == 0) {
        out.theta_width = theta.size();
        out.x_width = x.size();
      }
      out.append(theta, x, id);
    }
  }
  return out;
}

std::vector<double> seed_mean(const SimDataset& data, int id, np::FeatureKind kind) {
  const auto& samples = data.samples(id);
  if (samples.empty()) throw ValidationError("dataset: scenario " + std::to_string(id) + " has no samples");
  std::vector<double> mean;
  for (const auto& tr : samples) {
    const auto x = np::x_features(tr, kind);
    if (mean.empty()) mean.assign(x.size(), 0.0);
    for (std::size_t j = 0; j < x.size(); ++j) mean[j] += x[j];
  }
  for (auto& v : mean) v /= static_cast<double>(samples.size());
  return mean;
}

double mae(std::span<const double> predictions, std::span<const double> truth) {
  if (predictions.size() != truth.size())
    throw ValidationError("mae: shape mismatch " + std::to_string(predictions.size()) + " vs " +
                          std::to_string(truth.size()));
  if (truth.empty()) throw ValidationError("mae: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += std::abs(predictions[i] - truth[i]);
  return s / static_cast<double>(truth.size());
}

}  // namespace inp::al
