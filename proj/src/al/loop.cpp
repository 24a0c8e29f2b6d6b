#include "inp/al/loop.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "inp/acq/latent_query.hpp"
#include "inp/al/checkpoint.hpp"
#include "inp/core/errors.hpp"
#include "inp/core/files.hpp"
#include "inp/core/rng.hpp"
#include "inp/epi/trajectory_io.hpp"
#include "inp/np/predict.hpp"

namespace inp::al {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

np::TrainOptions train_options(const LoopConfig& c, int round) {
  np::TrainOptions o;
  o.steps = c.train_steps;
  o.patience = c.patience;
  o.eval_every = c.eval_every;
  o.context_fraction = c.context_fraction;
  o.max_batch = c.max_batch;
  o.seed = c.seed;
  o.stream_key = static_cast<std::uint64_t>(round);
  return o;
}

void simulate_roles(SimDataset& data, const LoopConfig& c, const Simulator& sim,
                    std::initializer_list<Role> roles) {
  for (Role r : roles)
    for (int id : data.ids(r)) data.simulate(id, c.samples, sim, c.sim_seed);
}

/// Keeps the header and rows whose leading round field is <= `round`.
void truncate_csv(const fs::path& path, int round) {
  if (!fs::exists(path)) return;
  std::istringstream in(files::read_text(path));
  std::string line, out;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      out += line + "\n";
      header = false;
      continue;
    }
    int r = 0;
    std::from_chars(line.data(), line.data() + line.size(), r);
    if (r <= round) out += line + "\n";
  }
  files::write_text_atomic(path, out);
}

/// Fixed random subset of the acquired rows used as the prior for prediction
/// and scoring in a round.
np::NormalizedBatch round_context(const np::NormalizedBatch& all, const LoopConfig& c, int round) {
  Rng rng(stream_seed(c.seed, "context", {static_cast<std::uint64_t>(round)}));
  return all.rows(np::choose_context(all.size(), c.context_fraction, rng));
}

void ensure_header(const fs::path& path, const std::string& header) {
  if (!fs::exists(path)) files::write_text_atomic(path, header + "\n");
}

}  // namespace

void LoopConfig::validate() const {
  if (batch < 1) throw ValidationError("loop: batch must be >= 1");
  if (samples < 1) throw ValidationError("loop: samples must be >= 1");
  if (patience < 1) throw ValidationError("loop: patience must be >= 1");
  if (eval_every < 1) throw ValidationError("loop: eval_every must be >= 1");
  if (n_z < 2) throw ValidationError("loop: n_z must be >= 2");
  if (n_x < 1) throw ValidationError("loop: n_x must be >= 1");
  if (!(context_fraction > 0.0 && context_fraction <= 1.0))
    throw ValidationError("loop: context fraction must be in (0, 1]");
  if (group_random > 0 && acquisition != acq::Acquisition::lig)
    throw ValidationError("loop: grouped batches are scored with lig");
  arch.validate();
}

nlohmann::json LoopConfig::to_json() const {
  return {{"acquisition", acq::to_string(acquisition)},
          {"batch", batch},
          {"samples", samples},
          {"max_rounds", max_rounds},
          {"patience", patience},
          {"train_steps", train_steps},
          {"eval_every", eval_every},
          {"context_fraction", context_fraction},
          {"n_z", n_z},
          {"n_x", n_x},
          {"group_random", group_random},
          {"plateau_stop", plateau_stop},
          {"plateau_tol", plateau_tol},
          {"max_batch", max_batch},
          {"seed", seed},
          {"sim_seed", sim_seed},
          {"features", np::to_string(features)},
          {"architecture", arch.to_json()},
          {"adam", {{"lr", adam.lr}, {"beta1", adam.beta1}, {"beta2", adam.beta2}, {"eps", adam.eps}}}};
}

LoopConfig LoopConfig::from_json(const nlohmann::json& j) {
  LoopConfig c;
  try {
    c.acquisition = acq::acquisition_from_string(j.at("acquisition").get<std::string>());
    c.batch = j.at("batch").get<std::size_t>();
    c.samples = j.at("samples").get<std::size_t>();
    c.max_rounds = j.at("max_rounds").get<std::size_t>();
    c.patience = j.at("patience").get<std::size_t>();
    c.train_steps = j.at("train_steps").get<std::size_t>();
    c.eval_every = j.at("eval_every").get<std::size_t>();
    c.context_fraction = j.at("context_fraction").get<double>();
    c.n_z = j.at("n_z").get<std::size_t>();
    c.n_x = j.at("n_x").get<std::size_t>();
    c.group_random = j.at("group_random").get<std::size_t>();
    c.plateau_stop = j.at("plateau_stop").get<bool>();
    c.plateau_tol = j.at("plateau_tol").get<double>();
    c.max_batch = j.at("max_batch").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.sim_seed = j.at("sim_seed").get<std::uint64_t>();
    c.features = np::feature_kind_from_string(j.at("features").get<std::string>());
    c.arch = np::NpArchitecture::from_json(j.at("architecture"));
    const auto& a = j.at("adam");
    c.adam = {a.at("lr").get<double>(), a.at("beta1").get<double>(), a.at("beta2").get<double>(),
              a.at("eps").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("loop config: ") + e.what());
  }
  c.validate();
  return c;
}

LoopConfig seir_loop_config(std::size_t horizon) {
  LoopConfig c;
  c.features = np::FeatureKind::infectious;
  c.arch = np::default_architecture(c.features, horizon);
  return c;
}

std::unique_ptr<np::Surrogate> default_surrogate(const LoopConfig& config) {
  np::NpArchitecture arch = config.arch;
  arch.init_seed = stream_seed(config.seed, "init");
  return std::make_unique<np::Surrogate>(arch, config.adam);
}

std::string config_hash(const LoopConfig& config, const SimDataset& data) {
  nlohmann::json design = nlohmann::json::array();
  for (Role r : {Role::candidate, Role::acquired, Role::validation, Role::test})
    for (int id : data.ids(r)) {
      auto j = epi::scenario_to_json(data.scenario(id));
      j["split"] = r == Role::acquired ? "candidate" : to_string(r);
      design.push_back(std::move(j));
    }
  std::sort(design.begin(), design.end(),
            [](const auto& a, const auto& b) { return a.at("id").template get<int>() < b.at("id").template get<int>(); });
  const nlohmann::json doc = {{"config", config.to_json()}, {"design", design}};
  return files::sha256_hex(doc.dump());
}

double test_mae(const np::Surrogate& s, const SimDataset& data, const np::NormalizedBatch& context,
                const LoopConfig& config, int round) {
  const auto prior = np::context_posterior(s, context);
  std::vector<double> pred, truth;
  for (int id : data.ids(Role::test)) {
    const auto theta = s.normalize_theta(np::theta_features(data.scenario(id), config.features)).to_vector();
    Rng rng(stream_seed(config.seed, "mae", {static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(id)}));
    const auto p = np::predict(s, prior, theta, config.n_z, rng);
    const auto denorm = s.x_norm().denormalize(p.decoded_mean);
    const auto t = seed_mean(data, id, config.features);
    pred.insert(pred.end(), denorm.begin(), denorm.end());
    truth.insert(truth.end(), t.begin(), t.end());
  }
  if (truth.empty()) throw ValidationError("test mae: no test scenarios");
  return mae(pred, truth);
}

std::vector<acq::AcquisitionScore> score_candidates(const np::Surrogate& s, const SimDataset& data,
                                                    std::span<const int> ids, const np::NormalizedBatch& context,
                                                    const LoopConfig& config, int round) {
  const acq::SurrogateQuery query(s, context);
  std::vector<acq::AcquisitionScore> out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (data.role(id) != Role::candidate)
      throw ValidationError("score: scenario " + std::to_string(id) + " is not a candidate");
    const auto theta = s.normalize_theta(np::theta_features(data.scenario(id), config.features)).to_vector();
    Rng rng(stream_seed(config.seed, "score", {static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(id)}));
    acq::AcquisitionScore sc;
    switch (config.acquisition) {
      case acq::Acquisition::lig:
        sc = acq::latent_information_gain(query, theta, config.n_x, rng);
        break;
      case acq::Acquisition::meanstd: {
        const auto draws = acq::sample_predictive(query, theta, config.n_z, rng);
        sc.score = acq::mean_std(draws, query.x_width());
        sc.n_samples = config.n_z;
        break;
      }
      case acq::Acquisition::maxent: {
        const auto draws = acq::sample_predictive(query, theta, config.n_z, rng);
        sc.score = acq::max_entropy(draws, query.x_width());
        sc.n_samples = config.n_z;
        break;
      }
      case acq::Acquisition::random:
        sc.score = acq::random_score(config.seed, static_cast<std::uint64_t>(round), id);
        sc.n_samples = 1;
        break;
    }
    sc.scenario_id = id;
    sc.acquisition = acq::to_string(config.acquisition);
    out.push_back(sc);
  }
  return out;
}

std::vector<int> select_top(std::span<const acq::AcquisitionScore> scores, std::size_t b) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
    if (scores[a].score != scores[c].score) return scores[a].score > scores[c].score;
    return scores[a].scenario_id < scores[c].scenario_id;
  });
  std::vector<int> out;
  for (std::size_t i = 0; i < std::min(b, order.size()); ++i) out.push_back(scores[order[i]].scenario_id);
  return out;
}

namespace {

struct Selection {
  std::vector<int> ids;
  std::vector<double> scores;
  std::vector<acq::AcquisitionScore> all;
};

Selection select_grouped(const np::Surrogate& s, const SimDataset& data, std::vector<int> cand,
                         const np::NormalizedBatch& context, const LoopConfig& c, int round) {
  const acq::SurrogateQuery query(s, context);
  Rng rng(stream_seed(c.seed, "groups", {static_cast<std::uint64_t>(round)}));
  std::shuffle(cand.begin(), cand.end(), rng);
  const std::size_t b = std::min(c.batch, cand.size());
  const std::size_t groups = std::max<std::size_t>(1, std::min(c.group_random, cand.size() / b));
  Selection sel;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<int> members(cand.begin() + static_cast<std::ptrdiff_t>(g * b),
                             cand.begin() + static_cast<std::ptrdiff_t>((g + 1) * b));
    std::sort(members.begin(), members.end());
    std::vector<double> thetas;
    for (int id : members) {
      const auto t = s.normalize_theta(np::theta_features(data.scenario(id), c.features)).to_vector();
      thetas.insert(thetas.end(), t.begin(), t.end());
    }
    Rng grng(stream_seed(c.seed, "group-score", {static_cast<std::uint64_t>(round), g}));
    auto sc = acq::group_latent_information_gain(query, thetas, members.size(), c.n_x, grng);
    for (int id : members) {
      auto row = sc;
      row.scenario_id = id;
      row.acquisition = "lig-group";
      sel.all.push_back(row);
    }
    if (sc.score > best) {
      best = sc.score;
      sel.ids = members;
    }
  }
  sel.scores.assign(sel.ids.size(), best);
  return sel;
}

}  // namespace

RunReport run_active_loop(SimDataset& data, const LoopConfig& config, const Simulator& sim,
                          const SurrogateFactory& factory, const fs::path& out_dir, const LoopHooks& hooks) {
  config.validate();
  const std::string hash = config_hash(config, data);
  const bool persist = !out_dir.empty();
  const fs::path ckpt = out_dir / "checkpoint.json";
  const fs::path metrics_csv = out_dir / "metrics.csv";
  const fs::path choices_csv = out_dir / "choices.csv";
  const fs::path scores_csv = out_dir / "scores.csv";

  RunReport report;
  LoopState st;
  if (persist && fs::exists(ckpt)) {
    st = resume_round(ckpt, hash);
    report.resumed = true;
    if (st.finished) {
      data = std::move(st.data);
      report.metrics = st.metrics;
      report.history = data.history();
      report.stop_reason = st.stop_reason;
      report.already_complete = true;
      return report;
    }
    for (const auto& p : {metrics_csv, choices_csv, scores_csv}) truncate_csv(p, st.round);
  } else {
    if (!data.ids(Role::acquired).empty() || !data.history().empty())
      throw ValidationError("loop: dataset already has acquisitions; start from a fresh scenario table");
    st.data = data;
    st.data.seed_initial(corner_initial_ids(st.data));
    st.surrogate = factory(config);
    if (!st.surrogate) throw ValidationError("loop: factory returned no surrogate");
  }
  if (persist) {
    ensure_header(metrics_csv, "round,pct_data,test_mae,val_loss");
    ensure_header(choices_csv, "round,scenario_id,beta,epsilon,score");
    ensure_header(scores_csv, "round,scenario_id,acquisition,score,stderr,n_samples");
  }
  SimDataset& d = st.data;
  np::Surrogate& s = *st.surrogate;
  simulate_roles(d, config, sim, {Role::acquired, Role::validation, Role::test});
  const np::SampleSet val_set = sample_set(d, d.ids(Role::validation), config.features);
  const double pool_samples = static_cast<double>(d.pool_size() * config.samples);

  auto finish_round = [&](int round, const std::vector<acq::AcquisitionScore>& scores) {
    const auto acquired = d.ids(Role::acquired);
    const auto train_set = sample_set(d, acquired, config.features);
    s.fit_normalizers(train_set);
    const auto tr = np::train(s, train_set, val_set.size() ? &val_set : nullptr, train_options(config, round));
    const auto all = s.normalize(train_set);
    RoundMetrics m;
    m.round = round;
    m.acquired = acquired.size();
    m.pct_data = 100.0 * static_cast<double>(train_set.size()) / pool_samples;
    m.test_mae = test_mae(s, d, round_context(all, config, round), config, round);
    m.val_loss = tr.best_validation;
    m.steps = static_cast<std::size_t>(s.steps());
    st.metrics.push_back(m);
    st.round = round;

    if (round > 0 && config.plateau_stop && !(m.val_loss < st.best_val - config.plateau_tol)) {
      st.finished = true;
      st.stop_reason = "validation plateau";
    }
    if (std::isfinite(m.val_loss)) st.best_val = std::min(st.best_val, m.val_loss);
    if (!st.finished && round >= static_cast<int>(config.max_rounds)) {
      st.finished = true;
      st.stop_reason = "max rounds";
    }
    if (!st.finished && d.ids(Role::candidate).empty()) {
      st.finished = true;
      st.stop_reason = "candidate pool exhausted";
    }
    if (persist) {
      files::append_text(metrics_csv, std::to_string(m.round) + "," + num(m.pct_data) + "," + num(m.test_mae) + "," +
                                          num(m.val_loss) + "\n");
      if (round > 0) {
        const auto& h = d.history().back();
        std::string rows;
        for (std::size_t i = 0; i < h.ids.size(); ++i) {
          const auto& sc = d.scenario(h.ids[i]);
          rows += std::to_string(round) + "," + std::to_string(h.ids[i]) + "," + num(sc.beta) + "," +
                  num(sc.epsilon) + "," + num(h.scores[i]) + "\n";
        }
        files::append_text(choices_csv, rows);
        std::ostringstream os;
        acq::write_scores_csv(os, round, scores);
        files::append_text(scores_csv, os.str());
      }
      checkpoint_round(ckpt, st, hash);
    }
  };

  if (st.round < 0) finish_round(0, {});
  while (!st.finished) {
    if (hooks.interrupt_after && st.round >= *hooks.interrupt_after) break;
    const int round = st.round + 1;
    const auto cand = d.ids(Role::candidate);
    const auto context =
        round_context(s.normalize(sample_set(d, d.ids(Role::acquired), config.features)), config, round);
    Selection sel;
    if (config.group_random > 0) {
      sel = select_grouped(s, d, cand, context, config, round);
    } else {
      sel.all = score_candidates(s, d, cand, context, config, round);
      sel.ids = select_top(sel.all, config.batch);
      for (int id : sel.ids)
        for (const auto& sc : sel.all)
          if (sc.scenario_id == id) sel.scores.push_back(sc.score);
    }
    for (int id : sel.ids) d.simulate(id, config.samples, sim, config.sim_seed);
    d.acquire(round, sel.ids, sel.scores);
    finish_round(round, sel.all);
  }

  report.metrics = st.metrics;
  report.history = d.history();
  report.stop_reason = st.finished ? st.stop_reason : "interrupted";
  data = std::move(d);
  return report;
}

OfflineResult train_offline(SimDataset& data, const LoopConfig& config, const Simulator& sim,
                            const SurrogateFactory& factory, std::size_t steps, std::unique_ptr<np::Surrogate>* out) {
  config.validate();
  for (Role r : {Role::candidate, Role::acquired, Role::validation, Role::test})
    for (int id : data.ids(r)) data.simulate(id, config.samples, sim, config.sim_seed);
  std::vector<int> pool = data.ids(Role::candidate);
  for (int id : data.ids(Role::acquired)) pool.push_back(id);
  std::sort(pool.begin(), pool.end());
  const auto train_set = sample_set(data, pool, config.features);
  const auto val_set = sample_set(data, data.ids(Role::validation), config.features);

  auto s = factory(config);
  s->fit_normalizers(train_set);
  const auto all = s->normalize(train_set);
  OfflineResult r;
  const auto context = round_context(all, config, 0);
  r.untrained_mae = test_mae(*s, data, context, config, 0);
  auto opt = train_options(config, 0);
  opt.steps = steps;
  opt.stream_key = fnv1a("offline");
  r.train = np::train(*s, train_set, val_set.size() ? &val_set : nullptr, opt);
  r.test_mae = steps == 0 ? r.untrained_mae : test_mae(*s, data, context, config, 0);
  if (out) *out = std::move(s);
  return r;
}

}  // namespace inp::al
