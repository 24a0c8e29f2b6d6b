#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <set>
#include <stdexcept>

#include "inp/al/checkpoint.hpp"
#include "inp/al/loop.hpp"
#include "inp/core/errors.hpp"
#include "inp/core/files.hpp"
#include "inp/epi/grid.hpp"

using namespace inp;
using namespace inp::al;
namespace fs = std::filesystem;

namespace {

SimDataset small_design() {
  epi::GridSpec g;
  g.beta = {1.1, 2.0, 0.3};
  g.epsilon = {0.25, 0.65, 0.2};
  g.base.horizon = 20;
  return SimDataset::from_design(epi::grid_design(g, 2, 1));
}

LoopConfig small_config(acq::Acquisition a = acq::Acquisition::random) {
  LoopConfig c = seir_loop_config(20);
  c.acquisition = a;
  c.samples = 3;
  c.max_rounds = 4;
  c.train_steps = 20;
  c.eval_every = 5;
  c.patience = 20;
  c.n_z = 4;
  c.n_x = 4;
  c.plateau_stop = false;
  c.seed = 11;
  c.arch.latent_dim = 4;
  c.arch.encoder_widths = {16, 16};
  c.arch.decoder_widths = {16, 16};
  return c;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() /
                     ("inp_al_" + name + "_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  fs::remove_all(p);
  return p;
}

RunReport run(const LoopConfig& c, const fs::path& dir = {}, LoopHooks hooks = {}) {
  SimDataset d = small_design();
  return run_active_loop(d, c, epi::simulate_seir, default_surrogate, dir, hooks);
}

}  // namespace

TEST_CASE("mae examples") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  CHECK(mae(a, a) == 0.0);
  const std::vector<double> shifted{3.5, 4.5, 5.5};
  CHECK(mae(shifted, a) == doctest::Approx(2.5).epsilon(1e-15));
  const std::vector<double> pred{3.0, 2.0}, truth{1.0, 2.0};
  CHECK(mae(pred, truth) == 1.0);
  CHECK_THROWS_AS(mae(pred, a), ValidationError);
}

TEST_CASE("default design: roles are disjoint and the initial pair is the beta corners at median epsilon") {
  const SimDataset d = SimDataset::from_design(epi::default_seir_design());
  CHECK(d.ids(Role::candidate).size() == 270);
  CHECK(d.ids(Role::validation).size() == 15);
  CHECK(d.ids(Role::test).size() == 15);
  CHECK(d.pool_size() == 270);
  std::set<int> all;
  for (Role r : {Role::candidate, Role::validation, Role::test})
    for (int id : d.ids(r)) CHECK(all.insert(id).second);
  const auto init = corner_initial_ids(d);
  REQUIRE(init.size() == 2);
  CHECK(d.scenario(init[0]).beta == doctest::Approx(1.1));
  CHECK(d.scenario(init[1]).beta == doctest::Approx(4.0));
  CHECK(d.scenario(init[0]).epsilon == doctest::Approx(0.45));
  CHECK(d.scenario(init[1]).epsilon == doctest::Approx(0.45));
}

TEST_CASE("acquire enforces roles and contiguous rounds") {
  SimDataset d = small_design();
  const auto cand = d.ids(Role::candidate);
  const int val = d.ids(Role::validation).front();
  const int test = d.ids(Role::test).front();
  d.seed_initial(std::vector<int>{cand[0], cand[1]});
  const std::vector<double> one{0.5};
  CHECK_THROWS_AS(d.acquire(1, std::vector<int>{val}, one), ValidationError);
  CHECK_THROWS_AS(d.acquire(1, std::vector<int>{test}, one), ValidationError);
  CHECK_THROWS_AS(d.acquire(1, std::vector<int>{cand[0]}, one), ValidationError);
  CHECK_THROWS_AS(d.acquire(2, std::vector<int>{cand[2]}, one), ValidationError);
  CHECK_THROWS_AS(d.acquire(1, std::vector<int>{cand[2], cand[2]}, std::vector<double>{1, 1}), ValidationError);
  d.acquire(1, std::vector<int>{cand[2]}, one);
  CHECK(d.role(cand[2]) == Role::acquired);
  CHECK_THROWS_AS(d.acquire(1, std::vector<int>{cand[3]}, one), ValidationError);
  d.acquire(2, std::vector<int>{cand[3]}, one);
  CHECK(d.history().size() == 2);

  const SimDataset back = SimDataset::from_json(d.to_json());
  CHECK(back.to_json() == d.to_json());
  CHECK(back.ids(Role::acquired) == d.ids(Role::acquired));
}

TEST_CASE("samples come from the keyed seeds") {
  SimDataset d = small_design();
  const int id = d.ids(Role::candidate)[3];
  d.simulate(id, 3, epi::simulate_seir, 5);
  REQUIRE(d.samples(id).size() == 3);
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(d.samples(id)[k] == epi::simulate_seir(d.scenario(id), sample_seed(5, id, k)));
}

TEST_CASE("select_top breaks ties by id") {
  std::vector<acq::AcquisitionScore> s(4);
  const int ids[] = {9, 3, 5, 1};
  const double sc[] = {0.5, 0.9, 0.9, 0.1};
  for (int i = 0; i < 4; ++i) {
    s[i].scenario_id = ids[i];
    s[i].score = sc[i];
  }
  CHECK(select_top(s, 2) == std::vector<int>{3, 5});
  CHECK(select_top(s, 10) == std::vector<int>{3, 5, 9, 1});
}

TEST_CASE("acquired set grows by b per round and never rescored") {
  for (auto a : {acq::Acquisition::lig, acq::Acquisition::meanstd, acq::Acquisition::maxent,
                 acq::Acquisition::random}) {
    LoopConfig c = small_config(a);
    c.batch = 2;
    const fs::path dir = fresh_dir("grow");
    const auto rep = run(c, dir);
    CAPTURE(acq::to_string(a));
    REQUIRE(rep.metrics.size() == 5);
    for (const auto& m : rep.metrics) CHECK(m.acquired == 2 + 2 * static_cast<std::size_t>(m.round));
    CHECK(rep.metrics.back().pct_data == doctest::Approx(100.0 * 10 / 12));
    std::set<int> acquired;
    for (const auto& h : rep.history)
      for (int id : h.ids) CHECK(acquired.insert(id).second);

    // every scored row in round r is a scenario still unacquired before r
    std::set<int> before = {};
    SimDataset d0 = small_design();
    for (int id : corner_initial_ids(d0)) before.insert(id);
    const std::string csv = files::read_text(dir / "scores.csv");
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    int last_round = 1;
    while (std::getline(in, line)) {
      const int r = std::stoi(line.substr(0, line.find(',')));
      const int id = std::stoi(line.substr(line.find(',') + 1));
      if (r != last_round) {
        for (int x : rep.history[last_round - 1].ids) before.insert(x);
        last_round = r;
      }
      CHECK(before.count(id) == 0);
      CHECK(d0.role(id) == Role::candidate);
    }
    fs::remove_all(dir);
  }
}

TEST_CASE("random acquisition is reproducible") {
  const auto a = run(small_config());
  const auto b = run(small_config());
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) CHECK(a.history[i].ids == b.history[i].ids);
  for (std::size_t i = 0; i < a.metrics.size(); ++i) CHECK(a.metrics[i].test_mae == b.metrics[i].test_mae);
}

TEST_CASE("batch equal to the pool acquires everything in one round") {
  LoopConfig c = small_config();
  c.batch = 100;
  const auto rep = run(c);
  REQUIRE(rep.metrics.size() == 2);
  CHECK(rep.metrics.back().acquired == 12);
  CHECK(rep.metrics.back().pct_data == doctest::Approx(100.0));
  CHECK(rep.stop_reason == "candidate pool exhausted");
}

TEST_CASE("plateau stop ends the run when validation does not improve") {
  LoopConfig c = small_config();
  c.plateau_stop = true;
  c.plateau_tol = 1e9;
  const auto rep = run(c);
  CHECK(rep.metrics.size() == 2);
  CHECK(rep.stop_reason == "validation plateau");
}

TEST_CASE("grouped lig picks one random group of b") {
  LoopConfig c = small_config(acq::Acquisition::lig);
  c.batch = 2;
  c.group_random = 3;
  c.max_rounds = 2;
  const auto rep = run(c);
  REQUIRE(rep.history.size() == 2);
  for (const auto& h : rep.history) CHECK(h.ids.size() == 2);
  c.acquisition = acq::Acquisition::meanstd;
  CHECK_THROWS_AS(run(c), ValidationError);
}

TEST_CASE("resume after interruption equals an uninterrupted run") {
  const LoopConfig c = small_config(acq::Acquisition::lig);
  const fs::path full = fresh_dir("full"), part = fresh_dir("part");
  const auto ref = run(c, full);
  const auto first = run(c, part, LoopHooks{2});
  CHECK(first.stop_reason == "interrupted");
  CHECK(first.metrics.size() == 3);
  const auto rest = run(c, part);
  CHECK(rest.resumed);
  REQUIRE(rest.history.size() == ref.history.size());
  for (std::size_t i = 0; i < ref.history.size(); ++i) CHECK(rest.history[i].ids == ref.history[i].ids);
  for (const char* f : {"metrics.csv", "choices.csv", "scores.csv"})
    CHECK(files::read_text(full / f) == files::read_text(part / f));

  // completed: rerun is a no-op
  const std::string before = files::read_text(full / "metrics.csv");
  const auto ck = files::read_text(full / "checkpoint.json");
  const auto again = run(c, full);
  CHECK(again.already_complete);
  CHECK(files::read_text(full / "metrics.csv") == before);
  CHECK(files::read_text(full / "checkpoint.json") == ck);
  fs::remove_all(full);
  fs::remove_all(part);
}

TEST_CASE("simulator failure leaves the last checkpoint usable") {
  const LoopConfig c = small_config();
  const fs::path ref_dir = fresh_dir("simref"), dir = fresh_dir("simfail");
  const auto ref = run(c, ref_dir);
  int calls = 0;
  // initial 2 + validation + test scenarios, then two acquisitions
  const int budget = (2 + 1 + 1 + 2) * 3;
  const Simulator flaky = [&](const epi::Scenario& s, std::uint64_t seed) {
    if (++calls > budget) throw std::runtime_error("simulator crashed");
    return epi::simulate_seir(s, seed);
  };
  SimDataset d = small_design();
  CHECK_THROWS_AS(run_active_loop(d, c, flaky, default_surrogate, dir), std::runtime_error);
  const auto state = resume_round(dir / "checkpoint.json", config_hash(c, small_design()));
  CHECK(state.round == 2);
  const auto rest = run(c, dir);
  REQUIRE(rest.history.size() == ref.history.size());
  for (std::size_t i = 0; i < ref.history.size(); ++i) CHECK(rest.history[i].ids == ref.history[i].ids);
  CHECK(files::read_text(dir / "metrics.csv") == files::read_text(ref_dir / "metrics.csv"));
  fs::remove_all(ref_dir);
  fs::remove_all(dir);
}

TEST_CASE("checkpoint load errors") {
  const LoopConfig c = small_config();
  const fs::path dir = fresh_dir("ckerr");
  run(c, dir, LoopHooks{1});
  const fs::path ck = dir / "checkpoint.json";
  const std::string hash = config_hash(c, small_design());
  CHECK_NOTHROW(resume_round(ck, hash));

  LoopConfig other = c;
  other.acquisition = acq::Acquisition::lig;
  CHECK_THROWS_AS(run(other, dir), ValidationError);

  const std::string good = files::read_text(ck);
  auto doc = nlohmann::json::parse(good);
  doc["payload"]["round"] = 7;
  files::write_text_atomic(ck, doc.dump());
  CHECK_THROWS_WITH_AS(resume_round(ck, hash), doctest::Contains("integrity"), IoError);

  files::write_text_atomic(ck, good.substr(0, good.size() / 2));
  CHECK_THROWS_WITH_AS(resume_round(ck, hash), doctest::Contains("integrity"), IoError);

  doc = nlohmann::json::parse(good);
  doc["version"] = kCheckpointVersion + 1;
  files::write_text_atomic(ck, doc.dump());
  CHECK_THROWS_WITH_AS(resume_round(ck, hash), doctest::Contains("version"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("loop config round trip and validation") {
  LoopConfig c = small_config(acq::Acquisition::maxent);
  c.group_random = 0;
  const auto back = LoopConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  LoopConfig bad = c;
  bad.batch = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.samples = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = c;
  bad.patience = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK(config_hash(c, small_design()) != config_hash(small_config(), small_design()));
}

TEST_CASE("offline with zero steps reports the untrained baseline") {
  SimDataset d = small_design();
  const auto r = train_offline(d, small_config(), epi::simulate_seir, default_surrogate, 0);
  CHECK(r.test_mae == r.untrained_mae);
  CHECK(r.train.steps_run == 0);
}

TEST_CASE("seir offline reference beats the two-scenario round-0 model") {
  for (std::uint64_t seed : {1, 2, 3}) {
    LoopConfig c = seir_loop_config();
    c.seed = seed;
    c.max_rounds = 0;
    c.max_batch = 330;
    SimDataset d = SimDataset::from_design(epi::default_seir_design());
    const auto round0 = run_active_loop(d, c, epi::simulate_seir, default_surrogate);
    SimDataset full = SimDataset::from_design(epi::default_seir_design());
    const auto off = train_offline(full, c, epi::simulate_seir, default_surrogate, 2000);
    CAPTURE(seed);
    CHECK(off.test_mae < round0.metrics.front().test_mae);
  }
}
