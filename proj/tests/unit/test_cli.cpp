#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "inp/core/files.hpp"

namespace fs = std::filesystem;
using inp::files::read_text;

namespace {

const char* cli() {
  const char* p = std::getenv("INP_CLI");
  REQUIRE_MESSAGE(p != nullptr, "INP_CLI must point at the inp binary");
  return p;
}

struct Sandbox {
  fs::path root;
  Sandbox() {
    root = fs::temp_directory_path() /
           ("inp_cli_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(root);
  }
  ~Sandbox() { fs::remove_all(root); }

  /// Runs the binary from the sandbox with INP_OUTPUT_ROOT=<sandbox>/out.
  int run(const std::string& args) const {
    const std::string cmd = "cd '" + root.string() + "' && INP_OUTPUT_ROOT='" + (root / "out").string() + "' '" +
                            cli() + "' " + args + " > '" + (root / "log.txt").string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string log() const { return read_text(root / "log.txt"); }
  fs::path out(const std::string& rel) const { return root / "out" / rel; }
};

const std::string kSmallGrid =
    " --beta 1.1:2.0:0.3 --epsilon 0.25:0.65:0.2 --holdout-beta 2 --holdout-eps 1 --horizon 20 --samples 3";
const std::string kSmallActive = " --samples 3 --rounds 3 --steps 20 --n-z 4 --n-x 4 --no-plateau";

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("simulate defaults: 270 + 15 + 15 scenarios, 30 samples, reproducible") {
  Sandbox sb;
  REQUIRE(sb.run("simulate --out data/seir.jsonl") == 0);
  const auto m = nlohmann::json::parse(read_text(sb.out("data/seir.manifest.json")));
  std::size_t cand = 0, val = 0, test = 0;
  for (const auto& s : m["scenarios"]) {
    const auto split = s["split"].get<std::string>();
    cand += split == "candidate";
    val += split == "validation";
    test += split == "test";
  }
  CHECK(cand == 270);
  CHECK(val == 15);
  CHECK(test == 15);
  CHECK(count_lines(sb.out("data/seir.jsonl")) == 300 * 30);
  const std::string first = inp::files::file_sha256(sb.out("data/seir.jsonl"));
  CHECK(m["files"]["seir.jsonl"] == first);

  CHECK(sb.run("simulate --out data/seir.jsonl") == 2);
  CHECK(sb.log().find("--force") != std::string::npos);
  REQUIRE(sb.run("simulate --out data/seir.jsonl --force") == 0);
  CHECK(inp::files::file_sha256(sb.out("data/seir.jsonl")) == first);

  REQUIRE(sb.run("simulate --samples 1 --out data/one.jsonl") == 0);
  CHECK(count_lines(sb.out("data/one.jsonl")) == 300);
}

TEST_CASE("train-offline: zero steps, manifest checks, idempotence") {
  Sandbox sb;
  REQUIRE(sb.run("simulate" + kSmallGrid + " --out d/s.jsonl") == 0);
  REQUIRE(sb.run("train-offline --data d/s.jsonl --steps 0 --out off0") == 0);
  const auto m0 = nlohmann::json::parse(read_text(sb.out("off0/metrics.json")));
  CHECK(m0["test_mae"] == m0["untrained_test_mae"]);
  CHECK(m0["steps_run"] == 0);

  REQUIRE(sb.run("train-offline --data d/s.jsonl --steps 30 --latent-dim 4 --out off") == 0);
  const auto model = read_text(sb.out("off/model.json"));
  CHECK(sb.run("train-offline --data d/s.jsonl --steps 30 --latent-dim 4 --out off") == 2);
  REQUIRE(sb.run("train-offline --data d/s.jsonl --steps 30 --latent-dim 4 --out off --force") == 0);
  CHECK(read_text(sb.out("off/model.json")) == model);
  const auto man = nlohmann::json::parse(read_text(sb.out("off/manifest.json")));
  CHECK(man["files"]["model.json"] == inp::files::sha256_hex(model));

  REQUIRE(sb.run("score --model off/model.json --data d/s.jsonl --acq lig --n-x 4 --out sc.csv") == 0);
  const auto csv = read_text(sb.out("sc.csv"));
  CHECK(csv.rfind("round,scenario_id,acquisition,score,stderr,n_samples\n", 0) == 0);
  CHECK(count_lines(sb.out("sc.csv")) == 13);

  inp::files::append_text(sb.out("d/s.jsonl"), "\n");
  CHECK(sb.run("train-offline --data d/s.jsonl --steps 0 --out off1") == 4);
  CHECK(sb.log().find("manifest mismatch") != std::string::npos);
}

TEST_CASE("active: outputs, resume after interruption, rerun no-op, config mismatch") {
  Sandbox sb;
  REQUIRE(sb.run("simulate" + kSmallGrid + " --out d/s.jsonl") == 0);
  REQUIRE(sb.run("active --data d/s.jsonl --acq lig --seed 3" + kSmallActive + " --out full") == 0);
  CHECK(read_text(sb.out("full/metrics.csv")).rfind("round,pct_data,test_mae,val_loss\n", 0) == 0);
  CHECK(count_lines(sb.out("full/metrics.csv")) == 5);
  CHECK(count_lines(sb.out("full/choices.csv")) == 4);

  REQUIRE(sb.run("active --data d/s.jsonl --acq lig --seed 3" + kSmallActive + " --out part --stop-after-round 1") == 0);
  CHECK(count_lines(sb.out("part/metrics.csv")) == 3);
  REQUIRE(sb.run("active --data d/s.jsonl --acq lig --seed 3" + kSmallActive + " --out part") == 0);
  for (const char* f : {"metrics.csv", "choices.csv", "scores.csv", "checkpoint.json"})
    CHECK(read_text(sb.out(std::string("part/") + f)) == read_text(sb.out(std::string("full/") + f)));

  const auto before = read_text(sb.out("full/manifest.json"));
  REQUIRE(sb.run("active --data d/s.jsonl --acq lig --seed 3" + kSmallActive + " --out full") == 0);
  CHECK(sb.log().find("already complete") != std::string::npos);
  CHECK(read_text(sb.out("full/manifest.json")) == before);

  CHECK(sb.run("active --data d/s.jsonl --acq random --seed 3" + kSmallActive + " --out full") == 2);
  CHECK(sb.log().find("config hash") != std::string::npos);

  inp::files::write_text_atomic(sb.out("part/checkpoint.json"), "{\"version\": 1");
  CHECK(sb.run("active --data d/s.jsonl --acq lig --seed 3" + kSmallActive + " --out part") == 4);
  CHECK(sb.log().find("integrity") != std::string::npos);
}

TEST_CASE("active driver mode and grouped batches") {
  Sandbox sb;
  REQUIRE(sb.run("simulate" + kSmallGrid + " --out d/s.jsonl") == 0);
  REQUIRE(sb.run("active --data d/s.jsonl --acq all --seeds 1,2,3 --samples 3 --rounds 1 --steps 10 --n-z 4 "
                 "--n-x 4 --no-plateau --out drv") == 0);
  std::size_t subdirs = 0;
  for (const auto& e : fs::directory_iterator(sb.out("drv"))) subdirs += e.is_directory();
  CHECK(subdirs == 12);
  CHECK(fs::exists(sb.out("drv/maxent-seed2/metrics.csv")));
  CHECK(count_lines(sb.out("drv/summary.csv")) == 1 + 12 * 2);

  REQUIRE(sb.run("active --data d/s.jsonl --acq lig --group-random 4 --batch 2" + kSmallActive + " --out grp") == 0);
  CHECK(count_lines(sb.out("grp/choices.csv")) == 1 + 3 * 2);
  CHECK(sb.run("active --data d/s.jsonl --acq meanstd --group-random 4" + kSmallActive + " --out grp2") == 2);
}

TEST_CASE("theory output schema and replicate count") {
  Sandbox sb;
  REQUIRE(sb.run("theory --dims 2,4 --rounds-per-dim 5 --reps 1 --out th") == 0);
  const auto csv = read_text(sb.out("th/theory.csv"));
  CHECK(csv.rfind("policy,d,k,replicate,error\n", 0) == 0);
  CHECK(count_lines(sb.out("th/theory.csv")) == 1 + 2 * 2);
  CHECK(fs::exists(sb.out("th/summary.json")));
  CHECK(fs::exists(sb.out("th/config.json")));
}

TEST_CASE("exit codes and locking") {
  Sandbox sb;
  CHECK(sb.run("") == 2);
  CHECK(sb.run("bogus") == 2);
  CHECK(sb.run("active --acq nope") == 2);
  CHECK(sb.run("simulate --beta 1:x:2 --out d/x.jsonl") == 2);
  CHECK(sb.run("train-offline --data missing.jsonl") == 4);
  fs::create_directories(sb.out("locked"));
  std::ofstream(sb.out("locked/.lock")) << "1\n";
  CHECK(sb.run("theory --dims 2 --reps 1 --out locked") == 4);
  CHECK(sb.log().find("locked") != std::string::npos);
}

TEST_CASE("config file supplies defaults that flags override") {
  Sandbox sb;
  std::ofstream(sb.root / "cfg.toml") << "[theory]\ndims = [2, 3]\nreps = 1\nrounds-per-dim = 3\n";
  REQUIRE(sb.run("--config cfg.toml theory --out th") == 0);
  CHECK(count_lines(sb.out("th/theory.csv")) == 1 + 2 * 2);
  REQUIRE(sb.run("--config cfg.toml theory --reps 2 --out th2") == 0);
  CHECK(count_lines(sb.out("th2/theory.csv")) == 1 + 2 * 2 * 2);
}
