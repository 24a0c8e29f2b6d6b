#include "inp/cli/app.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "inp/acq/scores.hpp"
#include "inp/al/checkpoint.hpp"
#include "inp/al/loop.hpp"
#include "inp/cli/dataset_store.hpp"
#include "inp/core/errors.hpp"
#include "inp/core/files.hpp"
#include "inp/np/training.hpp"
#include "inp/theory/linear_bandit.hpp"

namespace inp::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kOutputRootEnv = "INP_OUTPUT_ROOT";

fs::path resolve_out(const std::string& out, const std::string& fallback) {
  fs::path p = out.empty() ? fs::path(fallback) : fs::path(out);
  if (p.is_relative())
    if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') p = fs::path(root) / p;
  return p;
}

/// Inputs: as given if that exists, else under the output root.
fs::path resolve_in(const std::string& path) {
  const fs::path p(path);
  if (fs::exists(p) || p.is_absolute()) return p;
  return resolve_out(path, path);
}

epi::Range parse_range(const std::string& text) {
  std::istringstream in(text);
  epi::Range r;
  char c1 = 0, c2 = 0;
  if (!(in >> r.start >> c1 >> r.stop >> c2 >> r.step) || c1 != ':' || c2 != ':' || !in.eof())
    throw ValidationError("range must look like start:stop:step, got " + text);
  r.values();
  return r;
}

/// Writes manifest.json listing the sha256 of every regular file in `dir`
/// except the lock, the manifest itself and subdirectories.
void write_run_manifest(const fs::path& dir, const std::string& command, const std::string& config_hash) {
  nlohmann::json files_json = nlohmann::json::object();
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());
  for (const auto& p : entries) {
    const auto name = p.filename().string();
    if (name == ".lock" || name == "manifest.json" || name.ends_with(".tmp")) continue;
    files_json[name] = files::file_sha256(p);
  }
  const nlohmann::json m = {{"version", kManifestVersion},
                            {"command", command},
                            {"config_hash", config_hash},
                            {"files", files_json}};
  files::write_text_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

void write_config(const fs::path& dir, const nlohmann::json& config) {
  files::write_text_atomic(dir / "config.json", config.dump(2) + "\n");
}

/// Refuses to overwrite a finished artifact directory unless forced; with
/// force, removes only the files this tool writes.
void prepare_dir(const fs::path& dir, bool force, std::initializer_list<const char*> artifacts) {
  bool present = false;
  for (const char* a : artifacts) present = present || fs::exists(dir / a);
  if (present && !force)
    throw ValidationError("output exists in " + dir.string() + "; pass --force to overwrite");
  if (present)
    for (const char* a : artifacts) fs::remove_all(dir / a);
  fs::create_directories(dir);
}

struct SimulateArgs {
  std::string model = "seir";
  std::string grid = "default";
  std::string beta, epsilon;
  std::size_t holdout_beta = 10, holdout_eps = 3;
  int horizon = 100;
  std::size_t samples = 30;
  std::uint64_t seed = 0;
  std::size_t nodes = 5;
  double self_weight = 0.8;
  std::string out;
  bool force = false;
};

int cmd_simulate(const SimulateArgs& a) {
  if (a.grid != "default") throw ValidationError("only --grid default is defined; adjust with --beta/--epsilon");
  DatasetSpec spec = a.model == "metapop" ? default_metapop_spec(a.nodes) : default_seir_spec();
  if (a.model != "seir" && a.model != "metapop") throw ValidationError("--model must be seir or metapop");
  if (!a.beta.empty()) spec.grid.beta = parse_range(a.beta);
  if (!a.epsilon.empty()) spec.grid.epsilon = parse_range(a.epsilon);
  spec.grid.base.horizon = a.horizon;
  spec.holdout_beta = a.holdout_beta;
  spec.holdout_eps = a.holdout_eps;
  spec.samples = a.samples;
  spec.seed = a.seed;
  spec.self_weight = a.self_weight;
  spec.validate();

  const fs::path out = resolve_out(a.out, "data/" + a.model + ".jsonl");
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  files::DirectoryLock lock(out.has_parent_path() ? out.parent_path() : fs::path("."));
  if ((fs::exists(out) || fs::exists(manifest_path(out))) && !a.force)
    throw ValidationError("output exists: " + out.string() + "; pass --force to overwrite");
  write_dataset(out, spec);
  const auto m = nlohmann::json::parse(files::read_text(manifest_path(out)));
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& s : m["scenarios"]) {
    const auto split = s["split"].get<std::string>();
    counts[split == "candidate" ? 0 : split == "validation" ? 1 : 2] += 1;
  }
  std::cout << "wrote " << out.string() << ": " << counts[0] << " candidate, " << counts[1] << " validation, "
            << counts[2] << " test scenarios x " << spec.samples << " samples\n";
  return kOk;
}

struct TrainArgs {
  std::string data;
  std::size_t steps = 2000;
  std::uint64_t seed = 1;
  std::size_t max_batch = 330;
  std::size_t patience = 50;
  double context_fraction = -1.0;
  std::size_t latent_dim = 32;
  std::string out;
  bool force = false;
};

al::LoopConfig config_for(const DatasetSpec& spec) {
  al::LoopConfig c;
  c.features = spec.features();
  c.arch = spec.architecture();
  c.samples = spec.samples;
  c.sim_seed = spec.seed;
  c.context_fraction = spec.model == "seir" ? 0.1 : 0.2;
  return c;
}

int cmd_train_offline(const TrainArgs& a) {
  auto ds = load_dataset(resolve_in(a.data));
  al::LoopConfig c = config_for(ds.spec);
  c.seed = a.seed;
  c.max_batch = a.max_batch;
  c.patience = a.patience;
  c.arch.latent_dim = a.latent_dim;
  if (a.context_fraction > 0) c.context_fraction = a.context_fraction;
  c.validate();

  const fs::path out = resolve_out(a.out, "runs/offline");
  fs::create_directories(out);
  files::DirectoryLock lock(out);
  prepare_dir(out, a.force, {"config.json", "model.json", "metrics.json", "manifest.json"});
  std::unique_ptr<np::Surrogate> model;
  const auto r = al::train_offline(ds.data, c, ds.spec.simulator(), al::default_surrogate, a.steps, &model);
  const nlohmann::json config = {{"command", "train-offline"},
                                 {"data", a.data},
                                 {"data_checksum", ds.manifest["files"]},
                                 {"steps", a.steps},
                                 {"loop", c.to_json()}};
  const auto hash = files::sha256_hex(config.dump());
  write_config(out, config);
  files::write_text_atomic(out / "model.json", model->to_json().dump() + "\n");
  const nlohmann::json metrics = {{"test_mae", r.test_mae},
                                  {"untrained_test_mae", r.untrained_mae},
                                  {"initial_loss", r.train.initial_loss},
                                  {"final_loss", r.train.final_loss},
                                  {"best_validation", std::isfinite(r.train.best_validation)
                                                          ? nlohmann::json(r.train.best_validation)
                                                          : nlohmann::json()},
                                  {"best_step", r.train.best_step},
                                  {"steps_run", r.train.steps_run},
                                  {"stopped_early", r.train.stopped_early}};
  files::write_text_atomic(out / "metrics.json", metrics.dump(2) + "\n");
  write_run_manifest(out, "train-offline", hash);
  std::cout << "test_mae " << r.test_mae << " (untrained " << r.untrained_mae << "), loss " << r.train.initial_loss
            << " -> " << r.train.final_loss << ", " << r.train.steps_run << " steps\n";
  return kOk;
}

struct ActiveArgs {
  std::vector<std::string> acqs{"lig"};
  std::vector<std::uint64_t> seeds{7};
  std::size_t batch = 1;
  std::size_t samples = 30;
  std::size_t rounds = 9;
  std::size_t steps = 200;
  std::size_t patience = 50;
  std::size_t n_z = 30;
  std::size_t n_x = 30;
  std::size_t group_random = 0;
  std::size_t max_batch = 0;
  bool no_plateau = false;
  std::uint64_t sim_seed = 0;
  int horizon = 100;
  std::string data;
  std::string out;
  bool force = false;
  int stop_after = -1;
};

const std::initializer_list<const char*> kRunArtifacts = {"checkpoint.json", "metrics.csv", "choices.csv",
                                                          "scores.csv",      "config.json", "manifest.json"};

int cmd_active(const ActiveArgs& a) {
  DatasetSpec spec = default_seir_spec();
  spec.grid.base.horizon = a.horizon;
  std::optional<LoadedDataset> ds;
  if (!a.data.empty()) {
    ds = load_dataset(resolve_in(a.data));
    spec = ds->spec;
  }
  spec.samples = a.samples;
  if (!ds) spec.seed = a.sim_seed;
  const al::Simulator sim = spec.simulator();

  const bool driver = a.acqs.size() > 1 || a.seeds.size() > 1;
  const fs::path root = resolve_out(a.out, "runs/active");
  fs::create_directories(root);
  files::DirectoryLock lock(root);
  if (driver && a.force) fs::remove(root / "summary.csv");

  std::string summary = "acquisition,seed,round,pct_data,test_mae,val_loss\n";
  for (const auto& acq_name : a.acqs) {
    for (std::uint64_t seed : a.seeds) {
      al::LoopConfig c = config_for(spec);
      c.acquisition = acq::acquisition_from_string(acq_name);
      c.seed = seed;
      c.batch = a.batch;
      c.max_rounds = a.rounds;
      c.train_steps = a.steps;
      c.patience = a.patience;
      c.n_z = a.n_z;
      c.n_x = a.n_x;
      c.group_random = a.group_random;
      c.max_batch = a.max_batch;
      c.plateau_stop = !a.no_plateau;
      c.validate();

      const fs::path dir = driver ? root / (acq_name + "-seed" + std::to_string(seed)) : root;
      if (a.force)
        for (const char* f : kRunArtifacts) fs::remove(dir / f);
      fs::create_directories(dir);
      al::SimDataset data = al::SimDataset::from_design(spec.design());
      if (ds)
        for (al::Role r : {al::Role::candidate, al::Role::validation, al::Role::test})
          for (int id : ds->data.ids(r)) {
            auto s = ds->data.samples(id);
            if (s.size() > a.samples) s.resize(a.samples);
            data.set_samples(id, std::move(s));
          }
      const auto hash = al::config_hash(c, data);
      al::LoopHooks hooks;
      if (a.stop_after >= 0) hooks.interrupt_after = a.stop_after;
      const auto rep = al::run_active_loop(data, c, sim, al::default_surrogate, dir, hooks);
      write_config(dir, {{"command", "active"}, {"config_hash", hash}, {"loop", c.to_json()}});
      write_run_manifest(dir, "active", hash);
      for (const auto& m : rep.metrics) {
        std::ostringstream row;
        row.precision(17);
        row << acq_name << ',' << seed << ',' << m.round << ',' << m.pct_data << ',' << m.test_mae << ',';
        if (std::isfinite(m.val_loss)) row << m.val_loss;
        summary += row.str() + "\n";
      }
      std::cout << acq_name << " seed " << seed << ": " << rep.metrics.size() << " rounds, final test_mae "
                << rep.metrics.back().test_mae << " (" << (rep.already_complete ? "already complete" : rep.stop_reason)
                << ")\n";
    }
  }
  if (driver) {
    files::write_text_atomic(root / "summary.csv", summary);
    write_run_manifest(root, "active-driver", files::sha256_hex(summary));
  }
  return kOk;
}

struct TheoryArgs {
  std::vector<std::size_t> dims{4, 8, 16, 32};
  std::size_t rounds_per_dim = 40;
  double sigma = 0.5;
  double m = 1.0;
  std::size_t reps = 50;
  std::uint64_t seed = 0;
  std::string out;
  bool force = false;
};

int cmd_theory(const TheoryArgs& a) {
  theory::ScalingConfig c;
  c.dims = a.dims;
  c.rounds_per_dim = a.rounds_per_dim;
  c.sigma = a.sigma;
  c.m = a.m;
  c.replicates = a.reps;
  c.seed = a.seed;
  if (c.dims.empty() || c.replicates < 1 || c.rounds_per_dim < 1 || !(c.sigma > 0) || !(c.m > 0))
    throw ValidationError("theory: dims nonempty, reps >= 1, rounds >= 1, sigma > 0, m > 0");
  const fs::path out = resolve_out(a.out, "runs/theory");
  fs::create_directories(out);
  files::DirectoryLock lock(out);
  prepare_dir(out, a.force, {"theory.csv", "summary.json", "config.json", "manifest.json"});
  const auto s = theory::scaling_experiment(c);
  std::ostringstream csv;
  theory::write_scaling_csv(csv, s.rows);
  files::write_text_atomic(out / "theory.csv", csv.str());
  const nlohmann::json summary = {{"dims", c.dims},
                                  {"mean_greedy", s.mean_greedy},
                                  {"mean_random", s.mean_random},
                                  {"ratio", s.ratio},
                                  {"slope_greedy", s.slope_greedy},
                                  {"slope_random", s.slope_random},
                                  {"slope_difference", s.slope_difference},
                                  {"spearman_ratio", s.spearman_ratio}};
  files::write_text_atomic(out / "summary.json", summary.dump(2) + "\n");
  const nlohmann::json config = {{"command", "theory"},        {"dims", c.dims}, {"rounds_per_dim", c.rounds_per_dim},
                                 {"sigma", c.sigma},           {"m", c.m},       {"replicates", c.replicates},
                                 {"seed", c.seed}};
  write_config(out, config);
  write_run_manifest(out, "theory", files::sha256_hex(config.dump()));
  std::cout << "slope(random) - slope(greedy) = " << s.slope_difference << ", spearman = " << s.spearman_ratio << "\n";
  return kOk;
}

struct ScoreArgs {
  std::string model;
  std::string data;
  std::string acq = "lig";
  std::uint64_t seed = 0;
  std::size_t n_x = 30;
  std::size_t n_z = 30;
  double context_fraction = -1.0;
  std::vector<int> ids;
  std::string out;
  bool force = false;
};

int cmd_score(const ScoreArgs& a) {
  auto ds = load_dataset(resolve_in(a.data));
  nlohmann::json mj;
  try {
    mj = nlohmann::json::parse(files::read_text(resolve_in(a.model)));
  } catch (const nlohmann::json::exception&) {
    throw IoError("score: model file is not valid json");
  }
  // An active-run checkpoint nests the surrogate inside its payload.
  if (mj.contains("payload")) mj = mj["payload"].at("surrogate");
  const auto s = np::Surrogate::from_json(mj);
  al::LoopConfig c = config_for(ds.spec);
  c.acquisition = acq::acquisition_from_string(a.acq);
  c.seed = a.seed;
  c.n_x = a.n_x;
  c.n_z = a.n_z;
  if (a.context_fraction > 0) c.context_fraction = a.context_fraction;
  c.arch = s->arch();
  c.validate();
  if (!s->has_normalizers()) throw ValidationError("score: model has no normalization statistics");

  const auto cand = ds.data.ids(al::Role::candidate);
  std::vector<int> ids = a.ids.empty() ? cand : a.ids;
  const auto all = s->normalize(al::sample_set(ds.data, cand, c.features));
  Rng rng(stream_seed(c.seed, "context", {0}));
  const auto context = all.rows(np::choose_context(all.size(), c.context_fraction, rng));
  const auto scores = al::score_candidates(*s, ds.data, ids, context, c, 0);

  const fs::path out = resolve_out(a.out, "runs/scores.csv");
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  files::DirectoryLock lock(out.has_parent_path() ? out.parent_path() : fs::path("."));
  if (fs::exists(out) && !a.force) throw ValidationError("output exists: " + out.string() + "; pass --force");
  std::ostringstream csv;
  acq::write_scores_csv_header(csv);
  acq::write_scores_csv(csv, 0, scores);
  files::write_text_atomic(out, csv.str());
  const auto best = al::select_top(scores, 1);
  std::cout << "scored " << scores.size() << " scenarios with " << a.acq << "; best id " << best.front() << "\n";
  return kOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Bayesian active learning with neural-process surrogates of epidemic simulators"};
  app.set_config("--config", "", "TOML or INI file with option defaults; flags override it");
  app.require_subcommand(1);

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Simulate a scenario grid into JSONL plus a manifest");
  sim->add_option("--model", sa.model, "seir or metapop")->capture_default_str();
  sim->add_option("--grid", sa.grid, "Grid preset")->capture_default_str();
  sim->add_option("--beta", sa.beta, "Beta range start:stop:step");
  sim->add_option("--epsilon", sa.epsilon, "Epsilon range start:stop:step");
  sim->add_option("--holdout-beta", sa.holdout_beta, "Holdout beta midpoints")->capture_default_str();
  sim->add_option("--holdout-eps", sa.holdout_eps, "Holdout epsilon midpoints")->capture_default_str();
  sim->add_option("--horizon", sa.horizon, "Days")->capture_default_str();
  sim->add_option("--samples", sa.samples, "Samples per scenario")->capture_default_str();
  sim->add_option("--seed", sa.seed, "Base seed")->capture_default_str();
  sim->add_option("--nodes", sa.nodes, "Metapopulation nodes")->capture_default_str();
  sim->add_option("--self-weight", sa.self_weight, "Metapopulation self coupling")->capture_default_str();
  sim->add_option("--out", sa.out, "Output JSONL path");
  sim->add_flag("--force", sa.force, "Overwrite existing output");

  TrainArgs ta;
  auto* tr = app.add_subcommand("train-offline", "Train on every candidate scenario of a dataset");
  tr->add_option("--data", ta.data, "Dataset JSONL")->required();
  tr->add_option("--steps", ta.steps, "Adam steps")->capture_default_str();
  tr->add_option("--seed", ta.seed, "Seed")->capture_default_str();
  tr->add_option("--max-batch", ta.max_batch, "Rows per step, 0 = all")->capture_default_str();
  tr->add_option("--patience", ta.patience, "Early-stopping patience in steps")->capture_default_str();
  tr->add_option("--context-fraction", ta.context_fraction, "Context fraction (default 0.1 seir, 0.2 metapop)");
  tr->add_option("--latent-dim", ta.latent_dim, "Latent dimension")->capture_default_str();
  tr->add_option("--out", ta.out, "Output directory");
  tr->add_flag("--force", ta.force, "Overwrite existing output");

  ActiveArgs aa;
  std::string acq_list = "lig", seed_list = "7";
  auto* ac = app.add_subcommand("active", "Run the active-learning loop (resumes from a checkpoint)");
  ac->add_option("--acq", acq_list, "lig|meanstd|maxent|random, comma separated or 'all'")->capture_default_str();
  ac->add_option("--seed,--seeds", seed_list, "Seed or comma separated seeds")->capture_default_str();
  ac->add_option("--batch", aa.batch, "Scenarios per round")->capture_default_str();
  ac->add_option("--samples", aa.samples, "Samples per scenario")->capture_default_str();
  ac->add_option("--rounds", aa.rounds, "Maximum rounds")->capture_default_str();
  ac->add_option("--steps", aa.steps, "Adam steps per round")->capture_default_str();
  ac->add_option("--patience", aa.patience, "Early-stopping patience in steps")->capture_default_str();
  ac->add_option("--n-z", aa.n_z, "Predictive draws")->capture_default_str();
  ac->add_option("--n-x", aa.n_x, "LIG draws")->capture_default_str();
  ac->add_option("--group-random", aa.group_random, "Best of g random groups by joint LIG")->capture_default_str();
  ac->add_option("--max-batch", aa.max_batch, "Rows per step, 0 = all")->capture_default_str();
  ac->add_option("--sim-seed", aa.sim_seed, "Base seed of simulator queries")->capture_default_str();
  ac->add_option("--horizon", aa.horizon, "Days (without --data)")->capture_default_str();
  ac->add_option("--data", aa.data, "Dataset JSONL whose scenarios and samples are reused");
  ac->add_flag("--no-plateau", aa.no_plateau, "Run all rounds even if validation stops improving");
  ac->add_option("--out", aa.out, "Run directory");
  ac->add_flag("--force", aa.force, "Discard an existing run in the directory");
  ac->add_option("--stop-after-round", aa.stop_after, "Stop after checkpointing this round")->group("");

  TheoryArgs th;
  auto* thc = app.add_subcommand("theory", "Greedy vs random error scaling on the Bayesian linear model");
  thc->add_option("--dims", th.dims, "Dimensions")->delimiter(',')->capture_default_str();
  thc->add_option("--rounds-per-dim", th.rounds_per_dim, "Rounds k = this * d")->capture_default_str();
  thc->add_option("--sigma", th.sigma, "Noise std")->capture_default_str();
  thc->add_option("--m", th.m, "Prior precision")->capture_default_str();
  thc->add_option("--reps", th.reps, "Replicates per cell")->capture_default_str();
  thc->add_option("--seed", th.seed, "Seed")->capture_default_str();
  thc->add_option("--out", th.out, "Output directory");
  thc->add_flag("--force", th.force, "Overwrite existing output");

  ScoreArgs sc;
  auto* scc = app.add_subcommand("score", "Score candidate scenarios with a trained surrogate");
  scc->add_option("--model", sc.model, "model.json or an active-run checkpoint.json")->required();
  scc->add_option("--data", sc.data, "Dataset JSONL providing scenarios and context")->required();
  scc->add_option("--acq", sc.acq, "lig|meanstd|maxent|random")->capture_default_str();
  scc->add_option("--seed", sc.seed, "Seed")->capture_default_str();
  scc->add_option("--n-x", sc.n_x, "LIG draws")->capture_default_str();
  scc->add_option("--n-z", sc.n_z, "Predictive draws")->capture_default_str();
  scc->add_option("--context-fraction", sc.context_fraction, "Context fraction");
  scc->add_option("--ids", sc.ids, "Scenario ids (default: all candidates)")->delimiter(',');
  scc->add_option("--out", sc.out, "Output CSV");
  scc->add_flag("--force", sc.force, "Overwrite existing output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*sim) return cmd_simulate(sa);
    if (*tr) return cmd_train_offline(ta);
    if (*ac) {
      auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream in(s);
        std::string item;
        while (std::getline(in, item, ','))
          if (!item.empty()) out.push_back(item);
        return out;
      };
      aa.acqs = acq_list == "all" ? std::vector<std::string>{"lig", "meanstd", "maxent", "random"} : split(acq_list);
      aa.seeds.clear();
      for (const auto& s : split(seed_list)) {
        try {
          aa.seeds.push_back(std::stoull(s));
        } catch (const std::exception&) {
          throw ValidationError("bad seed: " + s);
        }
      }
      if (aa.acqs.empty() || aa.seeds.empty()) throw ValidationError("need at least one acquisition and seed");
      for (const auto& n : aa.acqs) acq::acquisition_from_string(n);
      return cmd_active(aa);
    }
    if (*thc) return cmd_theory(th);
    if (*scc) return cmd_score(sc);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace inp::cli
