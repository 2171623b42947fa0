// cfee: command-line front end for scenario generation, training,
// evaluation and the benchmark experiments.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "cfee/csv.hpp"
#include "cfee/harness/config_file.hpp"
#include "cfee/harness/experiments.hpp"
#include "cfee/harness/parallel.hpp"

namespace fs = std::filesystem;
using namespace cfee;

namespace {

harness::ExperimentConfig load_or_default(const std::string& path) {
  if (path.empty()) {
    harness::ExperimentConfig c;
    c.validate();
    return c;
  }
  return harness::load_experiment_config(path);
}

// Writes text to `path`, or stdout when path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

bool is_bundle(const fs::path& dir) {
  return fs::exists(dir / "scenario_meta.csv");
}

std::vector<netgen::Scenario> read_scenarios(const fs::path& dir) {
  if (is_bundle(dir)) return {netgen::read_scenario(dir)};
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory() && is_bundle(e.path())) subdirs.push_back(e.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  if (subdirs.empty()) {
    throw std::runtime_error("no scenario bundles under " + dir.string());
  }
  std::vector<netgen::Scenario> out;
  for (const auto& d : subdirs) out.push_back(netgen::read_scenario(d));
  return out;
}

std::string train_log_csv(const std::vector<ppo::TrainLogRow>& log) {
  std::string out =
      "step,mean_reward,policy_loss,value_loss,mean_zeta,mean_kappa,mean_nu\n";
  for (const auto& r : log) {
    out += csv::join({std::to_string(r.step), csv::format(r.mean_reward),
                      csv::format(r.policy_loss), csv::format(r.value_loss),
                      csv::format(r.mean_zeta), csv::format(r.mean_kappa),
                      csv::format(r.mean_nu)});
    out += "\n";
  }
  return out;
}

std::string rewards_csv(const std::vector<double>& r) {
  std::string out = "step,reward\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    out += std::to_string(i + 1) + "," + csv::format(r[i]) + "\n";
  }
  return out;
}

int cmd_gen(const std::string& config, std::uint64_t seed, int count,
            const std::string& out) {
  const auto cfg = load_or_default(config);
  if (count == 1) {
    netgen::write_scenario(netgen::generate_scenario(cfg.system, seed),
                           cfg.system, out);
    return 0;
  }
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scenario_%04d", i);
    const auto s = derive_seed(seed, 0, static_cast<std::uint64_t>(i));
    netgen::write_scenario(netgen::generate_scenario(cfg.system, s),
                           cfg.system, fs::path(out) / name);
  }
  return 0;
}

int cmd_train(const std::string& config, const std::string& scheme_name,
              const std::string& out, std::optional<std::uint64_t> seed,
              bool quiet) {
  auto cfg = load_or_default(config);
  const auto scheme = harness::parse_scheme(scheme_name);
  if (scheme == harness::Scheme::kFixed) {
    throw ConfigError("train supports proposed, drl_ao and drl_ap");
  }
  const std::uint64_t s = seed.value_or(cfg.master_seed);
  std::vector<double> step_rewards;
  auto log_cb = [&](const ppo::TrainLogRow& r) {
    if (!quiet) {
      std::fprintf(stderr, "step %ld  reward %.4f  zeta %.3f kappa %.3f nu %.3f\n",
                   r.step, r.mean_reward, r.mean_zeta, r.mean_kappa, r.mean_nu);
    }
  };
  std::vector<ppo::TrainLogRow> log;
  auto outcome = harness::run_baseline(
      scheme, cfg, s,
      [&](const ppo::TrainLogRow& r) {
        log.push_back(r);
        log_cb(r);
      },
      &step_rewards);
  const auto& ck = *outcome.checkpoint;
  const fs::path dir(out);
  fs::create_directories(dir);
  ppo::save_checkpoint(ck, dir / "checkpoint.bin");
  emit((dir / "train_log.csv").string(), train_log_csv(log));
  emit((dir / "rewards.csv").string(), rewards_csv(step_rewards));

  const auto scs =
      harness::heldout_scenarios(cfg.system, cfg.master_seed, cfg.eval_scenarios);
  const auto rows = harness::evaluate_policy(ck.policy, ck.normalizer, scs,
                                             cfg.system, cfg.env.penalty,
                                             harness::worker_count());
  emit((dir / "heldout_eval.csv").string(), harness::eval_csv(rows));
  const auto ee = harness::summarize(harness::ee_values(rows));
  std::fprintf(stderr, "%s held-out mean EE %.4f Mbit/J (stderr %.4f, n=%ld)\n",
               scheme_name.c_str(), ee.mean, ee.stderr_mean, ee.n);
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& scenarios,
             const std::string& out) {
  const auto ck = ppo::load_checkpoint(checkpoint);
  const auto scs = read_scenarios(scenarios);
  for (const auto& sc : scs) {
    if (sc.num_aps() != ck.system.num_aps ||
        sc.num_users() != ck.system.num_users) {
      throw std::runtime_error("scenario dimensions do not match checkpoint");
    }
  }
  const auto rows = harness::evaluate_policy(ck.policy, ck.normalizer, scs,
                                             ck.system, ck.env.penalty,
                                             harness::worker_count());
  emit(out, harness::eval_csv(rows));
  return 0;
}

int cmd_oracle(const std::string& config, const std::string& grid,
               std::optional<int> scenarios, const std::string& out) {
  auto cfg = load_or_default(config);
  if (!grid.empty()) cfg.grid = harness::parse_grid(grid);
  const auto scs = harness::heldout_scenarios(
      cfg.system, cfg.master_seed, scenarios.value_or(cfg.eval_scenarios));
  const auto rows = harness::grid_oracle(scs, cfg.grid, cfg.system,
                                         cfg.env.penalty, harness::worker_count());
  emit(out, harness::eval_csv(rows));
  return 0;
}

int cmd_sweep(const std::string& config, const std::string& values,
              const std::string& ckdir, const std::string& out) {
  auto cfg = load_or_default(config);
  if (!values.empty()) cfg.pbt_values = harness::parse_double_list(values);
  std::map<std::string, ppo::Checkpoint> agents;
  for (const char* name : {"proposed", "drl_ao", "drl_ap"}) {
    const fs::path p = fs::path(ckdir) / name / "checkpoint.bin";
    if (!fs::exists(p)) throw std::runtime_error("missing checkpoint " + p.string());
    agents.emplace(name, ppo::load_checkpoint(p));
  }
  const auto rows = harness::sweep_pbt(agents, cfg.pbt_values, cfg.master_seed,
                                       cfg.eval_scenarios, harness::worker_count());
  emit(out, harness::sweep_csv(rows));
  return 0;
}

int cmd_bench(const std::string& config, const std::string& m_values,
              long calls, int grid_calls, const std::string& out) {
  auto cfg = load_or_default(config);
  if (!m_values.empty()) cfg.m_values = harness::parse_int_list(m_values);
  const auto grid = harness::parse_grid("z=0.05:1:10,k=0:4:10,n=0:4:10");
  const auto rep = harness::bench_runtime(cfg.system, cfg.ppo, cfg.m_values,
                                          calls, grid, grid_calls, cfg.master_seed);
  emit(out, harness::bench_csv(rep));
  std::fprintf(stderr, "latency growth exponent in M: %.3f\n", rep.growth_exponent);
  return 0;
}

int cmd_validate(const std::string& config, int cases, long realizations,
                 const std::string& out) {
  const auto cfg = load_or_default(config);
  const auto v = harness::validate_se(cfg.system, cases, realizations,
                                      cfg.master_seed, true,
                                      harness::worker_count());
  emit(out, harness::validate_csv(v));
  const auto& w = v.cases[static_cast<std::size_t>(v.worst)];
  std::fprintf(stderr, "worst case %d (seed %llu, M=%d K=%d N=%d tau_p=%d): gap %.4f\n",
               w.index, static_cast<unsigned long long>(w.seed), w.num_aps,
               w.num_users, w.antennas, w.tau_p, w.max_rel_gap);
  for (const auto& c : v.cases) {
    if (!c.passed) {
      std::fprintf(stderr, "FAILED case %d seed %llu gap %.4f\n", c.index,
                   static_cast<unsigned long long>(c.seed), c.max_rel_gap);
    }
  }
  return v.passed() ? 0 : 1;
}

int cmd_run(const std::string& config) {
  const auto cfg = harness::load_experiment_config(config);
  const std::string dir = cfg.output_dir.string();
  switch (cfg.kind) {
    case harness::ExperimentKind::kTrain:
      return cmd_train(config, cfg.scheme, dir, std::nullopt, false);
    case harness::ExperimentKind::kEval: {
      const auto ck = ppo::load_checkpoint(cfg.output_dir / "checkpoint.bin");
      const auto scs = harness::heldout_scenarios(ck.system, cfg.master_seed,
                                                  cfg.eval_scenarios);
      const auto rows = harness::evaluate_policy(ck.policy, ck.normalizer, scs,
                                                 ck.system, ck.env.penalty,
                                                 harness::worker_count());
      emit(dir + "/eval.csv", harness::eval_csv(rows));
      return 0;
    }
    case harness::ExperimentKind::kOracle:
      return cmd_oracle(config, "", std::nullopt, dir + "/oracle.csv");
    case harness::ExperimentKind::kSweepPbt:
      return cmd_sweep(config, "", dir, dir + "/sweep_pbt.csv");
    case harness::ExperimentKind::kBenchRuntime:
      return cmd_bench(config, "", 1000, 5, dir + "/bench.csv");
    case harness::ExperimentKind::kValidateSe:
      return cmd_validate(config, cfg.validate_cases, cfg.validate_realizations,
                          dir + "/validate_se.csv");
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-free massive MIMO energy-efficiency lab"};
  app.require_subcommand(1);

  std::string config, out, scheme = "proposed", checkpoint, scenarios, grid,
      values, ckdir, m_values;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> train_seed;
  std::optional<int> oracle_scenarios;
  int count = 1, cases = 20, grid_calls = 5;
  long realizations = 100000, calls = 1000;
  bool quiet = false;

  auto* gen = app.add_subcommand("gen", "Generate scenario bundles");
  gen->add_option("--config", config, "YAML config")->check(CLI::ExistingFile);
  gen->add_option("--seed", seed, "Scenario seed");
  gen->add_option("--count", count, "Number of bundles")->check(CLI::PositiveNumber);
  gen->add_option("--out", out, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train a PPO agent");
  train->add_option("--config", config)->check(CLI::ExistingFile);
  train->add_option("--scheme", scheme)
      ->check(CLI::IsMember({"proposed", "drl_ao", "drl_ap"}));
  train->add_option("--out", out, "Run directory")->required();
  train->add_option("--seed", train_seed, "Training seed (default: master seed)");
  train->add_flag("--quiet", quiet);

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on scenario bundles");
  eval->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  eval->add_option("--scenarios", scenarios)->required()->check(CLI::ExistingDirectory);
  eval->add_option("--out", out, "CSV path (default stdout)");

  auto* oracle = app.add_subcommand("oracle", "Grid-search oracle on held-out scenarios");
  oracle->add_option("--config", config)->check(CLI::ExistingFile);
  oracle->add_option("--grid", grid, "z=lo:hi:n,k=lo:hi:n,n=lo:hi:n");
  oracle->add_option("--scenarios", oracle_scenarios, "Held-out scenario count");
  oracle->add_option("--out", out);

  auto* sweep = app.add_subcommand("sweep-pbt", "Held-out EE versus P_bt");
  sweep->add_option("--config", config)->check(CLI::ExistingFile);
  sweep->add_option("--values", values, "Comma-separated P_bt values");
  sweep->add_option("--checkpoint-dir", ckdir,
                    "Directory with proposed/, drl_ao/, drl_ap/ runs")
      ->required()
      ->check(CLI::ExistingDirectory);
  sweep->add_option("--out", out);

  auto* bench = app.add_subcommand("bench", "Per-decision latency versus M");
  bench->add_option("--config", config)->check(CLI::ExistingFile);
  bench->add_option("--m-values", m_values, "Comma-separated AP counts");
  bench->add_option("--calls", calls, "Timed decisions per M")
      ->check(CLI::Range(1000L, 100000000L));
  bench->add_option("--grid-calls", grid_calls, "Timed grid searches per M");
  bench->add_option("--out", out);

  auto* validate = app.add_subcommand("validate-se", "Closed-form SE versus Monte Carlo");
  validate->add_option("--config", config)->check(CLI::ExistingFile);
  validate->add_option("--cases", cases)->check(CLI::PositiveNumber);
  validate->add_option("--realizations", realizations)->check(CLI::PositiveNumber);
  validate->add_option("--out", out);

  auto* run = app.add_subcommand("run", "Run the experiment named in a config");
  run->add_option("--config", config)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(config, seed, count, out);
    if (*train) return cmd_train(config, scheme, out, train_seed, quiet);
    if (*eval) return cmd_eval(checkpoint, scenarios, out);
    if (*oracle) return cmd_oracle(config, grid, oracle_scenarios, out);
    if (*sweep) return cmd_sweep(config, values, ckdir, out);
    if (*bench) return cmd_bench(config, m_values, calls, grid_calls, out);
    if (*validate) return cmd_validate(config, cases, realizations, out);
    if (*run) return cmd_run(config);
  } catch (const std::exception& e) {
    std::cerr << "cfee: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
