#ifndef CFEE_HARNESS_CONFIG_FILE_HPP_
#define CFEE_HARNESS_CONFIG_FILE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cfee/env.hpp"
#include "cfee/ppo/trainer.hpp"

namespace cfee::harness {

enum class ExperimentKind {
  kTrain,
  kEval,
  kOracle,
  kSweepPbt,
  kBenchRuntime,
  kValidateSe
};

ExperimentKind parse_experiment_kind(const std::string& s);
std::string to_string(ExperimentKind kind);

/// Per-coordinate candidate values of the (zeta, kappa, nu) search grid.
struct Grid {
  std::vector<double> zeta;
  std::vector<double> kappa;
  std::vector<double> nu;

  std::size_t size() const { return zeta.size() * kappa.size() * nu.size(); }
};

/// Parses "z=lo:hi:count,k=lo:hi:count,n=lo:hi:count". A single value
/// "z=0.5" is accepted as a one-point axis. Throws ConfigError.
Grid parse_grid(const std::string& spec);

/// Evenly spaced values, endpoints included.
std::vector<double> linspace(double lo, double hi, int count);

/// Comma-separated doubles, e.g. "0,0.0625,0.125".
std::vector<double> parse_double_list(const std::string& s);
std::vector<int> parse_int_list(const std::string& s);

struct ExperimentConfig {
  SystemConfig system;
  env::EnvConfig env;
  ppo::PpoHyper ppo;
  ExperimentKind kind = ExperimentKind::kTrain;
  std::string scheme = "proposed";
  alloc::Action fixed_action{1.0, 0.0, 1.0};
  Grid grid = parse_grid("z=0.05:1:20,k=0:4:17,n=0:4:17");
  std::vector<double> pbt_values{0.0, 0.0625, 0.125, 0.1875, 0.25};
  std::vector<int> m_values{20, 40, 60, 80, 100};
  int eval_scenarios = 100;
  int validate_cases = 20;
  long validate_realizations = 100000;
  std::filesystem::path output_dir = "runs/default";
  std::uint64_t master_seed = 1;

  void validate() const;
};

/// Loads a YAML file with optional blocks `system`, `env`, `ppo` and
/// `experiment`. Missing keys keep their defaults; unknown keys are errors.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Same, from YAML text.
ExperimentConfig parse_experiment_config(const std::string& text);

}  // namespace cfee::harness

#endif  // CFEE_HARNESS_CONFIG_FILE_HPP_
