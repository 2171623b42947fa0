#ifndef CFEE_HARNESS_EXPERIMENTS_HPP_
#define CFEE_HARNESS_EXPERIMENTS_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfee/harness/config_file.hpp"
#include "cfee/ppo/checkpoint.hpp"

namespace cfee::harness {

enum class Scheme { kProposed, kDrlAo, kDrlAp, kFixed };

Scheme parse_scheme(const std::string& s);
std::string to_string(Scheme scheme);

/// Learned coordinates per scheme. Throws ConfigError for kFixed.
ppo::ActionSpace action_space_for(Scheme scheme,
                                  const alloc::ActionBounds& bounds);

/// Seed of held-out scenario i; disjoint from the training streams.
std::uint64_t heldout_seed(std::uint64_t master, int index);

std::vector<netgen::Scenario> heldout_scenarios(const SystemConfig& sys,
                                                std::uint64_t master, int n);

/// One evaluated decision.
struct EvalRow {
  std::uint64_t seed = 0;
  alloc::Action action;
  perf::AllocationDecision decision;
  perf::PerfReport report;
  double reward = 0.0;
};

EvalRow evaluate_action(const alloc::Action& action,
                        const netgen::Scenario& sc, const SystemConfig& sys,
                        double penalty);

/// Deterministic (mean) action of the policy on each scenario.
std::vector<EvalRow> evaluate_policy(const ppo::GaussianPolicy& policy,
                                     const env::FeatureNormalizer& normalizer,
                                     const std::vector<netgen::Scenario>& scs,
                                     const SystemConfig& sys, double penalty,
                                     int threads = 1);

std::vector<EvalRow> evaluate_fixed(const alloc::Action& action,
                                    const std::vector<netgen::Scenario>& scs,
                                    const SystemConfig& sys, double penalty,
                                    int threads = 1);

/// Exhaustive reward maximization over the grid. Ties keep the
/// lexicographically smallest (zeta, kappa, nu).
EvalRow grid_search(const netgen::Scenario& sc, const Grid& grid,
                    const SystemConfig& sys, double penalty);

std::vector<EvalRow> grid_oracle(const std::vector<netgen::Scenario>& scs,
                                 const Grid& grid, const SystemConfig& sys,
                                 double penalty, int threads = 1);

/// perf::csv_header() followed by one row per entry, in input order.
std::string eval_csv(const std::vector<EvalRow>& rows);

struct Summary {
  double mean = 0.0;
  double stderr_mean = 0.0;  // sample std / sqrt(n)
  long n = 0;
};

Summary summarize(const std::vector<double>& xs);
std::vector<double> ee_values(const std::vector<EvalRow>& rows);  // Mbit/J
std::vector<double> rewards(const std::vector<EvalRow>& rows);

/// Trained agent or fixed coefficients for one scheme.
struct BaselineOutcome {
  Scheme scheme = Scheme::kFixed;
  std::optional<ppo::Checkpoint> checkpoint;
  alloc::Action fixed;
};

/// Trains the scheme's agent (or returns cfg.fixed_action for kFixed).
BaselineOutcome run_baseline(
    Scheme scheme, const ExperimentConfig& cfg, std::uint64_t seed,
    const std::function<void(const ppo::TrainLogRow&)>& on_update = {},
    std::vector<double>* step_rewards = nullptr);

struct SweepRow {
  std::string scheme;
  double p_bt = 0.0;
  Summary ee;
};

/// Mean held-out EE per (P_bt, scheme); rows ordered by P_bt then scheme name.
std::vector<SweepRow> sweep_pbt(
    const std::map<std::string, ppo::Checkpoint>& agents,
    const std::vector<double>& pbt_values, std::uint64_t master,
    int n_scenarios, int threads = 1);

std::string sweep_csv(const std::vector<SweepRow>& rows);

struct BenchRow {
  int num_aps = 0;
  int num_users = 0;
  long calls = 0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double grid_ms = 0.0;  // one grid search per decision
  double speedup() const { return median_ms > 0.0 ? grid_ms / median_ms : 0.0; }
};

struct BenchReport {
  std::vector<BenchRow> rows;
  double growth_exponent = 0.0;  // least-squares slope of log median vs log M
};

/**
 * Per-decision latency of (features, actor forward, squash, realize) at
 * each M, with K and N from `sys`. Untrained actors are used: the cost does
 * not depend on the weights.
 */
BenchReport bench_runtime(const SystemConfig& sys, const ppo::PpoHyper& hyper,
                          const std::vector<int>& m_values, long calls,
                          const Grid& grid, int grid_calls, std::uint64_t seed);

std::string bench_csv(const BenchReport& report);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct SeCase {
  int index = 0;
  std::uint64_t seed = 0;
  int num_aps = 0;
  int num_users = 0;
  int antennas = 0;
  int tau_p = 0;
  Eigen::VectorXd closed_form;
  Eigen::VectorXd monte_carlo;
  double max_rel_gap = 0.0;
  bool passed = false;
};

struct SeValidation {
  std::vector<SeCase> cases;
  int worst = -1;
  bool passed() const;
};

inline constexpr double kSeRelTol = 0.03;

/**
 * Cross-checks closed_form_se against mc_se_oracle on random small
 * instances (M <= 4, K <= 3, N <= 4, orthogonal pilots) under random
 * realized actions, placed at the AP density of `base`. With `shared_pilot_case`, one extra case with K = 2
 * users on a single pilot is appended.
 */
SeValidation validate_se(const SystemConfig& base, int n_cases,
                         long n_realizations, std::uint64_t master,
                         bool shared_pilot_case = true, int threads = 1);

std::string validate_csv(const SeValidation& v);

}  // namespace cfee::harness

#endif  // CFEE_HARNESS_EXPERIMENTS_HPP_
