#ifndef CFEE_ENV_HPP_
#define CFEE_ENV_HPP_

#include <cstdint>
#include <memory>
#include <string>

#include "cfee/alloc.hpp"
#include "cfee/netgen.hpp"
#include "cfee/perf.hpp"

namespace cfee::env {

enum class FeatureMode { kDbStandardized, kRaw };

FeatureMode parse_feature_mode(const std::string& s);
std::string to_string(FeatureMode mode);

struct EnvConfig {
  int episode_length = 200;
  double penalty = 20.0;
  FeatureMode feature_mode = FeatureMode::kDbStandardized;
  int warmup_slots = 1000;
  alloc::ActionBounds bounds;

  void validate() const;
};

/// Per-feature affine map from beta to network inputs.
struct FeatureNormalizer {
  FeatureMode mode = FeatureMode::kDbStandardized;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;

  /// Flattens beta column-major (user-major) and standardizes it.
  Eigen::VectorXd transform(const Eigen::MatrixXd& beta) const;

  /// Statistics of 10 log10(beta) over `slots` fresh scenarios.
  static FeatureNormalizer fit(const SystemConfig& cfg, FeatureMode mode,
                               int slots, std::uint64_t seed);
};

struct EnvState {
  Eigen::VectorXd features;
  int slot = 1;
  std::shared_ptr<const netgen::Scenario> scenario;
};

struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd raw_action;
  alloc::Action action;
  double log_prob = 0.0;
  double reward = 0.0;
  double value = 0.0;
  bool done = false;
  Eigen::VectorXd next_state;
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
  bool done = false;
  alloc::Action applied;
  perf::AllocationDecision decision;
  perf::PerfReport report;
};

/// E_e in Mbit/J minus the weighted sum of QoS shortfalls.
double compute_reward(const perf::PerfReport& report, double penalty);

/**
 * Episodic environment over large-scale intervals.
 *
 * Each episode fixes an AP grid; every slot redraws user positions,
 * shadowing and pilots from the episode's seed stream. Episodes end after
 * `episode_length` slots.
 */
class Environment {
 public:
  Environment(SystemConfig sys, EnvConfig env, std::uint64_t seed);
  Environment(SystemConfig sys, EnvConfig env, std::uint64_t seed,
              FeatureNormalizer normalizer);

  /// Starts the next episode of this instance's seed stream.
  const EnvState& reset();
  /// Starts an episode from an explicit episode seed.
  const EnvState& reset(std::uint64_t episode_seed);

  StepResult step(const alloc::Action& action);

  const EnvState& state() const { return state_; }
  const FeatureNormalizer& normalizer() const { return normalizer_; }
  const SystemConfig& system() const { return sys_; }
  const EnvConfig& config() const { return env_; }
  int observation_dim() const { return sys_.num_aps * sys_.num_users; }
  long clamp_warnings() const { return clamp_warnings_; }

 private:
  EnvState make_state(int slot);

  SystemConfig sys_;
  EnvConfig env_;
  std::uint64_t seed_;
  FeatureNormalizer normalizer_;
  std::uint64_t episode_index_ = 0;
  std::uint64_t episode_seed_ = 0;
  Positions aps_;
  EnvState state_;
  long clamp_warnings_ = 0;
};

}  // namespace cfee::env

#endif  // CFEE_ENV_HPP_
