#include "cfee/env.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace cfee::env {

namespace {

constexpr std::uint64_t kEpisodeStream = 0x65706973ULL;
constexpr std::uint64_t kSlotStream = 0x736c6f74ULL;
constexpr std::uint64_t kWarmupStream = 0x7761726dULL;

}  // namespace

FeatureMode parse_feature_mode(const std::string& s) {
  if (s == "db_standardized") return FeatureMode::kDbStandardized;
  if (s == "raw") return FeatureMode::kRaw;
  throw ConfigError("unknown feature_mode '" + s + "'");
}

std::string to_string(FeatureMode mode) {
  return mode == FeatureMode::kRaw ? "raw" : "db_standardized";
}

void EnvConfig::validate() const {
  if (episode_length < 1) throw ConfigError("episode_length >= 1");
  if (!(penalty >= 0.0)) throw ConfigError("penalty_coefficient >= 0");
  if (warmup_slots < 2) throw ConfigError("warmup_slots >= 2");
  const auto& b = bounds;
  if (!(b.zeta_lo > 0.0 && b.zeta_lo <= b.zeta_hi && b.zeta_hi <= 1.0)) {
    throw ConfigError("zeta bounds must satisfy 0 < lo <= hi <= 1");
  }
  if (!(b.kappa_lo >= 0.0 && b.kappa_lo <= b.kappa_hi && b.nu_lo >= 0.0 &&
        b.nu_lo <= b.nu_hi)) {
    throw ConfigError("kappa/nu bounds must satisfy 0 <= lo <= hi");
  }
}

Eigen::VectorXd FeatureNormalizer::transform(const Eigen::MatrixXd& beta) const {
  const Eigen::Map<const Eigen::VectorXd> flat(beta.data(), beta.size());
  if (mode == FeatureMode::kRaw) return flat;
  const Eigen::ArrayXd db = 10.0 * flat.array().log10();
  return ((db - mean.array()) / stddev.array()).matrix();
}

FeatureNormalizer FeatureNormalizer::fit(const SystemConfig& cfg,
                                         FeatureMode mode, int slots,
                                         std::uint64_t seed) {
  const int dim = cfg.num_aps * cfg.num_users;
  FeatureNormalizer norm;
  norm.mode = mode;
  norm.mean = Eigen::VectorXd::Zero(dim);
  norm.stddev = Eigen::VectorXd::Ones(dim);
  if (mode == FeatureMode::kRaw) return norm;

  // Welford accumulation in slot order.
  Eigen::ArrayXd mean = Eigen::ArrayXd::Zero(dim);
  Eigen::ArrayXd m2 = Eigen::ArrayXd::Zero(dim);
  for (int i = 0; i < slots; ++i) {
    const auto sc =
        netgen::generate_scenario(cfg, derive_seed(seed, kWarmupStream, i));
    const Eigen::Map<const Eigen::ArrayXd> flat(sc.beta.data(), dim);
    const Eigen::ArrayXd db = 10.0 * flat.log10();
    const Eigen::ArrayXd delta = db - mean;
    mean += delta / (i + 1);
    m2 += delta * (db - mean);
  }
  norm.mean = mean.matrix();
  norm.stddev = (m2 / (slots - 1)).sqrt().max(1e-6).matrix();
  return norm;
}

double compute_reward(const perf::PerfReport& report, double penalty) {
  return report.ee_mbits_per_joule() - penalty * report.qos_shortfall.sum();
}

Environment::Environment(SystemConfig sys, EnvConfig env, std::uint64_t seed)
    : sys_(std::move(sys)), env_(std::move(env)), seed_(seed) {
  sys_.validate();
  env_.validate();
  normalizer_ = FeatureNormalizer::fit(sys_, env_.feature_mode,
                                       env_.warmup_slots, seed_);
}

Environment::Environment(SystemConfig sys, EnvConfig env, std::uint64_t seed,
                         FeatureNormalizer normalizer)
    : sys_(std::move(sys)),
      env_(std::move(env)),
      seed_(seed),
      normalizer_(std::move(normalizer)) {
  sys_.validate();
  env_.validate();
  if (normalizer_.mean.size() != observation_dim()) {
    throw ConfigError("normalizer dimension does not match M*K");
  }
}

const EnvState& Environment::reset() {
  return reset(derive_seed(seed_, kEpisodeStream, episode_index_++));
}

const EnvState& Environment::reset(std::uint64_t episode_seed) {
  episode_seed_ = episode_seed;
  if (sys_.placement) {
    aps_ = sys_.placement->aps;
  } else {
    Rng rng = make_rng(episode_seed_);
    aps_ = netgen::draw_positions(sys_.num_aps, sys_.area_side, rng);
  }
  state_ = make_state(1);
  return state_;
}

EnvState Environment::make_state(int slot) {
  EnvState s;
  s.slot = slot;
  s.scenario = std::make_shared<const netgen::Scenario>(netgen::generate_scenario(
      sys_, aps_, derive_seed(episode_seed_, kSlotStream, slot)));
  s.features = normalizer_.transform(s.scenario->beta);
  return s;
}

StepResult Environment::step(const alloc::Action& action) {
  if (!state_.scenario) throw std::logic_error("Environment::step before reset");
  StepResult out;
  out.applied = action;
  if (!env_.bounds.contains(action)) {
    out.applied = env_.bounds.clamp(action);
    if (clamp_warnings_++ == 0) {
      std::cerr << "warning: action (" << action.zeta << ", " << action.kappa
                << ", " << action.nu << ") outside bounds; clamped\n";
    }
  }
  out.decision = alloc::realize(out.applied, *state_.scenario, sys_.antennas);
  out.report = perf::evaluate(*state_.scenario, out.decision, sys_);
  out.reward = compute_reward(out.report, env_.penalty);
  out.done = state_.slot >= env_.episode_length;
  if (!out.done) state_ = make_state(state_.slot + 1);
  out.next = state_;
  return out;
}

}  // namespace cfee::env
