#include "cfee/harness/config_file.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cfee/csv.hpp"

namespace cfee::harness {

namespace {

template <typename T>
T to_number(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    T v{};
    if constexpr (std::is_same_v<T, int>) {
      v = std::stoi(s, &pos);
    } else {
      v = std::stod(s, &pos);
    }
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad number '" + s + "' in " + what);
  }
}

// Rejects keys of `node` not listed in `known`.
void check_keys(const YAML::Node& node, const std::string& block,
                const std::set<std::string>& known) {
  if (!node.IsMap()) throw ConfigError("block '" + block + "' must be a map");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key)) {
      throw ConfigError("unknown key '" + block + "." + key + "'");
    }
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out,
          const std::string& block) {
  if (!node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError("bad value for '" + block + "." + key + "': " + e.what());
  }
}

void read_range(const YAML::Node& node, const char* key, double& lo,
                double& hi) {
  if (!node[key]) return;
  const auto v = node[key];
  if (!v.IsSequence() || v.size() != 2) {
    throw ConfigError(std::string("env.action_bounds.") + key +
                      " must be [lo, hi]");
  }
  lo = v[0].as<double>();
  hi = v[1].as<double>();
}

void load_system(const YAML::Node& n, SystemConfig& s) {
  const std::string b = "system";
  check_keys(n, b,
             {"num_aps", "num_users", "antennas", "area_side", "d0", "d1",
              "path_loss_db", "path_loss_unit_m", "shadow_sigma_db",
              "bandwidth_hz", "noise_figure_db", "tau_c", "tau_p",
              "p_down_watts", "p_pilot_watts", "alpha_amp", "p_tc_watts",
              "p_fix_watts", "p_bt_watts_per_gbps", "se_min"});
  read(n, "num_aps", s.num_aps, b);
  read(n, "num_users", s.num_users, b);
  read(n, "antennas", s.antennas, b);
  read(n, "area_side", s.area_side, b);
  read(n, "d0", s.d0, b);
  read(n, "d1", s.d1, b);
  read(n, "path_loss_db", s.path_loss_db, b);
  read(n, "path_loss_unit_m", s.path_loss_unit_m, b);
  read(n, "shadow_sigma_db", s.shadow_sigma_db, b);
  read(n, "bandwidth_hz", s.bandwidth_hz, b);
  read(n, "noise_figure_db", s.noise_figure_db, b);
  read(n, "tau_c", s.tau_c, b);
  read(n, "tau_p", s.tau_p, b);
  read(n, "p_down_watts", s.p_down_watts, b);
  read(n, "p_pilot_watts", s.p_pilot_watts, b);
  read(n, "alpha_amp", s.alpha_amp, b);
  read(n, "p_tc_watts", s.p_tc_watts, b);
  read(n, "p_fix_watts", s.p_fix_watts, b);
  read(n, "p_bt_watts_per_gbps", s.p_bt_watts_per_gbps, b);
  read(n, "se_min", s.se_min, b);
}

void load_env(const YAML::Node& n, ExperimentConfig& c) {
  const std::string b = "env";
  check_keys(n, b,
             {"episode_length", "penalty_coefficient", "feature_mode",
              "idle_backhaul_power", "warmup_slots", "action_bounds"});
  read(n, "episode_length", c.env.episode_length, b);
  read(n, "penalty_coefficient", c.env.penalty, b);
  read(n, "warmup_slots", c.env.warmup_slots, b);
  read(n, "idle_backhaul_power", c.system.idle_backhaul_power, b);
  if (n["feature_mode"]) {
    c.env.feature_mode =
        env::parse_feature_mode(n["feature_mode"].as<std::string>());
  }
  if (const auto ab = n["action_bounds"]) {
    check_keys(ab, "env.action_bounds", {"zeta", "kappa", "nu"});
    auto& bd = c.env.bounds;
    read_range(ab, "zeta", bd.zeta_lo, bd.zeta_hi);
    read_range(ab, "kappa", bd.kappa_lo, bd.kappa_hi);
    read_range(ab, "nu", bd.nu_lo, bd.nu_hi);
  }
}

void load_ppo(const YAML::Node& n, ppo::PpoHyper& h) {
  const std::string b = "ppo";
  check_keys(n, b,
             {"discount", "gae_lambda", "clip", "lr_actor", "lr_critic",
              "minibatch", "total_steps", "rollout_horizon",
              "epochs_per_update", "hidden", "init_log_std", "max_grad_norm",
              "entropy_coef", "normalize_advantages", "time_limit_bootstrap",
              "value_normalization", "lambda_return_targets", "optimizer"});
  read(n, "discount", h.discount, b);
  read(n, "gae_lambda", h.gae_lambda, b);
  read(n, "clip", h.clip, b);
  read(n, "lr_actor", h.lr_actor, b);
  read(n, "lr_critic", h.lr_critic, b);
  read(n, "minibatch", h.minibatch, b);
  read(n, "total_steps", h.total_steps, b);
  read(n, "rollout_horizon", h.rollout_horizon, b);
  read(n, "epochs_per_update", h.epochs_per_update, b);
  read(n, "hidden", h.hidden, b);
  read(n, "init_log_std", h.init_log_std, b);
  read(n, "max_grad_norm", h.max_grad_norm, b);
  read(n, "entropy_coef", h.entropy_coef, b);
  read(n, "normalize_advantages", h.normalize_advantages, b);
  read(n, "time_limit_bootstrap", h.time_limit_bootstrap, b);
  read(n, "value_normalization", h.value_normalization, b);
  read(n, "lambda_return_targets", h.lambda_return_targets, b);
  if (n["optimizer"]) {
    h.optimizer = ppo::parse_optimizer(n["optimizer"].as<std::string>());
  }
}

void load_experiment(const YAML::Node& n, ExperimentConfig& c) {
  const std::string b = "experiment";
  check_keys(n, b,
             {"kind", "scheme", "fixed_action", "grid", "pbt_values",
              "m_values", "eval_scenarios", "validate_cases",
              "validate_realizations", "output_dir", "master_seed"});
  if (n["kind"]) c.kind = parse_experiment_kind(n["kind"].as<std::string>());
  read(n, "scheme", c.scheme, b);
  if (const auto fa = n["fixed_action"]) {
    check_keys(fa, "experiment.fixed_action", {"zeta", "kappa", "nu"});
    read(fa, "zeta", c.fixed_action.zeta, b);
    read(fa, "kappa", c.fixed_action.kappa, b);
    read(fa, "nu", c.fixed_action.nu, b);
  }
  if (n["grid"]) c.grid = parse_grid(n["grid"].as<std::string>());
  read(n, "pbt_values", c.pbt_values, b);
  read(n, "m_values", c.m_values, b);
  read(n, "eval_scenarios", c.eval_scenarios, b);
  read(n, "validate_cases", c.validate_cases, b);
  read(n, "validate_realizations", c.validate_realizations, b);
  if (n["output_dir"]) c.output_dir = n["output_dir"].as<std::string>();
  read(n, "master_seed", c.master_seed, b);
}

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& s) {
  if (s == "train") return ExperimentKind::kTrain;
  if (s == "eval") return ExperimentKind::kEval;
  if (s == "oracle") return ExperimentKind::kOracle;
  if (s == "sweep_pbt") return ExperimentKind::kSweepPbt;
  if (s == "bench_runtime") return ExperimentKind::kBenchRuntime;
  if (s == "validate_se") return ExperimentKind::kValidateSe;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kTrain: return "train";
    case ExperimentKind::kEval: return "eval";
    case ExperimentKind::kOracle: return "oracle";
    case ExperimentKind::kSweepPbt: return "sweep_pbt";
    case ExperimentKind::kBenchRuntime: return "bench_runtime";
    case ExperimentKind::kValidateSe: return "validate_se";
  }
  return "?";
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw ConfigError("grid axis needs at least one point");
  if (count == 1) return {lo};
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  }
  v.back() = hi;
  return v;
}

Grid parse_grid(const std::string& spec) {
  Grid g;
  for (const auto& part : csv::split(spec, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ConfigError("bad grid term '" + part + "'");
    const std::string name = part.substr(0, eq);
    const auto fields = csv::split(part.substr(eq + 1), ':');
    std::vector<double> axis;
    if (fields.size() == 1) {
      axis = {to_number<double>(fields[0], "grid")};
    } else if (fields.size() == 3) {
      axis = linspace(to_number<double>(fields[0], "grid"),
                      to_number<double>(fields[1], "grid"),
                      to_number<int>(fields[2], "grid"));
    } else {
      throw ConfigError("grid axis must be lo:hi:count, got '" + part + "'");
    }
    if (name == "z") {
      g.zeta = axis;
    } else if (name == "k") {
      g.kappa = axis;
    } else if (name == "n") {
      g.nu = axis;
    } else {
      throw ConfigError("unknown grid axis '" + name + "'");
    }
  }
  if (g.zeta.empty() || g.kappa.empty() || g.nu.empty()) {
    throw ConfigError("grid must define z, k and n axes");
  }
  return g;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& f : csv::split(s, ',')) out.push_back(to_number<double>(f, "list"));
  if (out.empty()) throw ConfigError("empty value list");
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& f : csv::split(s, ',')) out.push_back(to_number<int>(f, "list"));
  if (out.empty()) throw ConfigError("empty value list");
  return out;
}

void ExperimentConfig::validate() const {
  system.validate();
  env.validate();
  ppo.validate();
  if (scheme != "proposed" && scheme != "drl_ao" && scheme != "drl_ap" &&
      scheme != "fixed") {
    throw ConfigError("unknown scheme '" + scheme + "'");
  }
  if (grid.size() == 0) throw ConfigError("grid must be nonempty");
  if (kind == ExperimentKind::kSweepPbt && pbt_values.empty()) {
    throw ConfigError("pbt_values must be nonempty");
  }
  for (double v : pbt_values) {
    if (!(v >= 0.0)) throw ConfigError("pbt_values must be >= 0");
  }
  if (kind == ExperimentKind::kBenchRuntime && m_values.empty()) {
    throw ConfigError("m_values must be nonempty");
  }
  for (int m : m_values) {
    if (m < 1) throw ConfigError("m_values must be >= 1");
  }
  if (eval_scenarios < 1) throw ConfigError("eval_scenarios must be >= 1");
  if (validate_cases < 1) throw ConfigError("validate_cases must be >= 1");
  if (validate_realizations < 1) {
    throw ConfigError("validate_realizations must be >= 1");
  }
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig c;
  if (root.IsNull()) {
    c.validate();
    return c;
  }
  check_keys(root, "<root>", {"system", "env", "ppo", "experiment"});
  try {
    if (root["system"]) load_system(root["system"], c.system);
    if (root["env"]) load_env(root["env"], c);
    if (root["ppo"]) load_ppo(root["ppo"], c.ppo);
    if (root["experiment"]) load_experiment(root["experiment"], c);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

}  // namespace cfee::harness
