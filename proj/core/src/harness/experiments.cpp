#include "cfee/harness/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cfee/csv.hpp"
#include "cfee/harness/parallel.hpp"

namespace cfee::harness {

namespace {

constexpr std::uint64_t kHeldoutStream = 0x68656c64ULL;
constexpr std::uint64_t kValidateStream = 0x76616c69ULL;
constexpr std::uint64_t kBenchStream = 0x62656e63ULL;

double percentile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

Scheme parse_scheme(const std::string& s) {
  if (s == "proposed") return Scheme::kProposed;
  if (s == "drl_ao") return Scheme::kDrlAo;
  if (s == "drl_ap") return Scheme::kDrlAp;
  if (s == "fixed") return Scheme::kFixed;
  throw ConfigError("unknown scheme '" + s + "'");
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kProposed: return "proposed";
    case Scheme::kDrlAo: return "drl_ao";
    case Scheme::kDrlAp: return "drl_ap";
    case Scheme::kFixed: return "fixed";
  }
  return "?";
}

ppo::ActionSpace action_space_for(Scheme scheme,
                                  const alloc::ActionBounds& bounds) {
  switch (scheme) {
    case Scheme::kProposed: return ppo::ActionSpace::proposed(bounds);
    case Scheme::kDrlAo: return ppo::ActionSpace::activation_only(bounds);
    case Scheme::kDrlAp: return ppo::ActionSpace::all_aps(bounds);
    case Scheme::kFixed: break;
  }
  throw ConfigError("the fixed scheme has no learned action space");
}

std::uint64_t heldout_seed(std::uint64_t master, int index) {
  return derive_seed(master, kHeldoutStream, static_cast<std::uint64_t>(index));
}

std::vector<netgen::Scenario> heldout_scenarios(const SystemConfig& sys,
                                                std::uint64_t master, int n) {
  std::vector<netgen::Scenario> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.push_back(netgen::generate_scenario(sys, heldout_seed(master, i)));
  }
  return out;
}

EvalRow evaluate_action(const alloc::Action& action,
                        const netgen::Scenario& sc, const SystemConfig& sys,
                        double penalty) {
  EvalRow row;
  row.seed = sc.seed;
  row.action = action;
  row.decision = alloc::realize(action, sc, sys.antennas);
  row.report = perf::evaluate(sc, row.decision, sys);
  row.reward = env::compute_reward(row.report, penalty);
  return row;
}

std::vector<EvalRow> evaluate_policy(const ppo::GaussianPolicy& policy,
                                     const env::FeatureNormalizer& normalizer,
                                     const std::vector<netgen::Scenario>& scs,
                                     const SystemConfig& sys, double penalty,
                                     int threads) {
  std::vector<EvalRow> rows(scs.size());
  parallel_for(static_cast<long>(scs.size()), threads, [&](long i) {
    const auto& sc = scs[static_cast<std::size_t>(i)];
    const alloc::Action a = policy.deterministic(normalizer.transform(sc.beta));
    rows[static_cast<std::size_t>(i)] = evaluate_action(a, sc, sys, penalty);
  });
  return rows;
}

std::vector<EvalRow> evaluate_fixed(const alloc::Action& action,
                                    const std::vector<netgen::Scenario>& scs,
                                    const SystemConfig& sys, double penalty,
                                    int threads) {
  std::vector<EvalRow> rows(scs.size());
  parallel_for(static_cast<long>(scs.size()), threads, [&](long i) {
    rows[static_cast<std::size_t>(i)] =
        evaluate_action(action, scs[static_cast<std::size_t>(i)], sys, penalty);
  });
  return rows;
}

EvalRow grid_search(const netgen::Scenario& sc, const Grid& grid,
                    const SystemConfig& sys, double penalty) {
  const auto zs = sorted(grid.zeta);
  const auto ks = sorted(grid.kappa);
  const auto ns = sorted(grid.nu);
  EvalRow best;
  bool have = false;
  for (double z : zs) {
    for (double k : ks) {
      for (double n : ns) {
        EvalRow r = evaluate_action({z, k, n}, sc, sys, penalty);
        if (!have || r.reward > best.reward) {
          best = std::move(r);
          have = true;
        }
      }
    }
  }
  return best;
}

std::vector<EvalRow> grid_oracle(const std::vector<netgen::Scenario>& scs,
                                 const Grid& grid, const SystemConfig& sys,
                                 double penalty, int threads) {
  std::vector<EvalRow> rows(scs.size());
  parallel_for(static_cast<long>(scs.size()), threads, [&](long i) {
    rows[static_cast<std::size_t>(i)] =
        grid_search(scs[static_cast<std::size_t>(i)], grid, sys, penalty);
  });
  return rows;
}

std::string eval_csv(const std::vector<EvalRow>& rows) {
  std::string out = perf::csv_header() + "\n";
  for (const auto& r : rows) {
    out += perf::csv_row(r.seed, r.action.zeta, r.action.kappa, r.action.nu,
                         r.decision, r.report);
    out += "\n";
  }
  return out;
}

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.n = static_cast<long>(xs.size());
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stderr_mean = std::sqrt(ss / static_cast<double>(s.n - 1) /
                              static_cast<double>(s.n));
  }
  return s;
}

std::vector<double> ee_values(const std::vector<EvalRow>& rows) {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.report.ee_mbits_per_joule());
  return v;
}

std::vector<double> rewards(const std::vector<EvalRow>& rows) {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.reward);
  return v;
}

BaselineOutcome run_baseline(
    Scheme scheme, const ExperimentConfig& cfg, std::uint64_t seed,
    const std::function<void(const ppo::TrainLogRow&)>& on_update,
    std::vector<double>* step_rewards) {
  BaselineOutcome out;
  out.scheme = scheme;
  if (scheme == Scheme::kFixed) {
    if (!cfg.env.bounds.contains(cfg.fixed_action)) {
      throw ConfigError("fixed_action lies outside the action bounds");
    }
    out.fixed = cfg.fixed_action;
    return out;
  }
  const auto space = action_space_for(scheme, cfg.env.bounds);
  auto result = ppo::train(cfg.system, cfg.env, space, cfg.ppo, seed, on_update);
  if (step_rewards) *step_rewards = std::move(result.step_rewards);
  out.checkpoint = ppo::Checkpoint{to_string(scheme), cfg.system, cfg.env,
                                   cfg.ppo,           std::move(result.policy),
                                   std::move(result.critic),
                                   result.value_norm,
                                   std::move(result.normalizer)};
  return out;
}

std::vector<SweepRow> sweep_pbt(
    const std::map<std::string, ppo::Checkpoint>& agents,
    const std::vector<double>& pbt_values, std::uint64_t master,
    int n_scenarios, int threads) {
  if (agents.empty()) throw ConfigError("sweep_pbt needs at least one agent");
  if (pbt_values.empty()) throw ConfigError("sweep_pbt needs P_bt values");
  const SystemConfig& ref = agents.begin()->second.system;
  for (const auto& [name, ck] : agents) {
    if (ck.system.num_aps != ref.num_aps ||
        ck.system.num_users != ref.num_users ||
        ck.system.antennas != ref.antennas) {
      throw ConfigError("agent '" + name + "' was trained on other dimensions");
    }
  }
  // Traffic power does not enter the channel statistics, so one scenario set
  // serves every P_bt value.
  const auto scs = heldout_scenarios(ref, master, n_scenarios);
  std::vector<SweepRow> rows;
  for (double pbt : pbt_values) {
    for (const auto& [name, ck] : agents) {
      SystemConfig sys = ck.system;
      sys.p_bt_watts_per_gbps = pbt;
      const auto evals = evaluate_policy(ck.policy, ck.normalizer, scs, sys,
                                         ck.env.penalty, threads);
      rows.push_back({name, pbt, summarize(ee_values(evals))});
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "scheme,p_bt,mean_ee_mbits_per_joule,stderr,n\n";
  for (const auto& r : rows) {
    out += csv::join({r.scheme, csv::format(r.p_bt), csv::format(r.ee.mean),
                      csv::format(r.ee.stderr_mean), std::to_string(r.ee.n)});
    out += "\n";
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("loglog_slope needs two or more points");
  }
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

BenchReport bench_runtime(const SystemConfig& sys, const ppo::PpoHyper& hyper,
                          const std::vector<int>& m_values, long calls,
                          const Grid& grid, int grid_calls, std::uint64_t seed) {
  using Clock = std::chrono::steady_clock;
  constexpr int kScenarios = 16;
  constexpr int kWarmupSlots = 50;
  struct Setup {
    SystemConfig sys;
    ppo::GaussianPolicy policy;
    env::FeatureNormalizer norm;
    std::vector<netgen::Scenario> scenarios;
    std::vector<double> lat;
  };
  std::vector<Setup> setups;
  for (int m : m_values) {
    SystemConfig s = sys;
    s.num_aps = m;
    s.placement.reset();
    const std::uint64_t mseed = derive_seed(seed, kBenchStream, static_cast<std::uint64_t>(m));
    Rng rng = make_rng(mseed);
    auto policy = ppo::GaussianPolicy::create(
        ppo::ActionSpace::proposed({}), m * s.num_users, hyper.hidden,
        hyper.init_log_std, rng);
    auto norm = env::FeatureNormalizer::fit(
        s, env::FeatureMode::kDbStandardized, kWarmupSlots, mseed);
    std::vector<netgen::Scenario> scs;
    for (int i = 0; i < kScenarios; ++i) {
      scs.push_back(netgen::generate_scenario(s, derive_seed(mseed, 1, i)));
    }
    setups.push_back({s, std::move(policy), std::move(norm), std::move(scs), {}});
  }

  // Round-robin over M so slow phases of the machine hit every size alike.
  int sink = 0;
  for (long c = 0; c < calls; ++c) {
    for (auto& st : setups) {
      const auto& sc = st.scenarios[static_cast<std::size_t>(c % kScenarios)];
      const auto t0 = Clock::now();
      const alloc::Action a = st.policy.deterministic(st.norm.transform(sc.beta));
      const auto dec = alloc::realize(a, sc, st.sys.antennas);
      const auto t1 = Clock::now();
      sink += dec.total_antennas();
      st.lat.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
  }

  BenchReport report;
  std::vector<double> ms, medians;
  for (auto& st : setups) {
    std::vector<double> glat;
    for (int c = 0; c < grid_calls; ++c) {
      const auto& sc = st.scenarios[static_cast<std::size_t>(c % kScenarios)];
      const auto t0 = Clock::now();
      const auto best = grid_search(sc, grid, st.sys, 20.0);
      const auto t1 = Clock::now();
      sink += best.decision.total_antennas();
      glat.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }

    BenchRow row;
    row.num_aps = st.sys.num_aps;
    row.num_users = st.sys.num_users;
    row.calls = calls;
    row.median_ms = percentile(st.lat, 0.5);
    row.p95_ms = percentile(st.lat, 0.95);
    row.grid_ms = glat.empty() ? 0.0 : percentile(glat, 0.5);
    report.rows.push_back(row);
    ms.push_back(row.num_aps);
    medians.push_back(row.median_ms);
  }
  if (sink < 0) report.rows.clear();  // keeps the work observable
  if (ms.size() >= 2) report.growth_exponent = loglog_slope(ms, medians);
  return report;
}

std::string bench_csv(const BenchReport& report) {
  std::string out = "num_aps,num_users,calls,median_ms,p95_ms,grid_ms,speedup\n";
  for (const auto& r : report.rows) {
    out += csv::join({std::to_string(r.num_aps), std::to_string(r.num_users),
                      std::to_string(r.calls), csv::format(r.median_ms),
                      csv::format(r.p95_ms), csv::format(r.grid_ms),
                      csv::format(r.speedup())});
    out += "\n";
  }
  return out;
}

bool SeValidation::passed() const {
  return std::all_of(cases.begin(), cases.end(),
                     [](const SeCase& c) { return c.passed; });
}

SeValidation validate_se(const SystemConfig& base, int n_cases,
                         long n_realizations, std::uint64_t master,
                         bool shared_pilot_case, int threads) {
  SeValidation out;
  const int total = n_cases + (shared_pilot_case ? 1 : 0);
  for (int i = 0; i < total; ++i) {
    const std::uint64_t seed =
        derive_seed(master, kValidateStream, static_cast<std::uint64_t>(i));
    Rng rng = make_rng(seed);
    std::uniform_int_distribution<int> m_dist(1, 4), k_dist(1, 3), n_dist(1, 4);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    SystemConfig s = base;
    s.placement.reset();
    do {
      s.num_aps = m_dist(rng);
      s.num_users = i == n_cases ? 2 : k_dist(rng);
      s.antennas = n_dist(rng);
    } while (s.num_aps * s.antennas <= s.num_users);
    s.tau_p = i == n_cases ? 1 : s.num_users;
    // Keep the AP density of the base deployment.
    s.area_side = base.area_side * std::sqrt(static_cast<double>(s.num_aps) /
                                             static_cast<double>(base.num_aps));
    s.validate();

    const auto sc = netgen::generate_scenario(s, derive_seed(seed, 1));
    const alloc::Action a{0.05 + 0.95 * u(rng), 4.0 * u(rng), 4.0 * u(rng)};
    const auto dec = alloc::realize(a, sc, s.antennas);

    SeCase c;
    c.index = i;
    c.seed = seed;
    c.num_aps = s.num_aps;
    c.num_users = s.num_users;
    c.antennas = s.antennas;
    c.tau_p = s.tau_p;
    c.closed_form = perf::closed_form_se(sc, dec, s);
    c.monte_carlo = perf::mc_se_oracle(sc, dec, s, n_realizations,
                                       derive_seed(seed, 2), threads);
    for (Eigen::Index k = 0; k < c.closed_form.size(); ++k) {
      const double cf = c.closed_form[k];
      const double mc = c.monte_carlo[k];
      const double gap = cf == 0.0 && mc == 0.0 ? 0.0 : std::abs(mc - cf) / std::abs(cf);
      c.max_rel_gap = std::max(c.max_rel_gap, gap);
    }
    c.passed = c.max_rel_gap <= kSeRelTol;
    if (out.worst < 0 ||
        c.max_rel_gap > out.cases[static_cast<std::size_t>(out.worst)].max_rel_gap) {
      out.worst = i;
    }
    out.cases.push_back(std::move(c));
  }
  return out;
}

std::string validate_csv(const SeValidation& v) {
  std::string out =
      "case,seed,num_aps,num_users,antennas,tau_p,user,closed_form_se,mc_se,"
      "rel_gap,passed\n";
  for (const auto& c : v.cases) {
    for (Eigen::Index k = 0; k < c.closed_form.size(); ++k) {
      const double cf = c.closed_form[k];
      const double mc = c.monte_carlo[k];
      const double gap = cf == 0.0 && mc == 0.0 ? 0.0 : std::abs(mc - cf) / std::abs(cf);
      out += csv::join({std::to_string(c.index), std::to_string(c.seed),
                        std::to_string(c.num_aps), std::to_string(c.num_users),
                        std::to_string(c.antennas), std::to_string(c.tau_p),
                        std::to_string(k), csv::format(cf), csv::format(mc),
                        csv::format(gap), gap <= kSeRelTol ? "1" : "0"});
      out += "\n";
    }
  }
  return out;
}

}  // namespace cfee::harness
