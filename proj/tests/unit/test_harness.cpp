#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cfee/harness/config_file.hpp"
#include "cfee/harness/experiments.hpp"
#include "cfee/harness/parallel.hpp"
#include "test_helpers.hpp"

using namespace cfee;
using namespace cfee::harness;

namespace {

SystemConfig tiny() {
  SystemConfig s;
  s.num_aps = 6;
  s.num_users = 3;
  s.antennas = 4;
  s.tau_p = 3;
  return s;
}

ppo::Checkpoint untrained(Scheme scheme, const SystemConfig& sys) {
  Rng rng = make_rng(1);
  ppo::PpoHyper h;
  h.hidden = {8};
  env::EnvConfig ec;
  const int dim = sys.num_aps * sys.num_users;
  auto pol = ppo::GaussianPolicy::create(action_space_for(scheme, ec.bounds), dim,
                                         h.hidden, h.init_log_std, rng);
  auto critic = ppo::init_params({dim, h.hidden, 1}, rng, 1.0);
  auto norm = env::FeatureNormalizer::fit(sys, ec.feature_mode, 50, 2);
  return {to_string(scheme), sys, ec, h, pol, critic, {}, norm};
}

}  // namespace

TEST_SUITE("config_file") {

TEST_CASE("grid strings") {
  const auto g = parse_grid("z=0.05:1:20,k=0:4:17,n=0:4:17");
  CHECK(g.size() == 20 * 17 * 17);
  CHECK(g.zeta.front() == 0.05);
  CHECK(g.zeta.back() == 1.0);
  CHECK(g.kappa[1] == doctest::Approx(0.25));
  const auto one = parse_grid("z=0.5,k=1,n=2");
  CHECK(one.size() == 1);
  CHECK(one.nu[0] == 2.0);
  CHECK_THROWS_AS(parse_grid("z=0:1:3,k=0:1:3"), ConfigError);
  CHECK_THROWS_AS(parse_grid("z=0:1:0,k=0,n=0"), ConfigError);
  CHECK_THROWS_AS(parse_grid("q=1,k=0,n=0"), ConfigError);
}

TEST_CASE("linspace and lists") {
  CHECK(linspace(0.0, 1.0, 5) == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(parse_double_list("0,0.0625,0.125").size() == 3);
  CHECK(parse_int_list("20,40,60") == std::vector<int>{20, 40, 60});
  CHECK_THROWS_AS(parse_int_list("20,x"), ConfigError);
}

TEST_CASE("empty yaml keeps every default") {
  const auto c = parse_experiment_config("");
  CHECK(c.system.num_aps == 40);
  CHECK(c.ppo.discount == 0.99);
  CHECK(c.ppo.gae_lambda == 0.95);
  CHECK(c.env.episode_length == 200);
  CHECK(c.eval_scenarios == 100);
  CHECK(c.kind == ExperimentKind::kTrain);
}

TEST_CASE("yaml overrides land in the right blocks") {
  const auto c = parse_experiment_config(R"(
system:
  num_aps: 10
  num_users: 5
  antennas: 8
  p_bt_watts_per_gbps: 0.125
env:
  penalty_coefficient: 5
  idle_backhaul_power: true
  action_bounds:
    zeta: [0.1, 0.9]
ppo:
  hidden: [32, 16]
  optimizer: sgd
experiment:
  kind: sweep_pbt
  fixed_action: {zeta: 0.5, kappa: 1, nu: 2}
  grid: "z=0.1:0.9:5,k=0:2:3,n=1"
  master_seed: 42
)");
  CHECK(c.system.num_aps == 10);
  CHECK(c.system.p_bt_watts_per_gbps == 0.125);
  CHECK(c.system.idle_backhaul_power);
  CHECK(c.env.penalty == 5.0);
  CHECK(c.env.bounds.zeta_lo == 0.1);
  CHECK(c.env.bounds.zeta_hi == 0.9);
  CHECK(c.ppo.hidden == std::vector<int>{32, 16});
  CHECK(c.ppo.optimizer == ppo::OptimizerKind::kSgd);
  CHECK(c.kind == ExperimentKind::kSweepPbt);
  CHECK(c.fixed_action == alloc::Action{0.5, 1.0, 2.0});
  CHECK(c.grid.size() == 15);
  CHECK(c.master_seed == 42);
}

TEST_CASE("unknown keys and bad values are errors") {
  CHECK_THROWS_AS(parse_experiment_config("system:\n  num_ap: 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("sytem:\n  num_aps: 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("ppo:\n  discount: 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("experiment:\n  kind: dance\n"), ConfigError);
  CHECK_THROWS(parse_experiment_config("system: [1, 2"));
}

TEST_CASE("shipped configs load") {
  for (const char* name : {"default.yaml", "desk.yaml"}) {
    const auto path = std::filesystem::path(CFEE_SOURCE_DIR) / "configs" / name;
    INFO(path.string());
    CHECK_NOTHROW(load_experiment_config(path));
  }
  const auto desk =
      load_experiment_config(std::filesystem::path(CFEE_SOURCE_DIR) / "configs/desk.yaml");
  CHECK(desk.system.num_aps == 10);
  CHECK(desk.system.num_users == 5);
  CHECK(desk.system.antennas == 8);
  CHECK(desk.ppo.total_steps == 100000);
}

}  // TEST_SUITE

TEST_SUITE("harness") {

TEST_CASE("parallel_for covers every index once") {
  std::vector<int> hits(97, 0);
  parallel_for(97, 4, [&](long i) { ++hits[i]; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}

TEST_CASE("held-out seeds are distinct and stable") {
  CHECK(heldout_seed(1, 0) == heldout_seed(1, 0));
  CHECK(heldout_seed(1, 0) != heldout_seed(1, 1));
  CHECK(heldout_seed(1, 0) != heldout_seed(2, 0));
  const auto scs = heldout_scenarios(tiny(), 1, 3);
  CHECK(scs.size() == 3);
  CHECK(scs[0].seed == heldout_seed(1, 0));
}

TEST_CASE("scheme action spaces") {
  const alloc::ActionBounds b;
  CHECK(action_space_for(Scheme::kProposed, b).dim() == 3);
  CHECK(action_space_for(Scheme::kDrlAo, b).dim() == 1);
  CHECK(action_space_for(Scheme::kDrlAp, b).dim() == 2);
  CHECK_THROWS_AS(action_space_for(Scheme::kFixed, b), ConfigError);
  CHECK(parse_scheme("drl_ao") == Scheme::kDrlAo);
  CHECK_THROWS_AS(parse_scheme("sca"), ConfigError);
}

TEST_CASE("drl_ap keeps every AP on and drl_ao keeps every antenna on") {
  const auto sys = tiny();
  const auto scs = heldout_scenarios(sys, 3, 10);
  for (Scheme s : {Scheme::kDrlAp, Scheme::kDrlAo}) {
    const auto ck = untrained(s, sys);
    auto pol = ck.policy;
    pol.actor.layers.back().bias.setConstant(1.7);
    for (const auto& row : evaluate_policy(pol, ck.normalizer, scs, sys, 20.0)) {
      if (s == Scheme::kDrlAp) {
        CHECK(static_cast<int>(row.decision.active.size()) == sys.num_aps);
      } else {
        for (int m : row.decision.active) CHECK(row.decision.n_active[m] == sys.antennas);
      }
    }
  }
}

TEST_CASE("fixed (1, 0, 1) is the all-on equal-power reference") {
  const auto sys = tiny();
  const auto scs = heldout_scenarios(sys, 4, 5);
  for (const auto& row : evaluate_fixed({1.0, 0.0, 1.0}, scs, sys, 20.0)) {
    CHECK(static_cast<int>(row.decision.active.size()) == sys.num_aps);
    CHECK(row.decision.total_antennas() == sys.num_aps * sys.antennas);
    for (int m = 0; m < sys.num_aps; ++m) {
      const double v = row.decision.eta(m, 0);
      CHECK(row.decision.eta.row(m).isConstant(v, 1e-12));
    }
  }
}

TEST_CASE("single-point grid returns that point") {
  const auto sys = tiny();
  const auto sc = netgen::generate_scenario(sys, 1);
  const auto r = grid_search(sc, parse_grid("z=0.5,k=1.5,n=0.25"), sys, 20.0);
  CHECK(r.action == alloc::Action{0.5, 1.5, 0.25});
}

TEST_CASE("one dominant AP makes the smallest zeta optimal") {
  Positions aps(5, 2), users(3, 2);
  aps << 100, 100, 900, 900, 900, 100, 100, 900, 500, 900;
  users << 101, 100, 100, 102, 103, 103;
  auto sys = test::placed(aps, users, 4);
  sys.se_min = 0.0;
  const auto sc = netgen::generate_scenario(sys, 1);
  const auto scores = alloc::ap_scores(sc.beta);
  for (int m = 1; m < 5; ++m) CHECK(scores(0) > 100.0 * scores(m));
  const auto r = grid_search(sc, parse_grid("z=0.2:1:5,k=0,n=1"), sys, 20.0);
  CHECK(r.action.zeta == doctest::Approx(0.2));
  CHECK(r.decision.active == std::vector<int>{0});
}

TEST_CASE("oracle dominates every fixed member of the grid") {
  const auto sys = tiny();
  const auto scs = heldout_scenarios(sys, 5, 6);
  const auto grid = parse_grid("z=0.2:1:5,k=0:4:5,n=0:2:5");
  const auto best = grid_oracle(scs, grid, sys, 20.0);
  for (double z : grid.zeta)
    for (double k : {0.0, 2.0})
      for (double n : {0.0, 1.0}) {
        const auto fixed = evaluate_fixed({z, k, n}, scs, sys, 20.0);
        for (std::size_t i = 0; i < scs.size(); ++i) {
          CHECK(best[i].reward >= fixed[i].reward - 1e-12);
        }
      }
}

TEST_CASE("grid ties go to the lexicographically smallest action") {
  auto sys = tiny();
  sys.num_aps = 1;
  sys.antennas = 4;
  sys.area_side = 100.0;
  const auto sc = netgen::generate_scenario(sys, 2);
  // with one AP every zeta yields the same decision
  const auto r = grid_search(sc, parse_grid("z=1,k=0:2:3,n=1"), sys, 20.0);
  CHECK(r.action.kappa == 0.0);
  const auto rz = grid_search(sc, parse_grid("z=0.3:1:3,k=0,n=1"), sys, 20.0);
  CHECK(rz.action.zeta == doctest::Approx(0.3));
}

TEST_CASE("parallel evaluation matches serial") {
  const auto sys = tiny();
  const auto scs = heldout_scenarios(sys, 6, 12);
  const auto grid = parse_grid("z=0.2:1:3,k=0:2:3,n=0:2:3");
  CHECK(eval_csv(grid_oracle(scs, grid, sys, 20.0, 1)) ==
        eval_csv(grid_oracle(scs, grid, sys, 20.0, 3)));
}

TEST_CASE("summary statistics") {
  const auto s = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.stderr_mean == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(s.n == 4);
}

TEST_CASE("loglog slope recovers a power law") {
  std::vector<double> x{20, 40, 60, 80, 100}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 1.1));
  CHECK(loglog_slope(x, y) == doctest::Approx(1.1).epsilon(1e-12));
}

TEST_CASE("backhaul traffic power lowers EE for the same policy") {
  const auto sys = tiny();
  std::map<std::string, ppo::Checkpoint> agents;
  for (Scheme s : {Scheme::kProposed, Scheme::kDrlAo, Scheme::kDrlAp}) {
    agents.emplace(to_string(s), untrained(s, sys));
  }
  const auto rows = sweep_pbt(agents, {0.0, 0.25}, 1, 8);
  CHECK(rows.size() == 6);
  for (int i = 0; i < 3; ++i) {
    CHECK(rows[i].p_bt == 0.0);
    CHECK(rows[i + 3].scheme == rows[i].scheme);
    CHECK(rows[i].ee.mean > rows[i + 3].ee.mean);
  }
  CHECK(sweep_csv(rows).rfind("scheme,p_bt,mean_ee_mbits_per_joule,stderr,n\n", 0) == 0);
}

TEST_CASE("sweep rejects agents of mismatched size") {
  std::map<std::string, ppo::Checkpoint> agents;
  agents.emplace("proposed", untrained(Scheme::kProposed, tiny()));
  auto other = tiny();
  other.num_aps = 7;
  agents.emplace("drl_ao", untrained(Scheme::kDrlAo, other));
  CHECK_THROWS(sweep_pbt(agents, {0.0}, 1, 2));
}

TEST_CASE("closed-form validation on a few cases") {
  const auto v = validate_se(SystemConfig{}, 3, 20000, 1, true);
  CHECK(v.cases.size() == 4);
  CHECK(v.cases.back().num_users == 2);
  CHECK(v.cases.back().tau_p == 1);
  for (const auto& c : v.cases) {
    CHECK(c.num_aps <= 4);
    CHECK(c.num_users <= 3);
    CHECK(c.antennas <= 4);
  }
  CHECK(v.worst >= 0);
  const auto csv_text = validate_csv(v);
  CHECK(csv_text.rfind("case,seed,num_aps", 0) == 0);
}

TEST_CASE("runtime bench produces one row per M") {
  auto sys = tiny();
  ppo::PpoHyper h;
  h.hidden = {8};
  const auto rep = bench_runtime(sys, h, {6, 12}, 50, parse_grid("z=0.5,k=0:1:2,n=1"), 2, 1);
  CHECK(rep.rows.size() == 2);
  CHECK(rep.rows[1].num_aps == 12);
  CHECK(rep.rows[0].median_ms > 0.0);
  CHECK(rep.rows[0].p95_ms >= rep.rows[0].median_ms);
}

}  // TEST_SUITE
