#include <doctest.h>

#include <cmath>

#include "cfee/alloc.hpp"
#include "cfee/csv.hpp"
#include "cfee/perf.hpp"
#include "test_helpers.hpp"

using namespace cfee;

namespace {

// Independent scalar evaluation of the closed-form SINR.
Eigen::VectorXd oracle_se(const netgen::Scenario& sc,
                          const perf::AllocationDecision& dec,
                          const SystemConfig& cfg) {
  const int M = sc.num_aps(), K = sc.num_users();
  const double rho = rho_d(cfg);
  auto a = [&](int m, int j) {
    return std::sqrt(dec.eta(m, j)) * dec.n_active[m] * sc.gamma(m, j);
  };
  Eigen::VectorXd se(K);
  for (int k = 0; k < K; ++k) {
    double num = 0.0;
    for (int m = 0; m < M; ++m) num += a(m, k);
    num = rho * num * num;
    double pc = 0.0;
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      double s = 0.0;
      for (int m = 0; m < M; ++m) s += a(m, j) * sc.beta(m, k) / sc.beta(m, j);
      pc += sc.pilot_xcorr()(j, k) * s * s;
    }
    double bu = 0.0;
    for (int m = 0; m < M; ++m)
      for (int j = 0; j < K; ++j)
        bu += dec.n_active[m] * dec.eta(m, j) * sc.gamma(m, j) * sc.beta(m, k);
    const double sinr = num / (rho * pc + rho * bu + 1.0);
    se(k) = (1.0 - static_cast<double>(cfg.tau_p) / cfg.tau_c) * std::log2(1.0 + sinr);
  }
  return se;
}

struct Small {
  SystemConfig cfg;
  netgen::Scenario sc;
};

Small small_case(int M, int K, int N, std::uint64_t seed, int tau_p = 0) {
  Small s;
  s.cfg.num_aps = M;
  s.cfg.num_users = K;
  s.cfg.antennas = N;
  s.cfg.tau_p = tau_p > 0 ? tau_p : K;
  s.cfg.area_side = 1000.0 * std::sqrt(M / 40.0) + 60.0;
  s.sc = netgen::generate_scenario(s.cfg, seed);
  return s;
}

}  // namespace

TEST_SUITE("perf") {

TEST_CASE("single AP single user closed form by hand") {
  Positions ap(1, 2), ue(1, 2);
  ap << 0.0, 0.0;
  ue << 30.0, 40.0;  // 50 m, exactly d1
  auto cfg = test::placed(ap, ue, 4);
  const auto sc = netgen::generate_scenario(cfg, 1);
  perf::AllocationDecision dec{{0}, {4}, Eigen::MatrixXd::Constant(1, 1, 0.0)};
  dec.eta(0, 0) = 1.0 / (4 * sc.gamma(0, 0));
  const double rho = rho_d(cfg);
  const double beta = sc.beta(0, 0), gamma = sc.gamma(0, 0);
  // N gamma rho / (rho beta + 1) with eta = 1 / (N gamma)
  const double sinr = 4.0 * gamma * rho / (rho * beta + 1.0);
  const double expected = (199.0 / 200.0) * std::log2(1.0 + sinr);
  CHECK(perf::closed_form_se(sc, dec, cfg)(0) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("closed form matches the scalar oracle") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto s = small_case(6, 5, 3, seed, seed % 2 ? 5 : 2);
    const alloc::Action act{0.3 + 0.035 * seed, 0.2 * seed, 0.1 * seed};
    const auto dec = alloc::realize(act, s.sc, s.cfg.antennas);
    const auto got = perf::closed_form_se(s.sc, dec, s.cfg);
    const auto want = oracle_se(s.sc, dec, s.cfg);
    for (int k = 0; k < got.size(); ++k) {
      CHECK(test::rel_close(got(k), want(k), 1e-10));
    }
  }
}

TEST_CASE("closed form agrees with Monte Carlo on small instances") {
  struct P { int M, K, N, tau; };
  for (const P p : {P{2, 2, 2, 2}, P{3, 3, 4, 3}, P{4, 2, 1, 1}, P{2, 3, 4, 3}}) {
    auto s = small_case(p.M, p.K, p.N, 100 + p.M * 10 + p.K, p.tau);
    const auto dec = alloc::realize({1.0, 0.5, 0.7}, s.sc, p.N);
    const auto cf = perf::closed_form_se(s.sc, dec, s.cfg);
    const auto mc = perf::mc_se_oracle(s.sc, dec, s.cfg, 100000, 7);
    for (int k = 0; k < p.K; ++k) {
      INFO("M=" << p.M << " K=" << p.K << " N=" << p.N << " k=" << k);
      CHECK(test::rel_close(cf(k), mc(k), 0.03));
    }
  }
}

TEST_CASE("Monte Carlo is independent of the thread count") {
  auto s = small_case(3, 2, 2, 5);
  const auto dec = alloc::realize({1.0, 0.0, 1.0}, s.sc, 2);
  const auto a = perf::mc_se_oracle(s.sc, dec, s.cfg, 10000, 3, 1);
  const auto b = perf::mc_se_oracle(s.sc, dec, s.cfg, 10000, 3, 4);
  CHECK(a == b);
}

TEST_CASE("only the number of active antennas matters") {
  auto s = small_case(2, 2, 4, 17);
  const auto dec = alloc::realize({1.0, 2.0, 1.0}, s.sc, 4);
  std::vector<std::vector<bool>> last(2);
  for (int m = 0; m < 2; ++m) {
    last[m].assign(4, false);
    for (int n = 0; n < dec.n_active[m]; ++n) last[m][3 - n] = true;
  }
  const auto first = perf::mc_se_oracle(s.sc, dec, s.cfg, 100000, 11);
  const auto tail = perf::mc_se_oracle_masked(s.sc, dec, last, s.cfg, 100000, 11);
  for (int k = 0; k < 2; ++k) CHECK(test::rel_close(first(k), tail(k), 0.03));
  last[0].assign(4, true);
  if (dec.n_active[0] != 4) {
    CHECK_THROWS(perf::mc_se_oracle_masked(s.sc, dec, last, s.cfg, 10, 1));
  }
}

TEST_CASE("total power by hand") {
  auto s = small_case(3, 2, 4, 9);
  perf::AllocationDecision dec;
  dec.active = {0, 2};
  dec.n_active = {2, 0, 4};
  dec.eta = Eigen::MatrixXd::Zero(3, 2);
  dec.eta.row(0) << 0.5 / s.sc.gamma(0, 0), 0.0;
  dec.eta.row(2) << 0.0, 0.25 / s.sc.gamma(2, 1);
  const double se_sum = 3.0;
  // radiated: 1 W * N_m * load / 0.4, load = 0.5 and 0.25
  const double radiated = (2 * 0.5 + 4 * 0.25) / 0.4;
  const double circuit = 6 * 0.2;
  const double backhaul = 2 * (0.825 + 2e7 * 3.0 * 1e-9 * 0.25);
  CHECK(perf::total_power(dec, se_sum, s.sc, s.cfg) ==
        doctest::Approx(radiated + circuit + backhaul).epsilon(1e-12));
  s.cfg.idle_backhaul_power = true;
  CHECK(perf::total_power(dec, se_sum, s.sc, s.cfg) ==
        doctest::Approx(radiated + circuit + backhaul + 0.825).epsilon(1e-12));
}

TEST_CASE("energy efficiency definition") {
  CHECK(perf::energy_efficiency(2e7, 10.0, 20.0) == doctest::Approx(1e7));
  CHECK_THROWS_AS(perf::energy_efficiency(2e7, 10.0, 0.0), std::domain_error);
}

TEST_CASE("evaluate is consistent with its parts") {
  auto s = small_case(8, 4, 4, 3);
  const auto dec = alloc::realize({0.5, 1.0, 0.5}, s.sc, 4);
  const auto r = perf::evaluate(s.sc, dec, s.cfg);
  CHECK(r.se_sum == doctest::Approx(r.se_per_user.sum()));
  CHECK(r.ee_bits_per_joule ==
        doctest::Approx(s.cfg.bandwidth_hz * r.se_sum / r.p_total_watts));
  for (int k = 0; k < 4; ++k) {
    CHECK(r.qos_shortfall(k) == doctest::Approx(std::max(0.0, 1.0 - r.se_per_user(k))));
  }
}

TEST_CASE("realized decisions saturate the power budget") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = small_case(10, 5, 8, seed);
    const alloc::Action act{0.1 + 0.045 * seed, 0.2 * seed, 0.2 * seed};
    const auto dec = alloc::realize(act, s.sc, 8);
    const auto v = perf::check_feasibility(s.sc, dec, s.cfg);
    CHECK(v.antennas_ok);
    for (int m : dec.active) {
      CHECK(v.power_ok[m]);
      CHECK(std::abs(v.power_slack(m)) <= 1e-12 / dec.n_active[m]);
    }
  }
}

TEST_CASE("malformed decisions are rejected") {
  auto s = small_case(2, 2, 2, 1);
  auto dec = alloc::realize({1.0, 0.0, 1.0}, s.sc, 2);
  auto bad = dec;
  bad.n_active[0] = 3;
  CHECK_THROWS_AS(perf::closed_form_se(s.sc, bad, s.cfg), std::invalid_argument);
  bad = dec;
  bad.eta(0, 0) = -1.0;
  CHECK_THROWS_AS(perf::closed_form_se(s.sc, bad, s.cfg), std::invalid_argument);
  bad = dec;
  bad.active = {0};
  CHECK_THROWS_AS(perf::closed_form_se(s.sc, bad, s.cfg), std::invalid_argument);
  bad.active.clear();
  bad.n_active = {0, 0};
  CHECK_FALSE(perf::check_feasibility(s.sc, bad, s.cfg).feasible());
}

TEST_CASE("csv row matches header width") {
  auto s = small_case(2, 2, 2, 1);
  const auto dec = alloc::realize({1.0, 0.0, 1.0}, s.sc, 2);
  const auto r = perf::evaluate(s.sc, dec, s.cfg);
  const auto row = perf::csv_row(1, 1.0, 0.0, 1.0, dec, r);
  CHECK(csv::split(row).size() == csv::split(perf::csv_header()).size());
}

}  // TEST_SUITE
