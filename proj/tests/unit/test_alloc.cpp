#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cfee/alloc.hpp"
#include "test_helpers.hpp"

using namespace cfee;
using namespace cfee::alloc;

TEST_SUITE("alloc") {

TEST_CASE("scores are the per-AP mean over users") {
  Eigen::MatrixXd beta(2, 3);
  beta << 1, 2, 3, 4, 5, 9;
  const auto s = ap_scores(beta);
  CHECK(s(0) == doctest::Approx(2.0));
  CHECK(s(1) == doctest::Approx(6.0));
}

TEST_CASE("active count rounds half up and keeps at least one AP") {
  CHECK(active_count(0.5, 40) == 20);
  CHECK(active_count(0.05, 40) == 2);
  CHECK(active_count(0.0625, 40) == 3);  // 2.5 rounds up
  CHECK(active_count(0.01, 40) == 1);
  CHECK(active_count(1.0, 40) == 40);
  CHECK(active_count(0.3, 10) == 3);
}

TEST_CASE("selection picks the strongest APs in index order") {
  Eigen::VectorXd s(5);
  s << 0.1, 0.9, 0.5, 0.7, 0.2;
  CHECK(select_aps(s, 0.4) == std::vector<int>{1, 3});
  CHECK(select_aps(s, 1.0) == std::vector<int>{0, 1, 2, 3, 4});
  CHECK_THROWS(select_aps(s, 0.0));
  CHECK_THROWS(select_aps(s, 1.5));
}

TEST_CASE("selection ties go to the lower index") {
  const Eigen::VectorXd s = Eigen::VectorXd::Constant(6, 1.0);
  CHECK(select_aps(s, 0.5) == std::vector<int>{0, 1, 2});
}

TEST_CASE("selection is monotone in zeta") {
  Rng rng = make_rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd s(30);
  for (int i = 0; i < 30; ++i) s(i) = u(rng);
  std::vector<int> prev;
  for (int i = 1; i <= 20; ++i) {
    const auto cur = select_aps(s, i / 20.0);
    CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
    prev = cur;
  }
}

TEST_CASE("antenna counts by hand") {
  Eigen::VectorXd s(4);
  s << 1.0, 0.5, 0.25, 0.0;
  const std::vector<int> on{0, 1, 2};
  CHECK(allocate_antennas(s, on, 0.0, 20) == std::vector<int>{20, 20, 20, 0});
  // floor(1 + 19 * 0.5) = 10, floor(1 + 19 * 0.25) = 5
  CHECK(allocate_antennas(s, on, 1.0, 20) == std::vector<int>{20, 10, 5, 0});
  // floor(1 + 19 / 16) = 2
  CHECK(allocate_antennas(s, on, 4.0, 20) == std::vector<int>{20, 2, 1, 0});
  CHECK(allocate_antennas(s, on, 2.0, 1) == std::vector<int>{1, 1, 1, 0});
}

TEST_CASE("antenna counts survive tiny scores") {
  Eigen::VectorXd s(2);
  s << 1e-20, 1e-21;
  CHECK(allocate_antennas(s, {0, 1}, 1.0, 20) == std::vector<int>{20, 2});
}

TEST_CASE("antenna counts shrink as kappa grows") {
  Rng rng = make_rng(4);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Eigen::VectorXd s(10);
  for (int i = 0; i < 10; ++i) s(i) = u(rng);
  std::vector<int> on(10);
  std::iota(on.begin(), on.end(), 0);
  auto prev = allocate_antennas(s, on, 0.0, 16);
  for (double k = 0.25; k <= 4.0; k += 0.25) {
    const auto cur = allocate_antennas(s, on, k, 16);
    for (int m = 0; m < 10; ++m) {
      CHECK(cur[m] <= prev[m]);
      CHECK(cur[m] >= 1);
    }
    prev = cur;
  }
}

TEST_CASE("power with nu = 1 is uniform") {
  Eigen::MatrixXd g(1, 3);
  g << 1.0, 2.0, 5.0;
  const auto eta = allocate_power(g, {4}, {0}, 1.0);
  for (int k = 0; k < 3; ++k) CHECK(eta(0, k) == doctest::Approx(1.0 / (4 * 8.0)));
}

TEST_CASE("power with nu = 0 equalizes eta * gamma") {
  Eigen::MatrixXd g(1, 3);
  g << 1.0, 2.0, 5.0;
  const auto eta = allocate_power(g, {2}, {0}, 0.0);
  for (int k = 0; k < 3; ++k) {
    CHECK(eta(0, k) * g(0, k) == doctest::Approx(1.0 / 6.0));
  }
}

TEST_CASE("power with nu = 2 by hand") {
  Eigen::MatrixXd g(1, 2);
  g << 1.0, 3.0;
  // eta_k = gamma_k / (N sum gamma^2) = gamma_k / 10
  const auto eta = allocate_power(g, {1}, {0}, 2.0);
  CHECK(eta(0, 0) == doctest::Approx(0.1));
  CHECK(eta(0, 1) == doctest::Approx(0.3));
}

TEST_CASE("power is scale invariant in gamma at tiny magnitudes") {
  Eigen::MatrixXd g(1, 3);
  g << 1.0, 2.0, 5.0;
  const Eigen::MatrixXd tiny = g * 1e-18;
  for (double nu : {0.0, 0.5, 1.0, 4.0}) {
    const auto a = allocate_power(g, {3}, {0}, nu);
    const auto b = allocate_power(tiny, {3}, {0}, nu);
    CHECK((b * 1e-18).isApprox(a, 1e-12));
    CHECK(b.allFinite());
  }
}

TEST_CASE("inactive rows stay zero and the budget is exact") {
  SystemConfig cfg;
  const auto sc = netgen::generate_scenario(cfg, 5);
  const auto dec = realize({0.4, 1.5, 2.5}, sc, cfg.antennas);
  CHECK(dec.active.size() == 16);
  for (int m = 0; m < cfg.num_aps; ++m) {
    const bool on = std::binary_search(dec.active.begin(), dec.active.end(), m);
    if (!on) {
      CHECK(dec.eta.row(m).isZero());
      CHECK(dec.n_active[m] == 0);
    } else {
      const double load = dec.eta.row(m).dot(sc.gamma.row(m));
      CHECK(load * dec.n_active[m] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("bounds contain and clamp") {
  const ActionBounds b;
  CHECK(b.contains({0.5, 2.0, 2.0}));
  CHECK_FALSE(b.contains({0.01, 2.0, 2.0}));
  CHECK(b.clamp({2.0, -1.0, 9.0}) == Action{1.0, 0.0, 4.0});
}

TEST_CASE("invalid coefficients are rejected") {
  Eigen::VectorXd s = Eigen::VectorXd::Ones(2);
  CHECK_THROWS(allocate_antennas(s, {}, 1.0, 4));
  CHECK_THROWS(allocate_antennas(s, {0}, -1.0, 4));
  Eigen::MatrixXd g = Eigen::MatrixXd::Ones(1, 2);
  CHECK_THROWS(allocate_power(g, {1}, {0}, -0.5));
}

}  // TEST_SUITE
