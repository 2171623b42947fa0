#include "cfee/perf.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <thread>

#include "cfee/csv.hpp"

namespace cfee::perf {

namespace {

using cplx = std::complex<double>;

constexpr long kChunk = 2048;
constexpr std::uint64_t kMcStream = 0x6d6f6e7465ULL;

struct ChunkSums {
  Eigen::VectorXcd desired;   // sum_t a_kk
  Eigen::MatrixXd power;      // (k, j): sum_t |a_kj|^2
};

}  // namespace

int AllocationDecision::total_antennas() const {
  int total = 0;
  for (int n : n_active) total += n;
  return total;
}

double PerfReport::min_se() const {
  return se_per_user.size() ? se_per_user.minCoeff() : 0.0;
}

int PerfReport::qos_violations() const {
  return static_cast<int>((qos_shortfall.array() > 0.0).count());
}

bool FeasibilityVerdict::feasible() const {
  auto all = [](const std::vector<bool>& v) {
    return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
  };
  return antennas_ok && all(qos_ok) && all(power_ok);
}

void validate_decision(const AllocationDecision& dec, int num_aps,
                       int num_users, int antennas) {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("invalid AllocationDecision: " + what);
  };
  if (static_cast<int>(dec.n_active.size()) != num_aps) fail("n_active size");
  if (dec.eta.rows() != num_aps || dec.eta.cols() != num_users) {
    fail("eta shape");
  }
  if (!dec.eta.allFinite()) fail("eta has non-finite entries");
  if ((dec.eta.array() < 0.0).any()) fail("eta has negative entries");
  std::vector<bool> is_active(num_aps, false);
  for (int m : dec.active) {
    if (m < 0 || m >= num_aps) fail("active index out of range");
    is_active[m] = true;
  }
  for (int m = 0; m < num_aps; ++m) {
    const int n = dec.n_active[m];
    if (is_active[m] ? (n < 1 || n > antennas) : n != 0) {
      fail("n_active out of range at AP " + std::to_string(m));
    }
  }
}

Eigen::VectorXd closed_form_se(const netgen::Scenario& sc,
                               const AllocationDecision& dec,
                               const SystemConfig& cfg) {
  const int m_count = sc.num_aps();
  const int k_count = sc.num_users();
  validate_decision(dec, m_count, k_count, cfg.antennas);
  if (!sc.beta.allFinite() || (sc.beta.array() <= 0.0).any() ||
      !sc.gamma.allFinite() || (sc.gamma.array() < 0.0).any()) {
    throw std::invalid_argument("closed_form_se: invalid beta/gamma");
  }
  const double rd = rho_d(cfg);

  Eigen::VectorXd n_m(m_count);
  for (int m = 0; m < m_count; ++m) n_m(m) = dec.n_active[m];

  // coherent(m, k) = sqrt(eta_mk) N_m gamma_mk
  const Eigen::MatrixXd coherent =
      (dec.eta.array().sqrt() * sc.gamma.array()).matrix();
  const Eigen::MatrixXd scaled = n_m.asDiagonal() * coherent;
  // load(m) = sum_j eta_mj gamma_mj
  const Eigen::VectorXd load =
      (dec.eta.array() * sc.gamma.array()).rowwise().sum().matrix();
  const Eigen::VectorXd weighted_load = (n_m.array() * load.array()).matrix();

  const double pre = prelog(cfg);
  Eigen::VectorXd se(k_count);
  for (int k = 0; k < k_count; ++k) {
    const double desired = scaled.col(k).sum();
    double contamination = 0.0;
    for (int j = 0; j < k_count; ++j) {
      const double xc = sc.pilots.xcorr(j, k);
      if (j == k || xc == 0.0) continue;
      const double s =
          (scaled.col(j).array() * sc.beta.col(k).array() /
           sc.beta.col(j).array())
              .sum();
      contamination += xc * s * s;
    }
    const double incoherent = sc.beta.col(k).dot(weighted_load);
    const double sinr =
        rd * desired * desired / (rd * contamination + rd * incoherent + 1.0);
    se(k) = pre * std::log2(1.0 + sinr);
  }
  return se;
}

namespace {

ChunkSums run_chunk(const netgen::Scenario& sc, const AllocationDecision& dec,
                    const std::vector<std::vector<bool>>& mask,
                    const SystemConfig& cfg, long count, std::uint64_t seed) {
  const int k_count = sc.num_users();
  const double snr_p = cfg.tau_p * rho_p(cfg);
  const double sqrt_snr_p = std::sqrt(snr_p);

  // Compact pilot ids.
  std::vector<int> group(k_count);
  int n_groups = 0;
  {
    std::vector<int> seen;
    for (int k = 0; k < k_count; ++k) {
      const int p = sc.pilots.index[k];
      auto it = std::find(seen.begin(), seen.end(), p);
      if (it == seen.end()) {
        seen.push_back(p);
        group[k] = n_groups++;
      } else {
        group[k] = static_cast<int>(it - seen.begin());
      }
    }
  }

  // MMSE scaling c_mk.
  const Eigen::MatrixXd contamination = sc.beta * sc.pilots.xcorr;
  const Eigen::MatrixXd c =
      (sqrt_snr_p * sc.beta.array() / (snr_p * contamination.array() + 1.0))
          .matrix();
  const Eigen::MatrixXd sqrt_beta = sc.beta.array().sqrt().matrix();
  const Eigen::MatrixXd sqrt_eta = dec.eta.array().sqrt().matrix();

  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  auto cn = [&] {
    const double re = normal(rng);
    const double im = normal(rng);
    return cplx(re, im);
  };

  ChunkSums sums{Eigen::VectorXcd::Zero(k_count),
                 Eigen::MatrixXd::Zero(k_count, k_count)};
  std::vector<cplx> g(k_count), ghat(k_count), pilot_sum(n_groups),
      noise(n_groups);
  Eigen::MatrixXcd u(k_count, k_count);
  Eigen::MatrixXcd a(k_count, k_count);

  for (long t = 0; t < count; ++t) {
    a.setZero();
    for (int m : dec.active) {
      u.setZero();
      // All N antennas are drawn; the mask selects which ones transmit.
      for (std::size_t n = 0; n < mask[m].size(); ++n) {
        std::fill(pilot_sum.begin(), pilot_sum.end(), cplx(0.0, 0.0));
        for (int k = 0; k < k_count; ++k) {
          g[k] = sqrt_beta(m, k) * cn();
          pilot_sum[group[k]] += g[k];
        }
        for (int p = 0; p < n_groups; ++p) noise[p] = cn();
        if (!mask[m][n]) continue;
        for (int k = 0; k < k_count; ++k) {
          ghat[k] = c(m, k) * (sqrt_snr_p * pilot_sum[group[k]] +
                               noise[group[k]]);
        }
        for (int k = 0; k < k_count; ++k) {
          for (int j = 0; j < k_count; ++j) {
            u(k, j) += g[k] * std::conj(ghat[j]);
          }
        }
      }
      for (int k = 0; k < k_count; ++k) {
        for (int j = 0; j < k_count; ++j) a(k, j) += sqrt_eta(m, j) * u(k, j);
      }
    }
    for (int k = 0; k < k_count; ++k) {
      sums.desired(k) += a(k, k);
      for (int j = 0; j < k_count; ++j) sums.power(k, j) += std::norm(a(k, j));
    }
  }
  return sums;
}

Eigen::VectorXd mc_impl(const netgen::Scenario& sc,
                        const AllocationDecision& dec,
                        const std::vector<std::vector<bool>>& mask,
                        const SystemConfig& cfg, long n_realizations,
                        std::uint64_t seed, int threads) {
  if (n_realizations < 1) {
    throw std::invalid_argument("mc_se_oracle: n_realizations >= 1");
  }
  const int k_count = sc.num_users();
  const long n_chunks = (n_realizations + kChunk - 1) / kChunk;
  std::vector<ChunkSums> results(n_chunks);

  std::atomic<long> next{0};
  auto worker = [&] {
    for (long i = next++; i < n_chunks; i = next++) {
      const long count = std::min(kChunk, n_realizations - i * kChunk);
      results[i] = run_chunk(sc, dec, mask, cfg, count,
                             derive_seed(seed, kMcStream, i));
    }
  };
  const int n_threads =
      std::max(1, std::min<int>(threads, static_cast<int>(n_chunks)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  Eigen::VectorXcd desired = Eigen::VectorXcd::Zero(k_count);
  Eigen::MatrixXd power = Eigen::MatrixXd::Zero(k_count, k_count);
  for (const auto& r : results) {
    desired += r.desired;
    power += r.power;
  }
  const double inv_n = 1.0 / static_cast<double>(n_realizations);
  desired *= inv_n;
  power *= inv_n;

  const double rd = rho_d(cfg);
  const double pre = prelog(cfg);
  Eigen::VectorXd se(k_count);
  for (int k = 0; k < k_count; ++k) {
    const double ds2 = rd * std::norm(desired(k));
    const double bu = rd * std::max(0.0, power(k, k) - std::norm(desired(k)));
    double ui = 0.0;
    for (int j = 0; j < k_count; ++j) {
      if (j != k) ui += rd * power(k, j);
    }
    se(k) = pre * std::log2(1.0 + ds2 / (bu + ui + 1.0));
  }
  return se;
}

}  // namespace

Eigen::VectorXd mc_se_oracle(const netgen::Scenario& sc,
                             const AllocationDecision& dec,
                             const SystemConfig& cfg, long n_realizations,
                             std::uint64_t seed, int threads) {
  validate_decision(dec, sc.num_aps(), sc.num_users(), cfg.antennas);
  std::vector<std::vector<bool>> mask(sc.num_aps());
  for (int m = 0; m < sc.num_aps(); ++m) {
    mask[m].assign(cfg.antennas, false);
    for (int n = 0; n < dec.n_active[m]; ++n) mask[m][n] = true;
  }
  return mc_impl(sc, dec, mask, cfg, n_realizations, seed, threads);
}

Eigen::VectorXd mc_se_oracle_masked(const netgen::Scenario& sc,
                                    const AllocationDecision& dec,
                                    const std::vector<std::vector<bool>>& mask,
                                    const SystemConfig& cfg,
                                    long n_realizations, std::uint64_t seed,
                                    int threads) {
  validate_decision(dec, sc.num_aps(), sc.num_users(), cfg.antennas);
  if (static_cast<int>(mask.size()) != sc.num_aps()) {
    throw std::invalid_argument("mc_se_oracle_masked: mask size != M");
  }
  for (int m = 0; m < sc.num_aps(); ++m) {
    const auto on = std::count(mask[m].begin(), mask[m].end(), true);
    if (static_cast<int>(mask[m].size()) != cfg.antennas ||
        on != dec.n_active[m]) {
      throw std::invalid_argument("mc_se_oracle_masked: mask must have N "
                                  "entries with N_m set");
    }
  }
  return mc_impl(sc, dec, mask, cfg, n_realizations, seed, threads);
}

double total_power(const AllocationDecision& dec, double se_sum,
                   const netgen::Scenario& sc, const SystemConfig& cfg) {
  if (!(se_sum >= 0.0)) throw std::invalid_argument("total_power: se_sum < 0");
  const double traffic_gbps = cfg.bandwidth_hz * se_sum * 1e-9;
  const double backhaul = cfg.p_fix_watts + traffic_gbps * cfg.p_bt_watts_per_gbps;
  double total = 0.0;
  for (int m : dec.active) {
    const double n_m = dec.n_active[m];
    const double load = dec.eta.row(m).dot(sc.gamma.row(m));
    // rho_d * N0 is the radiated power p_down
    total += cfg.p_down_watts * n_m * load / cfg.alpha_amp +
             n_m * cfg.p_tc_watts + backhaul;
  }
  if (cfg.idle_backhaul_power) {
    total += cfg.p_fix_watts *
             static_cast<double>(sc.num_aps() -
                                 static_cast<int>(dec.active.size()));
  }
  return total;
}

double energy_efficiency(double bandwidth_hz, double se_sum, double p_total) {
  if (!(p_total > 0.0)) {
    throw std::domain_error("energy_efficiency: zero total power (no active AP)");
  }
  return bandwidth_hz * se_sum / p_total;
}

PerfReport evaluate(const netgen::Scenario& sc, const AllocationDecision& dec,
                    const SystemConfig& cfg) {
  PerfReport r;
  r.se_per_user = closed_form_se(sc, dec, cfg);
  r.se_sum = r.se_per_user.sum();
  r.p_total_watts = total_power(dec, r.se_sum, sc, cfg);
  r.ee_bits_per_joule =
      energy_efficiency(cfg.bandwidth_hz, r.se_sum, r.p_total_watts);
  r.qos_shortfall = (cfg.se_min - r.se_per_user.array()).max(0.0).matrix();
  return r;
}

FeasibilityVerdict check_feasibility(const netgen::Scenario& sc,
                                     const AllocationDecision& dec,
                                     const SystemConfig& cfg) {
  const int m_count = sc.num_aps();
  const int k_count = sc.num_users();
  FeasibilityVerdict v;

  v.antennas_ok = !dec.active.empty() &&
                  static_cast<int>(dec.n_active.size()) == m_count;
  std::vector<bool> is_active(m_count, false);
  for (int m : dec.active) {
    if (m < 0 || m >= m_count) {
      v.antennas_ok = false;
    } else {
      is_active[m] = true;
    }
  }
  if (v.antennas_ok) {
    for (int m = 0; m < m_count; ++m) {
      const int n = dec.n_active[m];
      if (is_active[m] ? (n < 1 || n > cfg.antennas) : n != 0) {
        v.antennas_ok = false;
      }
    }
  }

  v.power_ok.assign(m_count, true);
  v.power_slack = Eigen::VectorXd::Zero(m_count);
  for (int m = 0; m < m_count && v.antennas_ok; ++m) {
    if (!is_active[m]) continue;
    const double budget = 1.0 / dec.n_active[m];
    const double load = dec.eta.row(m).dot(sc.gamma.row(m));
    v.power_slack(m) = budget - load;
    v.power_ok[m] = load <= budget * (1.0 + kPowerSlackTol);
  }

  v.qos_ok.assign(k_count, false);
  v.qos_slack = Eigen::VectorXd::Constant(k_count, -cfg.se_min);
  if (v.antennas_ok) {
    const Eigen::VectorXd se = closed_form_se(sc, dec, cfg);
    v.qos_slack = (se.array() - cfg.se_min).matrix();
    for (int k = 0; k < k_count; ++k) v.qos_ok[k] = se(k) >= cfg.se_min;
  }
  return v;
}

std::string csv_header() {
  return "seed,zeta,kappa,nu,active_aps,total_antennas,se_sum,p_total_watts,"
         "ee_mbits_per_joule,min_se,qos_violations";
}

std::string csv_row(std::uint64_t seed, double zeta, double kappa, double nu,
                    const AllocationDecision& dec, const PerfReport& report) {
  return csv::join({std::to_string(seed), csv::format(zeta), csv::format(kappa),
                    csv::format(nu), std::to_string(dec.active.size()),
                    std::to_string(dec.total_antennas()),
                    csv::format(report.se_sum),
                    csv::format(report.p_total_watts),
                    csv::format(report.ee_mbits_per_joule()),
                    csv::format(report.min_se()),
                    std::to_string(report.qos_violations())});
}

}  // namespace cfee::perf
