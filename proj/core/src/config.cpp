#include "cfee/config.hpp"

#include <cmath>

namespace cfee {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("invalid SystemConfig: ") + what);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void SystemConfig::validate() const {
  require(num_aps >= 1, "num_aps >= 1");
  require(num_users >= 1, "num_users >= 1");
  require(antennas >= 1, "antennas >= 1");
  require(static_cast<long>(num_aps) * antennas > num_users,
          "num_aps * antennas > num_users");
  require(area_side > 0.0 && d0 > 0.0 && d0 < d1 && d1 < area_side,
          "0 < d0 < d1 < area_side");
  require(path_loss_unit_m > 0.0, "path_loss_unit_m > 0");
  require(shadow_sigma_db >= 0.0, "shadow_sigma_db >= 0");
  require(bandwidth_hz > 0.0, "bandwidth_hz > 0");
  require(tau_p >= 1 && tau_p < tau_c, "1 <= tau_p < tau_c");
  require(alpha_amp > 0.0 && alpha_amp <= 1.0, "alpha_amp in (0, 1]");
  require(p_down_watts > 0.0 && p_pilot_watts > 0.0 && p_tc_watts > 0.0 &&
              p_fix_watts > 0.0,
          "powers > 0");
  require(p_bt_watts_per_gbps >= 0.0, "p_bt_watts_per_gbps >= 0");
  require(se_min >= 0.0, "se_min >= 0");
  if (placement) {
    require(placement->aps.rows() == num_aps, "placement rows == num_aps");
    require(placement->users.rows() == num_users,
            "placement rows == num_users");
    auto inside = [this](const Positions& p) {
      return (p.array() >= 0.0).all() && (p.array() < area_side).all();
    };
    require(inside(placement->aps) && inside(placement->users),
            "placement coordinates in [0, area_side)");
  }
}

double noise_power(const SystemConfig& cfg) {
  const double dbm =
      -174.0 + 10.0 * std::log10(cfg.bandwidth_hz) + cfg.noise_figure_db;
  return std::pow(10.0, dbm / 10.0) * 1e-3;
}

double rho_d(const SystemConfig& cfg) {
  return cfg.p_down_watts / noise_power(cfg);
}

double rho_p(const SystemConfig& cfg) {
  return cfg.p_pilot_watts / noise_power(cfg);
}

double prelog(const SystemConfig& cfg) {
  return static_cast<double>(cfg.tau_c - cfg.tau_p) / cfg.tau_c;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32)};
  return Rng(seq);
}

}  // namespace cfee
