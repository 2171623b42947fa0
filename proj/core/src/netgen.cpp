#include "cfee/netgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cfee/csv.hpp"

namespace cfee::netgen {

namespace {

constexpr std::uint64_t kPilotStream = 0x70696c6f74ULL;

}  // namespace

double path_loss_db(double d, const SystemConfig& cfg) {
  const double unit = cfg.path_loss_unit_m;
  const double d0 = cfg.d0 / unit;
  const double d1 = cfg.d1 / unit;
  const double dist = d / unit;
  if (dist > d1) return -cfg.path_loss_db - 35.0 * std::log10(dist);
  if (dist > d0) {
    return -cfg.path_loss_db - 15.0 * std::log10(d1) - 20.0 * std::log10(dist);
  }
  return -cfg.path_loss_db - 15.0 * std::log10(d1) - 20.0 * std::log10(d0);
}

double wrap_distance(Point p, Point q, double side) {
  auto axis = [side](double a, double b) {
    const double delta = std::abs(a - b);
    return std::min(delta, side - delta);
  };
  return std::hypot(axis(p.x, q.x), axis(p.y, q.y));
}

PilotAssignment assign_pilots(int num_users, int tau_p, std::uint64_t seed) {
  if (tau_p < 1) throw std::invalid_argument("assign_pilots: tau_p >= 1");
  PilotAssignment out;
  out.index.resize(num_users);
  if (num_users <= tau_p) {
    for (int k = 0; k < num_users; ++k) out.index[k] = k;
  } else {
    Rng rng = make_rng(seed);
    std::uniform_int_distribution<int> pick(0, tau_p - 1);
    for (int k = 0; k < num_users; ++k) out.index[k] = pick(rng);
  }
  out.xcorr.resize(num_users, num_users);
  for (int j = 0; j < num_users; ++j) {
    for (int k = 0; k < num_users; ++k) {
      out.xcorr(j, k) = out.index[j] == out.index[k] ? 1.0 : 0.0;
    }
  }
  return out;
}

Eigen::MatrixXd compute_gamma(const Eigen::MatrixXd& beta,
                              const Eigen::MatrixXd& xcorr, int tau_p,
                              double rho_p) {
  const double snr = tau_p * rho_p;
  // (beta * xcorr)(m, k) = sum_k' beta(m, k') |phi_k'^H phi_k|^2
  const Eigen::MatrixXd contamination = beta * xcorr;
  return (snr * beta.array().square() / (snr * contamination.array() + 1.0))
      .matrix();
}

Positions draw_positions(int n, double side, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, side);
  Positions p(n, 2);
  for (int i = 0; i < n; ++i) {
    p(i, 0) = u(rng);
    p(i, 1) = u(rng);
  }
  return p;
}

Eigen::MatrixXd draw_shadowing(int rows, int cols, double sigma_db, Rng& rng) {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(rows, cols);
  if (sigma_db <= 0.0) return z;
  std::normal_distribution<double> normal(0.0, sigma_db);
  for (int m = 0; m < rows; ++m) {
    for (int k = 0; k < cols; ++k) z(m, k) = normal(rng);
  }
  return z;
}

Scenario make_scenario(const SystemConfig& cfg, Positions aps, Positions users,
                       const Eigen::MatrixXd& shadow_db,
                       PilotAssignment pilots, std::uint64_t seed) {
  const int m_count = static_cast<int>(aps.rows());
  const int k_count = static_cast<int>(users.rows());
  Scenario sc;
  sc.beta.resize(m_count, k_count);
  for (int m = 0; m < m_count; ++m) {
    for (int k = 0; k < k_count; ++k) {
      const double d = wrap_distance({aps(m, 0), aps(m, 1)},
                                     {users(k, 0), users(k, 1)}, cfg.area_side);
      sc.beta(m, k) =
          std::pow(10.0, (path_loss_db(d, cfg) + shadow_db(m, k)) / 10.0);
    }
  }
  sc.gamma = compute_gamma(sc.beta, pilots.xcorr, cfg.tau_p, rho_p(cfg));
  sc.ap_positions = std::move(aps);
  sc.user_positions = std::move(users);
  sc.pilots = std::move(pilots);
  sc.seed = seed;
  return sc;
}

Scenario generate_scenario(const SystemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng = make_rng(seed);
  Positions aps;
  Positions users;
  Eigen::MatrixXd shadow;
  if (cfg.placement) {
    aps = cfg.placement->aps;
    users = cfg.placement->users;
    shadow = cfg.placement->zero_shadowing
                 ? Eigen::MatrixXd::Zero(cfg.num_aps, cfg.num_users)
                 : draw_shadowing(cfg.num_aps, cfg.num_users,
                                  cfg.shadow_sigma_db, rng);
  } else {
    aps = draw_positions(cfg.num_aps, cfg.area_side, rng);
    users = draw_positions(cfg.num_users, cfg.area_side, rng);
    shadow =
        draw_shadowing(cfg.num_aps, cfg.num_users, cfg.shadow_sigma_db, rng);
  }
  auto pilots =
      assign_pilots(cfg.num_users, cfg.tau_p, derive_seed(seed, kPilotStream));
  return make_scenario(cfg, std::move(aps), std::move(users), shadow,
                       std::move(pilots), seed);
}

Scenario generate_scenario(const SystemConfig& cfg, const Positions& aps,
                           std::uint64_t seed) {
  cfg.validate();
  if (aps.rows() != cfg.num_aps) {
    throw ConfigError("generate_scenario: AP grid size != num_aps");
  }
  Rng rng = make_rng(seed);
  Positions users = draw_positions(cfg.num_users, cfg.area_side, rng);
  Eigen::MatrixXd shadow =
      draw_shadowing(cfg.num_aps, cfg.num_users, cfg.shadow_sigma_db, rng);
  auto pilots =
      assign_pilots(cfg.num_users, cfg.tau_p, derive_seed(seed, kPilotStream));
  return make_scenario(cfg, aps, std::move(users), shadow, std::move(pilots),
                       seed);
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

void write_matrix(const std::filesystem::path& p, const Eigen::MatrixXd& a,
                  const char* name) {
  auto out = open_out(p);
  out << "ap,user," << name << '\n';
  for (int m = 0; m < a.rows(); ++m) {
    for (int k = 0; k < a.cols(); ++k) {
      out << m << ',' << k << ',' << csv::format(a(m, k)) << '\n';
    }
  }
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& p, const char* name,
                            int rows, int cols) {
  const auto t = csv::read(p);
  const auto cm = t.column("ap");
  const auto ck = t.column("user");
  const auto cv = t.column(name);
  if (t.rows.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::runtime_error("scenario: wrong entry count in " + p.string());
  }
  Eigen::MatrixXd a(rows, cols);
  for (const auto& r : t.rows) {
    a(std::stoi(r[cm]), std::stoi(r[ck])) = std::stod(r[cv]);
  }
  return a;
}

}  // namespace

void write_scenario(const Scenario& sc, const SystemConfig& cfg,
                    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "scenario_meta.csv");
    out << "seed,num_aps,num_users,antennas,tau_p,area_side\n";
    out << sc.seed << ',' << sc.num_aps() << ',' << sc.num_users() << ','
        << cfg.antennas << ',' << cfg.tau_p << ',' << csv::format(cfg.area_side)
        << '\n';
  }
  write_matrix(dir / "beta.csv", sc.beta, "beta");
  write_matrix(dir / "gamma.csv", sc.gamma, "gamma");
  {
    auto out = open_out(dir / "positions.csv");
    out << "kind,index,x,y,pilot\n";
    for (int m = 0; m < sc.num_aps(); ++m) {
      out << "ap," << m << ',' << csv::format(sc.ap_positions(m, 0)) << ','
          << csv::format(sc.ap_positions(m, 1)) << ",-1\n";
    }
    for (int k = 0; k < sc.num_users(); ++k) {
      out << "user," << k << ',' << csv::format(sc.user_positions(k, 0)) << ','
          << csv::format(sc.user_positions(k, 1)) << ','
          << sc.pilots.index[k] << '\n';
    }
  }
}

Scenario read_scenario(const std::filesystem::path& dir) {
  const auto meta = csv::read(dir / "scenario_meta.csv");
  if (meta.rows.size() != 1) {
    throw std::runtime_error("scenario: meta must have one row");
  }
  const auto& row = meta.rows.front();
  const int m_count = std::stoi(row[meta.column("num_aps")]);
  const int k_count = std::stoi(row[meta.column("num_users")]);

  Scenario sc;
  sc.seed = std::stoull(row[meta.column("seed")]);
  sc.beta = read_matrix(dir / "beta.csv", "beta", m_count, k_count);
  sc.gamma = read_matrix(dir / "gamma.csv", "gamma", m_count, k_count);
  sc.ap_positions.resize(m_count, 2);
  sc.user_positions.resize(k_count, 2);
  sc.pilots.index.assign(k_count, 0);

  const auto pos = csv::read(dir / "positions.csv");
  const auto ck = pos.column("kind");
  const auto ci = pos.column("index");
  const auto cx = pos.column("x");
  const auto cy = pos.column("y");
  const auto cp = pos.column("pilot");
  for (const auto& r : pos.rows) {
    const int i = std::stoi(r[ci]);
    if (r[ck] == "ap") {
      sc.ap_positions(i, 0) = std::stod(r[cx]);
      sc.ap_positions(i, 1) = std::stod(r[cy]);
    } else {
      sc.user_positions(i, 0) = std::stod(r[cx]);
      sc.user_positions(i, 1) = std::stod(r[cy]);
      sc.pilots.index[i] = std::stoi(r[cp]);
    }
  }
  sc.pilots.xcorr.resize(k_count, k_count);
  for (int j = 0; j < k_count; ++j) {
    for (int k = 0; k < k_count; ++k) {
      sc.pilots.xcorr(j, k) =
          sc.pilots.index[j] == sc.pilots.index[k] ? 1.0 : 0.0;
    }
  }
  return sc;
}

}  // namespace cfee::netgen
