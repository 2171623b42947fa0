#include "cfee/ppo/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

namespace cfee::ppo {

namespace {

constexpr char kMagic[8] = {'C', 'F', 'E', 'E', 'P', 'P', 'O', '\0'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void vec(const Eigen::VectorXd& v) {
    u64(static_cast<std::uint64_t>(v.size()));
    for (double x : v) f64(x);
  }

 private:
  void le(std::uint64_t v, int bytes) {
    char buf[8];
    for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(buf, bytes);
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::string str() {
    const auto n = u32();
    if (n > (1u << 20)) throw std::runtime_error("checkpoint: string too long");
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  Eigen::VectorXd vec() {
    const auto n = u64();
    if (n > (1ull << 32)) throw std::runtime_error("checkpoint: array too long");
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = f64();
    return v;
  }
  void read(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw std::runtime_error("checkpoint: truncated file");
    }
  }

 private:
  std::uint64_t le(int bytes) {
    unsigned char buf[8];
    read(reinterpret_cast<char*>(buf), static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::istream& in_;
};

struct Field {
  const char* name;
  std::function<double(const Checkpoint&)> get;
  std::function<void(Checkpoint&, double)> set;
};

template <typename T>
Field real(const char* name, T Checkpoint::*block, double T::*member) {
  return {name, [=](const Checkpoint& c) { return c.*block.*member; },
          [=](Checkpoint& c, double v) { c.*block.*member = v; }};
}

template <typename T, typename I>
Field integer(const char* name, T Checkpoint::*block, I T::*member) {
  return {name,
          [=](const Checkpoint& c) { return static_cast<double>(c.*block.*member); },
          [=](Checkpoint& c, double v) { c.*block.*member = static_cast<I>(v); }};
}

std::vector<Field> fields() {
  using S = SystemConfig;
  using E = env::EnvConfig;
  using H = PpoHyper;
  auto bound = [](const char* name, double alloc::ActionBounds::*member) {
    return Field{name,
                 [=](const Checkpoint& c) { return c.policy.space.bounds.*member; },
                 [=](Checkpoint& c, double v) { c.policy.space.bounds.*member = v; }};
  };
  auto flag = [](const char* name, int coord) {
    return Field{name,
                 [=](const Checkpoint& c) { return c.policy.space.free[coord] ? 1.0 : 0.0; },
                 [=](Checkpoint& c, double v) { c.policy.space.free[coord] = v != 0.0; }};
  };
  auto pin = [](const char* name, double alloc::Action::*member) {
    return Field{name,
                 [=](const Checkpoint& c) { return c.policy.space.pinned.*member; },
                 [=](Checkpoint& c, double v) { c.policy.space.pinned.*member = v; }};
  };
  return {
      integer("system.num_aps", &Checkpoint::system, &S::num_aps),
      integer("system.num_users", &Checkpoint::system, &S::num_users),
      integer("system.antennas", &Checkpoint::system, &S::antennas),
      real("system.area_side", &Checkpoint::system, &S::area_side),
      real("system.d0", &Checkpoint::system, &S::d0),
      real("system.d1", &Checkpoint::system, &S::d1),
      real("system.path_loss_db", &Checkpoint::system, &S::path_loss_db),
      real("system.path_loss_unit_m", &Checkpoint::system, &S::path_loss_unit_m),
      real("system.shadow_sigma_db", &Checkpoint::system, &S::shadow_sigma_db),
      real("system.bandwidth_hz", &Checkpoint::system, &S::bandwidth_hz),
      real("system.noise_figure_db", &Checkpoint::system, &S::noise_figure_db),
      integer("system.tau_c", &Checkpoint::system, &S::tau_c),
      integer("system.tau_p", &Checkpoint::system, &S::tau_p),
      real("system.p_down_watts", &Checkpoint::system, &S::p_down_watts),
      real("system.p_pilot_watts", &Checkpoint::system, &S::p_pilot_watts),
      real("system.alpha_amp", &Checkpoint::system, &S::alpha_amp),
      real("system.p_tc_watts", &Checkpoint::system, &S::p_tc_watts),
      real("system.p_fix_watts", &Checkpoint::system, &S::p_fix_watts),
      real("system.p_bt_watts_per_gbps", &Checkpoint::system, &S::p_bt_watts_per_gbps),
      real("system.se_min", &Checkpoint::system, &S::se_min),
      integer("system.idle_backhaul_power", &Checkpoint::system, &S::idle_backhaul_power),
      integer("env.episode_length", &Checkpoint::env, &E::episode_length),
      real("env.penalty_coefficient", &Checkpoint::env, &E::penalty),
      integer("env.warmup_slots", &Checkpoint::env, &E::warmup_slots),
      real("ppo.discount", &Checkpoint::hyper, &H::discount),
      real("ppo.gae_lambda", &Checkpoint::hyper, &H::gae_lambda),
      real("ppo.clip", &Checkpoint::hyper, &H::clip),
      real("ppo.lr_actor", &Checkpoint::hyper, &H::lr_actor),
      real("ppo.lr_critic", &Checkpoint::hyper, &H::lr_critic),
      integer("ppo.minibatch", &Checkpoint::hyper, &H::minibatch),
      integer("ppo.total_steps", &Checkpoint::hyper, &H::total_steps),
      integer("ppo.rollout_horizon", &Checkpoint::hyper, &H::rollout_horizon),
      integer("ppo.epochs_per_update", &Checkpoint::hyper, &H::epochs_per_update),
      real("ppo.init_log_std", &Checkpoint::hyper, &H::init_log_std),
      real("ppo.max_grad_norm", &Checkpoint::hyper, &H::max_grad_norm),
      real("ppo.entropy_coef", &Checkpoint::hyper, &H::entropy_coef),
      integer("ppo.normalize_advantages", &Checkpoint::hyper, &H::normalize_advantages),
      integer("ppo.time_limit_bootstrap", &Checkpoint::hyper, &H::time_limit_bootstrap),
      integer("ppo.value_normalization", &Checkpoint::hyper, &H::value_normalization),
      integer("ppo.lambda_return_targets", &Checkpoint::hyper, &H::lambda_return_targets),
      real("critic.return_mean", &Checkpoint::value_norm, &ValueNormalizer::mean),
      real("critic.return_m2", &Checkpoint::value_norm, &ValueNormalizer::m2),
      integer("critic.return_count", &Checkpoint::value_norm, &ValueNormalizer::count),
      bound("action.zeta_lo", &alloc::ActionBounds::zeta_lo),
      bound("action.zeta_hi", &alloc::ActionBounds::zeta_hi),
      bound("action.kappa_lo", &alloc::ActionBounds::kappa_lo),
      bound("action.kappa_hi", &alloc::ActionBounds::kappa_hi),
      bound("action.nu_lo", &alloc::ActionBounds::nu_lo),
      bound("action.nu_hi", &alloc::ActionBounds::nu_hi),
      flag("action.free_zeta", 0),
      flag("action.free_kappa", 1),
      flag("action.free_nu", 2),
      pin("action.pinned_zeta", &alloc::Action::zeta),
      pin("action.pinned_kappa", &alloc::Action::kappa),
      pin("action.pinned_nu", &alloc::Action::nu),
  };
}

void write_arch(Writer& w, const MlpArchitecture& a) {
  w.u32(static_cast<std::uint32_t>(a.input_dim));
  w.u32(static_cast<std::uint32_t>(a.hidden.size()));
  for (int h : a.hidden) w.u32(static_cast<std::uint32_t>(h));
  w.u32(static_cast<std::uint32_t>(a.output_dim));
}

MlpArchitecture read_arch(Reader& r) {
  MlpArchitecture a;
  a.input_dim = static_cast<int>(r.u32());
  const auto n = r.u32();
  if (n > 64) throw std::runtime_error("checkpoint: too many hidden layers");
  for (std::uint32_t i = 0; i < n; ++i) a.hidden.push_back(static_cast<int>(r.u32()));
  a.output_dim = static_cast<int>(r.u32());
  return a;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path.string());
  Writer w(out);
  out.write(kMagic, sizeof(kMagic));
  w.u32(kCheckpointVersion);

  const auto table = fields();
  w.u32(static_cast<std::uint32_t>(table.size()));
  for (const auto& f : table) {
    w.str(f.name);
    w.f64(f.get(ckpt));
  }
  w.str(ckpt.scheme);
  w.str(env::to_string(ckpt.env.feature_mode));
  w.str(to_string(ckpt.hyper.optimizer));

  write_arch(w, ckpt.policy.actor.arch);
  write_arch(w, ckpt.critic.arch);
  w.vec(ckpt.normalizer.mean);
  w.vec(ckpt.normalizer.stddev);
  w.vec(flatten(ckpt.policy.actor));
  w.vec(ckpt.policy.log_std);
  w.vec(flatten(ckpt.critic));
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  Reader r(in);
  char magic[8];
  r.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path.string());
  }
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version));
  }

  std::map<std::string, double> header;
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name = r.str();
    header[name] = r.f64();
  }
  Checkpoint ckpt;
  for (const auto& f : fields()) {
    const auto it = header.find(f.name);
    if (it == header.end()) {
      throw std::runtime_error(std::string("checkpoint: missing field ") + f.name);
    }
    f.set(ckpt, it->second);
  }
  ckpt.scheme = r.str();
  ckpt.env.feature_mode = env::parse_feature_mode(r.str());
  ckpt.hyper.optimizer = parse_optimizer(r.str());
  ckpt.env.bounds = ckpt.policy.space.bounds;

  const MlpArchitecture actor_arch = read_arch(r);
  const MlpArchitecture critic_arch = read_arch(r);
  ckpt.hyper.hidden = actor_arch.hidden;
  ckpt.normalizer.mode = ckpt.env.feature_mode;
  ckpt.normalizer.mean = r.vec();
  ckpt.normalizer.stddev = r.vec();

  ckpt.policy.actor = zero_params(actor_arch);
  unflatten(r.vec(), ckpt.policy.actor);
  ckpt.policy.log_std = r.vec();
  ckpt.critic = zero_params(critic_arch);
  unflatten(r.vec(), ckpt.critic);

  if (ckpt.policy.log_std.size() != ckpt.policy.space.dim() ||
      actor_arch.output_dim != ckpt.policy.space.dim() ||
      ckpt.normalizer.mean.size() != actor_arch.input_dim) {
    throw std::runtime_error("checkpoint: inconsistent dimensions");
  }
  ckpt.system.validate();
  return ckpt;
}

}  // namespace cfee::ppo
