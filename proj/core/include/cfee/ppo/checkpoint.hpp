#ifndef CFEE_PPO_CHECKPOINT_HPP_
#define CFEE_PPO_CHECKPOINT_HPP_

#include <filesystem>
#include <string>

#include "cfee/env.hpp"
#include "cfee/ppo/trainer.hpp"

namespace cfee::ppo {

/**
 * Everything needed to replay a trained agent.
 *
 * On disk: the 8-byte magic "CFEEPPO\0", a u32 version, a named-scalar
 * header (system, environment, hyperparameters, action space), the scheme
 * name, both architecture descriptors, the feature normalization statistics
 * and finally the actor parameters, log-std and critic parameters in
 * declaration order. Integers are little-endian u32/u64, reals
 * little-endian IEEE-754 doubles.
 */
struct Checkpoint {
  std::string scheme;
  SystemConfig system;
  env::EnvConfig env;
  PpoHyper hyper;
  GaussianPolicy policy;
  MlpParams critic;
  ValueNormalizer value_norm;
  env::FeatureNormalizer normalizer;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

/// Throws std::runtime_error on a bad magic, version or truncated file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cfee::ppo

#endif  // CFEE_PPO_CHECKPOINT_HPP_
