#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "madrive/environment.hpp"
#include "madrive/mlp.hpp"
#include "madrive/randomization.hpp"
#include "madrive/track.hpp"

namespace madrive {

struct TrainConfig {
  int episodes = 2000;
  double lr_actor = 5e-4;
  double lr_critic = 5e-4;
  int ppo_epochs = 15;
  double entropy_coef = 0.01;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double value_coef = 0.5;
  int minibatches = 4;
  double max_grad_norm = 10.0;
  int episodes_per_update = 4;
};

// shared actor + centralized critic + frozen-per-round input normalizers;
// one parameter set drives every agent
struct PolicyBundle {
  Mlp actor;   // observation -> 4 action logits
  Mlp critic;  // global state -> 1 value
  RunningNorm obs_norm;
  RunningNorm gs_norm;

  static PolicyBundle init(int obs_dim, int gs_dim, std::uint64_t seed);

  int obs_dim() const { return actor.spec().input_dim; }
  int gs_dim() const { return critic.spec().input_dim; }
};

// per (episode, step, agent) transition rows; row = (ep * steps + t) * n_agents + agent,
// global-state arrays are per step: step_row = ep * steps + t
struct RolloutBuffer {
  int episodes = 0;
  int steps = 0;
  int n_agents = 0;
  int obs_dim = 0;
  int gs_dim = 0;

  std::vector<double> obs;      // normalized, rows x obs_dim
  std::vector<double> raw_obs;  // rows x obs_dim
  std::vector<double> gs;       // normalized, step_rows x gs_dim
  std::vector<double> raw_gs;   // step_rows x gs_dim
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;  // per step
  std::vector<double> advantages;
  std::vector<double> returns;

  int rows() const { return episodes * steps * n_agents; }
  int step_rows() const { return episodes * steps; }
  void resize();

  std::span<const double> obs_row(int row) const {
    return {obs.data() + static_cast<size_t>(row) * obs_dim,
            static_cast<size_t>(obs_dim)};
  }
  std::span<const double> gs_row(int row) const {
    const int step_row = row / n_agents;
    return {gs.data() + static_cast<size_t>(step_row) * gs_dim,
            static_cast<size_t>(gs_dim)};
  }
};

// delta_t = r_t + gamma * V_{t+1} - V_t; A_t = delta_t + gamma * lambda * A_{t+1};
// returns = advantages + values; terminal sequences pass bootstrap_value = 0
void compute_gae(std::span<const double> rewards, std::span<const double> values,
                 double bootstrap_value, double gamma, double lambda,
                 std::span<double> advantages, std::span<double> returns);

// in-place mean-0 / std-1 over the whole buffer (epsilon 1e-8)
void normalize_advantages(RolloutBuffer& buffer);

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PpoStats {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double entropy = 0.0;
};

// clipped-surrogate PPO loss (actor + entropy + value terms) averaged over the
// given rows; optionally accumulates analytic gradients. Pure in the params,
// so it doubles as the target for finite-difference checks.
double ppo_loss(const Mlp& actor, const Mlp& critic, const RolloutBuffer& buffer,
                std::span<const int> rows, const TrainConfig& config,
                std::vector<double>* actor_grad, std::vector<double>* critic_grad,
                PpoStats* stats, int threads = 1);

// one full PPO update: ppo_epochs passes over shuffled minibatches
PpoStats ppo_update(PolicyBundle& policy, RolloutBuffer& buffer,
                    const TrainConfig& config, AdamOptimizer& actor_opt,
                    AdamOptimizer& critic_opt, Rng& shuffle_rng, int threads = 1);

// runs n_episodes with freshly sampled actuation profiles per episode; every
// episode is independently seeded from (master_seed, global episode index) so
// results are identical for any thread count
RolloutBuffer collect_rollouts(const TrackMap& track, const EnvConfig& env_config,
                               const PolicyBundle& policy,
                               const RandomizationLevel& level, int n_episodes,
                               std::uint64_t master_seed, int first_episode_index,
                               bool greedy, int threads = 1, double gamma = 0.99,
                               double gae_lambda = 0.95);

struct UpdateStats {
  int update = 0;
  int episodes_done = 0;
  double mean_reward = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double entropy = 0.0;
};

using ProgressFn = std::function<void(const UpdateStats&)>;

std::vector<UpdateStats> train(PolicyBundle& policy, const TrackMap& track,
                               const EnvConfig& env_config,
                               const TrainConfig& train_config,
                               const RandomizationLevel& level,
                               std::uint64_t seed, int threads = 1,
                               const ProgressFn& progress = nullptr);

// greedy action helpers
int argmax_action(std::span<const double> logits);
int sample_action(std::span<const double> probs, Rng& rng);

enum class CheckpointErrorKind { Io, Corrupt, VersionMismatch, DimensionMismatch };

struct CheckpointError : std::runtime_error {
  CheckpointErrorKind kind;
  CheckpointError(CheckpointErrorKind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
};

// binary format: magic, version, named sections (layout descriptor), then raw
// little-endian 64-bit floats; round-trips bit-exactly
void save_checkpoint(const PolicyBundle& policy, const std::string& path);
PolicyBundle load_checkpoint(const std::string& path);
// throws CheckpointError(DimensionMismatch) when the checkpoint does not fit
// the environment's dimensions
void validate_dims(const PolicyBundle& policy, int obs_dim, int gs_dim);

}  // namespace madrive
