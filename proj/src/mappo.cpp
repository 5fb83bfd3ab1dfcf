#include "madrive/mappo.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <thread>

namespace madrive {

void RolloutBuffer::resize() {
  const size_t r = static_cast<size_t>(rows());
  const size_t s = static_cast<size_t>(step_rows());
  obs.assign(r * obs_dim, 0.0);
  raw_obs.assign(r * obs_dim, 0.0);
  gs.assign(s * gs_dim, 0.0);
  raw_gs.assign(s * gs_dim, 0.0);
  actions.assign(r, 0);
  log_probs.assign(r, 0.0);
  values.assign(r, 0.0);
  rewards.assign(r, 0.0);
  dones.assign(s, 0);
  advantages.assign(r, 0.0);
  returns.assign(r, 0.0);
}

PolicyBundle PolicyBundle::init(int obs_dim, int gs_dim, std::uint64_t seed) {
  PolicyBundle bundle;
  bundle.actor = Mlp({obs_dim, 64, 64, kNumActions});
  bundle.critic = Mlp({gs_dim, 64, 64, 1});
  Rng actor_rng(derive_seed(seed, 0xAC70));
  Rng critic_rng(derive_seed(seed, 0xC217));
  // small output layer keeps the initial policy near uniform
  bundle.actor.init_weights(actor_rng, 0.01);
  bundle.critic.init_weights(critic_rng, 1.0);
  bundle.obs_norm = RunningNorm(obs_dim);
  bundle.gs_norm = RunningNorm(gs_dim);
  return bundle;
}

void compute_gae(std::span<const double> rewards, std::span<const double> values,
                 double bootstrap_value, double gamma, double lambda,
                 std::span<double> advantages, std::span<double> returns) {
  const int n = static_cast<int>(rewards.size());
  double next_advantage = 0.0;
  double next_value = bootstrap_value;
  for (int t = n - 1; t >= 0; --t) {
    const double delta =
        rewards[static_cast<size_t>(t)] + gamma * next_value - values[static_cast<size_t>(t)];
    next_advantage = delta + gamma * lambda * next_advantage;
    advantages[static_cast<size_t>(t)] = next_advantage;
    returns[static_cast<size_t>(t)] =
        next_advantage + values[static_cast<size_t>(t)];
    next_value = values[static_cast<size_t>(t)];
  }
}

void normalize_advantages(RolloutBuffer& buffer) {
  const size_t n = buffer.advantages.size();
  double mean = 0.0;
  for (double a : buffer.advantages) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double a : buffer.advantages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(n);
  const double denom = std::sqrt(var) + 1e-8;
  for (double& a : buffer.advantages) a = (a - mean) / denom;
}

int argmax_action(std::span<const double> logits) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(logits.size()); ++i) {
    if (logits[static_cast<size_t>(i)] > logits[static_cast<size_t>(best)]) best = i;
  }
  return best;
}

int sample_action(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
    acc += probs[static_cast<size_t>(i)];
    if (u < acc) return i;
  }
  return static_cast<int>(probs.size()) - 1;
}

namespace {

// fixed bucket count keeps gradient reduction order independent of the
// thread count, so results are bit-identical for any parallelism
constexpr int kBuckets = 8;

struct BucketResult {
  double loss = 0.0;
  double pg = 0.0;
  double vf = 0.0;
  double ent = 0.0;
  std::vector<double> actor_grad;
  std::vector<double> critic_grad;
};

void run_bucket(const Mlp& actor, const Mlp& critic, const RolloutBuffer& buffer,
                std::span<const int> rows, const TrainConfig& config,
                bool want_grads, int begin, int end, BucketResult& out) {
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  MlpWorkspace actor_ws, critic_ws;
  std::vector<double> dlogits(static_cast<size_t>(kNumActions));
  if (want_grads) {
    out.actor_grad.assign(actor.params().size(), 0.0);
    out.critic_grad.assign(critic.params().size(), 0.0);
  }
  for (int k = begin; k < end; ++k) {
    const int row = rows[static_cast<size_t>(k)];
    const int action = buffer.actions[static_cast<size_t>(row)];
    const double advantage = buffer.advantages[static_cast<size_t>(row)];

    actor.forward(buffer.obs_row(row), actor_ws);
    const double lse = log_sum_exp(actor_ws.out);
    const double log_prob = actor_ws.out[static_cast<size_t>(action)] - lse;
    const double ratio =
        std::exp(log_prob - buffer.log_probs[static_cast<size_t>(row)]);
    const double clipped_ratio =
        clamp(ratio, 1.0 - config.clip_eps, 1.0 + config.clip_eps);
    const double surr1 = ratio * advantage;
    const double surr2 = clipped_ratio * advantage;
    const double pg = -std::min(surr1, surr2);

    std::vector<double> probs = softmax(actor_ws.out);
    double entropy = 0.0;
    for (int j = 0; j < kNumActions; ++j) {
      entropy += probs[static_cast<size_t>(j)] *
                 (actor_ws.out[static_cast<size_t>(j)] - lse);
    }
    entropy = -entropy;

    critic.forward(buffer.gs_row(row), critic_ws);
    const double value = critic_ws.out[0];
    const double vdiff = value - buffer.returns[static_cast<size_t>(row)];
    const double vf = config.value_coef * vdiff * vdiff;

    out.loss += (pg - config.entropy_coef * entropy + vf) * inv_n;
    out.pg += pg * inv_n;
    out.vf += vf * inv_n;
    out.ent += entropy * inv_n;

    if (!want_grads) continue;

    // d(pg)/d(ratio): zero when the clipped branch is active (ratio is then
    // outside the clip interval where clamp has zero slope)
    const double dpg_dratio = surr1 <= surr2 ? -advantage : 0.0;
    for (int j = 0; j < kNumActions; ++j) {
      const double onehot = j == action ? 1.0 : 0.0;
      const double p = probs[static_cast<size_t>(j)];
      const double log_p = actor_ws.out[static_cast<size_t>(j)] - lse;
      const double dratio = ratio * (onehot - p);
      const double dentropy = -p * (log_p + entropy);
      dlogits[static_cast<size_t>(j)] =
          (dpg_dratio * dratio - config.entropy_coef * dentropy) * inv_n;
    }
    actor.backward(actor_ws, dlogits, out.actor_grad);

    const double dvalue[1] = {config.value_coef * 2.0 * vdiff * inv_n};
    critic.backward(critic_ws, dvalue, out.critic_grad);
  }
}

}  // namespace

double ppo_loss(const Mlp& actor, const Mlp& critic, const RolloutBuffer& buffer,
                std::span<const int> rows, const TrainConfig& config,
                std::vector<double>* actor_grad, std::vector<double>* critic_grad,
                PpoStats* stats, int threads) {
  const int n = static_cast<int>(rows.size());
  const bool want_grads = actor_grad != nullptr;
  std::vector<BucketResult> buckets(kBuckets);

  auto worker = [&](int tid, int n_threads) {
    for (int b = tid; b < kBuckets; b += n_threads) {
      const int begin = static_cast<int>(static_cast<std::int64_t>(n) * b / kBuckets);
      const int end =
          static_cast<int>(static_cast<std::int64_t>(n) * (b + 1) / kBuckets);
      run_bucket(actor, critic, buffer, rows, config, want_grads, begin, end,
                 buckets[static_cast<size_t>(b)]);
    }
  };

  threads = std::max(1, std::min(threads, kBuckets));
  if (threads == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int tid = 0; tid < threads; ++tid) {
      pool.emplace_back(worker, tid, threads);
    }
    for (auto& th : pool) th.join();
  }

  double loss = 0.0;
  PpoStats agg;
  if (want_grads) {
    actor_grad->assign(actor.params().size(), 0.0);
    critic_grad->assign(critic.params().size(), 0.0);
  }
  for (const BucketResult& b : buckets) {
    loss += b.loss;
    agg.actor_loss += b.pg;
    agg.critic_loss += b.vf;
    agg.entropy += b.ent;
    if (want_grads && !b.actor_grad.empty()) {
      for (size_t i = 0; i < actor_grad->size(); ++i) {
        (*actor_grad)[i] += b.actor_grad[i];
      }
      for (size_t i = 0; i < critic_grad->size(); ++i) {
        (*critic_grad)[i] += b.critic_grad[i];
      }
    }
  }
  if (stats) *stats = agg;
  return loss;
}

PpoStats ppo_update(PolicyBundle& policy, RolloutBuffer& buffer,
                    const TrainConfig& config, AdamOptimizer& actor_opt,
                    AdamOptimizer& critic_opt, Rng& shuffle_rng, int threads) {
  normalize_advantages(buffer);
  const int n = buffer.rows();
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> actor_grad, critic_grad;
  PpoStats total;
  int batches = 0;
  for (int epoch = 0; epoch < config.ppo_epochs; ++epoch) {
    // Fisher-Yates with our own rng keeps the permutation portable
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(
          shuffle_rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
      std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }
    for (int mb = 0; mb < config.minibatches; ++mb) {
      const int begin = static_cast<int>(static_cast<std::int64_t>(n) * mb /
                                         config.minibatches);
      const int end = static_cast<int>(static_cast<std::int64_t>(n) * (mb + 1) /
                                       config.minibatches);
      PpoStats stats;
      const double loss = ppo_loss(
          policy.actor, policy.critic, buffer,
          std::span<const int>(order.data() + begin,
                               static_cast<size_t>(end - begin)),
          config, &actor_grad, &critic_grad, &stats, threads);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite PPO loss (epoch " + std::to_string(epoch) +
                           ", minibatch " + std::to_string(mb) + ")");
      }
      clip_grad_norm(actor_grad, config.max_grad_norm);
      clip_grad_norm(critic_grad, config.max_grad_norm);
      actor_opt.step(policy.actor.params(), actor_grad);
      critic_opt.step(policy.critic.params(), critic_grad);
      total.actor_loss += stats.actor_loss;
      total.critic_loss += stats.critic_loss;
      total.entropy += stats.entropy;
      ++batches;
    }
  }
  total.actor_loss /= batches;
  total.critic_loss /= batches;
  total.entropy /= batches;
  return total;
}

namespace {

void run_episode(const TrackMap& track, const EnvConfig& env_config,
                 const PolicyBundle& policy, const RandomizationLevel& level,
                 std::uint64_t master_seed, int global_episode, int slot,
                 bool greedy, double gamma, double gae_lambda,
                 RolloutBuffer& buffer) {
  const std::uint64_t episode_seed =
      derive_seed(master_seed, 0xE100 + static_cast<std::uint64_t>(global_episode));
  Rng profile_rng(derive_seed(episode_seed, 1));
  Rng action_rng(derive_seed(episode_seed, 2));
  const std::uint64_t env_seed = derive_seed(episode_seed, 3);

  const int n_agents = env_config.n_agents;
  std::vector<ActuationProfile> profiles;
  profiles.reserve(static_cast<size_t>(n_agents));
  for (int i = 0; i < n_agents; ++i) {
    profiles.push_back(sample_profile(level, profile_rng));
  }

  Environment env(track, env_config);
  StepResult result = env.reset(profiles, env_seed);

  MlpWorkspace actor_ws, critic_ws;
  std::vector<double> obs_scratch(static_cast<size_t>(buffer.obs_dim));
  std::vector<double> gs_scratch(static_cast<size_t>(buffer.gs_dim));
  std::vector<ActionId> actions(static_cast<size_t>(n_agents));

  const int steps = env_config.max_steps;
  for (int t = 0; t < steps; ++t) {
    const int step_row = slot * steps + t;
    // critic on the normalized global state, shared by all agents this step
    policy.gs_norm.normalize(result.global_state, gs_scratch);
    std::copy(result.global_state.begin(), result.global_state.end(),
              buffer.raw_gs.begin() + static_cast<size_t>(step_row) * buffer.gs_dim);
    std::copy(gs_scratch.begin(), gs_scratch.end(),
              buffer.gs.begin() + static_cast<size_t>(step_row) * buffer.gs_dim);
    policy.critic.forward(gs_scratch, critic_ws);
    const double value = critic_ws.out[0];

    for (int i = 0; i < n_agents; ++i) {
      const int row = step_row * n_agents + i;
      const auto raw = result.observations[static_cast<size_t>(i)].to_array();
      policy.obs_norm.normalize(raw, obs_scratch);
      std::copy(raw.begin(), raw.end(),
                buffer.raw_obs.begin() + static_cast<size_t>(row) * buffer.obs_dim);
      std::copy(obs_scratch.begin(), obs_scratch.end(),
                buffer.obs.begin() + static_cast<size_t>(row) * buffer.obs_dim);

      policy.actor.forward(obs_scratch, actor_ws);
      const double lse = log_sum_exp(actor_ws.out);
      int action;
      if (greedy) {
        action = argmax_action(actor_ws.out);
      } else {
        const std::vector<double> probs = softmax(actor_ws.out);
        action = sample_action(probs, action_rng);
      }
      buffer.actions[static_cast<size_t>(row)] = action;
      buffer.log_probs[static_cast<size_t>(row)] =
          actor_ws.out[static_cast<size_t>(action)] - lse;
      buffer.values[static_cast<size_t>(row)] = value;
      actions[static_cast<size_t>(i)] = static_cast<ActionId>(action);
    }

    result = env.step(actions);
    for (int i = 0; i < n_agents; ++i) {
      buffer.rewards[static_cast<size_t>(step_row * n_agents + i)] =
          result.rewards[static_cast<size_t>(i)];
    }
    buffer.dones[static_cast<size_t>(step_row)] = result.done ? 1 : 0;
  }

  // per-agent GAE; episodes terminate at max_steps, bootstrap 0
  std::vector<double> seq_rewards(static_cast<size_t>(steps));
  std::vector<double> seq_values(static_cast<size_t>(steps));
  std::vector<double> seq_adv(static_cast<size_t>(steps));
  std::vector<double> seq_ret(static_cast<size_t>(steps));
  for (int i = 0; i < n_agents; ++i) {
    for (int t = 0; t < steps; ++t) {
      const int row = (slot * steps + t) * n_agents + i;
      seq_rewards[static_cast<size_t>(t)] = buffer.rewards[static_cast<size_t>(row)];
      seq_values[static_cast<size_t>(t)] = buffer.values[static_cast<size_t>(row)];
    }
    compute_gae(seq_rewards, seq_values, 0.0, gamma, gae_lambda, seq_adv,
                seq_ret);
    for (int t = 0; t < steps; ++t) {
      const int row = (slot * steps + t) * n_agents + i;
      buffer.advantages[static_cast<size_t>(row)] = seq_adv[static_cast<size_t>(t)];
      buffer.returns[static_cast<size_t>(row)] = seq_ret[static_cast<size_t>(t)];
    }
  }
}

}  // namespace

RolloutBuffer collect_rollouts(const TrackMap& track, const EnvConfig& env_config,
                               const PolicyBundle& policy,
                               const RandomizationLevel& level, int n_episodes,
                               std::uint64_t master_seed, int first_episode_index,
                               bool greedy, int threads, double gamma,
                               double gae_lambda) {
  RolloutBuffer buffer;
  buffer.episodes = n_episodes;
  buffer.steps = env_config.max_steps;
  buffer.n_agents = env_config.n_agents;
  buffer.obs_dim = kObservationDim;
  buffer.gs_dim = (kObservationDim + 4) * env_config.n_agents;
  buffer.resize();

  threads = std::max(1, std::min(threads, n_episodes));
  if (threads == 1) {
    for (int e = 0; e < n_episodes; ++e) {
      run_episode(track, env_config, policy, level, master_seed,
                  first_episode_index + e, e, greedy, gamma, gae_lambda, buffer);
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int tid = 0; tid < threads; ++tid) {
      pool.emplace_back([&, tid]() {
        for (int e = tid; e < n_episodes; e += threads) {
          run_episode(track, env_config, policy, level, master_seed,
                      first_episode_index + e, e, greedy, gamma, gae_lambda,
                      buffer);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  return buffer;
}

std::vector<UpdateStats> train(PolicyBundle& policy, const TrackMap& track,
                               const EnvConfig& env_config,
                               const TrainConfig& train_config,
                               const RandomizationLevel& level,
                               std::uint64_t seed, int threads,
                               const ProgressFn& progress) {
  AdamOptimizer actor_opt(policy.actor.params().size(), train_config.lr_actor);
  AdamOptimizer critic_opt(policy.critic.params().size(), train_config.lr_critic);
  Rng shuffle_rng(derive_seed(seed, 0x5877));

  std::vector<UpdateStats> log;
  int episodes_done = 0;
  int update = 0;
  while (episodes_done < train_config.episodes) {
    const int n = std::min(train_config.episodes_per_update,
                           train_config.episodes - episodes_done);
    RolloutBuffer buffer = collect_rollouts(
        track, env_config, policy, level, n, seed, episodes_done, false, threads,
        train_config.gamma, train_config.gae_lambda);

    // running stats advance only between rounds; the buffer above used the
    // frozen pre-round statistics
    for (int row = 0; row < buffer.rows(); ++row) {
      policy.obs_norm.update(
          {buffer.raw_obs.data() + static_cast<size_t>(row) * buffer.obs_dim,
           static_cast<size_t>(buffer.obs_dim)});
    }
    for (int sr = 0; sr < buffer.step_rows(); ++sr) {
      policy.gs_norm.update(
          {buffer.raw_gs.data() + static_cast<size_t>(sr) * buffer.gs_dim,
           static_cast<size_t>(buffer.gs_dim)});
    }

    const PpoStats stats = ppo_update(policy, buffer, train_config, actor_opt,
                                      critic_opt, shuffle_rng, threads);
    episodes_done += n;
    ++update;

    double mean_reward = 0.0;
    for (double r : buffer.rewards) mean_reward += r;
    mean_reward /= static_cast<double>(buffer.rewards.size());

    UpdateStats entry{update, episodes_done, mean_reward, stats.actor_loss,
                      stats.critic_loss, stats.entropy};
    log.push_back(entry);
    if (progress) progress(entry);
  }
  return log;
}

namespace {

constexpr char kMagic[8] = {'M', 'A', 'D', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_f64(std::ofstream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t read_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw CheckpointError(CheckpointErrorKind::Corrupt, "truncated checkpoint");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double read_f64(std::ifstream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw CheckpointError(CheckpointErrorKind::Corrupt, "truncated checkpoint");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void write_section(std::ofstream& out, const std::string& name,
                   const std::vector<double>& payload) {
  write_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u32(out, static_cast<std::uint32_t>(payload.size()));
  for (double v : payload) write_f64(out, v);
}

std::pair<std::string, std::vector<double>> read_section(std::ifstream& in) {
  const std::uint32_t name_len = read_u32(in);
  if (name_len > 64) {
    throw CheckpointError(CheckpointErrorKind::Corrupt, "bad section name length");
  }
  std::string name(name_len, '\0');
  in.read(name.data(), name_len);
  if (!in) throw CheckpointError(CheckpointErrorKind::Corrupt, "truncated checkpoint");
  const std::uint32_t count = read_u32(in);
  if (count > (1u << 26)) {
    throw CheckpointError(CheckpointErrorKind::Corrupt, "bad section size");
  }
  std::vector<double> payload(count);
  for (std::uint32_t i = 0; i < count; ++i) payload[i] = read_f64(in);
  return {std::move(name), std::move(payload)};
}

std::vector<double> norm_payload(const RunningNorm& norm) {
  std::vector<double> payload;
  payload.push_back(norm.count());
  payload.insert(payload.end(), norm.mean().begin(), norm.mean().end());
  payload.insert(payload.end(), norm.m2().begin(), norm.m2().end());
  return payload;
}

void restore_norm(RunningNorm& norm, const std::vector<double>& payload, int dim) {
  if (static_cast<int>(payload.size()) != 1 + 2 * dim) {
    throw CheckpointError(CheckpointErrorKind::Corrupt, "bad normalizer section");
  }
  std::vector<double> mean(payload.begin() + 1, payload.begin() + 1 + dim);
  std::vector<double> m2(payload.begin() + 1 + dim, payload.end());
  norm = RunningNorm(dim);
  norm.restore(payload[0], std::move(mean), std::move(m2));
}

}  // namespace

void save_checkpoint(const PolicyBundle& policy, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError(CheckpointErrorKind::Io, "cannot write " + path);
  out.write(kMagic, 8);
  write_u32(out, kVersion);
  write_u32(out, 6);  // section count

  const MlpSpec& as = policy.actor.spec();
  const MlpSpec& cs = policy.critic.spec();
  write_section(out, "actor_spec",
                {static_cast<double>(as.input_dim), static_cast<double>(as.hidden1),
                 static_cast<double>(as.hidden2), static_cast<double>(as.output_dim)});
  write_section(out, "actor_params", policy.actor.params());
  write_section(out, "critic_spec",
                {static_cast<double>(cs.input_dim), static_cast<double>(cs.hidden1),
                 static_cast<double>(cs.hidden2), static_cast<double>(cs.output_dim)});
  write_section(out, "critic_params", policy.critic.params());
  write_section(out, "obs_norm", norm_payload(policy.obs_norm));
  write_section(out, "gs_norm", norm_payload(policy.gs_norm));
  if (!out) throw CheckpointError(CheckpointErrorKind::Io, "write failed: " + path);
}

PolicyBundle load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrorKind::Io, "cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw CheckpointError(CheckpointErrorKind::Corrupt, "bad checkpoint magic");
  }
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw CheckpointError(CheckpointErrorKind::VersionMismatch,
                          "unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t n_sections = read_u32(in);

  PolicyBundle bundle;
  MlpSpec actor_spec, critic_spec;
  std::vector<double> actor_params, critic_params, obs_norm, gs_norm;
  bool have[6] = {false, false, false, false, false, false};
  for (std::uint32_t s = 0; s < n_sections; ++s) {
    auto [name, payload] = read_section(in);
    if (name == "actor_spec" && payload.size() == 4) {
      actor_spec = {static_cast<int>(payload[0]), static_cast<int>(payload[1]),
                    static_cast<int>(payload[2]), static_cast<int>(payload[3])};
      have[0] = true;
    } else if (name == "actor_params") {
      actor_params = std::move(payload);
      have[1] = true;
    } else if (name == "critic_spec" && payload.size() == 4) {
      critic_spec = {static_cast<int>(payload[0]), static_cast<int>(payload[1]),
                     static_cast<int>(payload[2]), static_cast<int>(payload[3])};
      have[2] = true;
    } else if (name == "critic_params") {
      critic_params = std::move(payload);
      have[3] = true;
    } else if (name == "obs_norm") {
      obs_norm = std::move(payload);
      have[4] = true;
    } else if (name == "gs_norm") {
      gs_norm = std::move(payload);
      have[5] = true;
    }
  }
  for (bool h : have) {
    if (!h) throw CheckpointError(CheckpointErrorKind::Corrupt, "missing section");
  }
  if (static_cast<int>(actor_params.size()) != actor_spec.param_count() ||
      static_cast<int>(critic_params.size()) != critic_spec.param_count()) {
    throw CheckpointError(CheckpointErrorKind::Corrupt, "parameter count mismatch");
  }
  bundle.actor = Mlp(actor_spec);
  bundle.actor.params() = std::move(actor_params);
  bundle.critic = Mlp(critic_spec);
  bundle.critic.params() = std::move(critic_params);
  restore_norm(bundle.obs_norm, obs_norm, actor_spec.input_dim);
  restore_norm(bundle.gs_norm, gs_norm, critic_spec.input_dim);
  return bundle;
}

void validate_dims(const PolicyBundle& policy, int obs_dim, int gs_dim) {
  if (policy.obs_dim() != obs_dim || policy.gs_dim() != gs_dim ||
      policy.actor.spec().output_dim != kNumActions ||
      policy.critic.spec().output_dim != 1) {
    throw CheckpointError(
        CheckpointErrorKind::DimensionMismatch,
        "checkpoint dimensions (obs " + std::to_string(policy.obs_dim()) +
            ", state " + std::to_string(policy.gs_dim()) +
            ") do not match environment (obs " + std::to_string(obs_dim) +
            ", state " + std::to_string(gs_dim) + ")");
  }
}

}  // namespace madrive
