#include "madrive/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "madrive/baseline.hpp"

namespace madrive {

EpisodeLog evaluate_episode(const TrackMap& track, const EnvConfig& env_config,
                            const EvalPolicy& policy, std::uint64_t run_seed,
                            const std::optional<PseudoRealProfile>& pseudo_real) {
  Environment env(track, env_config);
  // evaluation always runs nominal actuation; perturbations enter only
  // through the pseudo-real profile
  const std::vector<ActuationProfile> profiles(
      static_cast<size_t>(env_config.n_agents), nominal_profile());

  std::optional<PseudoRealEnv> wrapper;
  StepResult result;
  if (pseudo_real) {
    wrapper.emplace(env, *pseudo_real);
    result = wrapper->reset(profiles, run_seed);
  } else {
    result = env.reset(profiles, run_seed);
  }

  MlpWorkspace ws;
  std::vector<double> obs_scratch(static_cast<size_t>(kObservationDim));
  std::vector<ActionId> actions(static_cast<size_t>(env_config.n_agents));
  for (int t = 0; t < env_config.max_steps; ++t) {
    for (int i = 0; i < env_config.n_agents; ++i) {
      const Observation& obs = result.observations[static_cast<size_t>(i)];
      if (policy.bundle) {
        policy.bundle->obs_norm.normalize(obs.to_array(), obs_scratch);
        policy.bundle->actor.forward(obs_scratch, ws);
        actions[static_cast<size_t>(i)] =
            static_cast<ActionId>(argmax_action(ws.out));
      } else {
        actions[static_cast<size_t>(i)] = rule_based_action(
            obs, env.agent_state(i), env_config.v_max_for(i), policy.rss,
            2.0 * env_config.collision_radius, env_config.perception_radius);
      }
    }
    result = wrapper ? wrapper->step(actions) : env.step(actions);
  }
  return env.episode_log();
}

std::vector<RunMetrics> evaluate_policy(const TrackMap& track,
                                        const EnvConfig& env_config,
                                        const EvalPolicy& policy,
                                        const EvalOptions& options) {
  std::vector<RunMetrics> metrics(static_cast<size_t>(options.runs));
  std::vector<EpisodeLog> logs(static_cast<size_t>(options.runs));

  auto run_one = [&](int run) {
    const std::uint64_t run_seed =
        derive_seed(options.seed, 0xE7A1 + static_cast<std::uint64_t>(run));
    logs[static_cast<size_t>(run)] = evaluate_episode(
        track, env_config, policy, run_seed, options.pseudo_real);
    metrics[static_cast<size_t>(run)] =
        metrics_from_log(logs[static_cast<size_t>(run)], run);
  };

  const int threads = std::max(1, std::min(options.threads, options.runs));
  if (threads == 1) {
    for (int run = 0; run < options.runs; ++run) run_one(run);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int tid = 0; tid < threads; ++tid) {
      pool.emplace_back([&, tid]() {
        for (int run = tid; run < options.runs; run += threads) run_one(run);
      });
    }
    for (auto& th : pool) th.join();
  }

  if (!options.log_dir.empty()) {
    std::filesystem::create_directories(options.log_dir);
    char name[64];
    for (int run = 0; run < options.runs; ++run) {
      std::snprintf(name, sizeof(name), "run_%03d.csv", run);
      write_episode_csv(logs[static_cast<size_t>(run)],
                        (std::filesystem::path(options.log_dir) / name).string());
    }
  }
  return metrics;
}

void write_train_log_csv(const std::vector<UpdateStats>& log,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot write training log: " + path);
  out << "update,episode,mean_reward,actor_loss,critic_loss,entropy\n";
  char buf[256];
  for (const UpdateStats& row : log) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%.17g\n",
                  row.update, row.episodes_done, row.mean_reward, row.actor_loss,
                  row.critic_loss, row.entropy);
    out << buf;
  }
  if (!out) throw CsvError("write failed: " + path);
}

CompareResult compare_metrics(const std::vector<std::string>& csv_paths) {
  if (csv_paths.size() < 2) {
    throw CsvError("compare needs at least 2 metric files");
  }
  CompareResult result;
  for (const std::string& path : csv_paths) {
    CompareEntry entry;
    entry.name = std::filesystem::path(path).stem().string();
    entry.runs = read_metrics_csv(path);
    entry.aggregate = aggregate_metrics(entry.runs);
    result.entries.push_back(std::move(entry));
  }
  const size_t n = result.entries.size();
  result.reward_ratios.assign(n, std::vector<double>(n, 1.0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      result.reward_ratios[i][j] =
          result.entries[i].aggregate.mean_reward_mean /
          result.entries[j].aggregate.mean_reward_mean;
    }
  }
  return result;
}

std::string format_compare_table(const CompareResult& result) {
  std::ostringstream out;
  char buf[256];
  out << "policy                mean_reward       mean_speed        track_exits  "
         "collisions   lane_changes\n";
  for (const CompareEntry& e : result.entries) {
    const MetricsAggregate& a = e.aggregate;
    std::snprintf(buf, sizeof(buf),
                  "%-20s %8.4f ± %-6.4f %7.4f ± %-6.4f %5.2f ± %-5.2f %5.2f ± "
                  "%-5.2f %6.2f ± %-6.2f\n",
                  e.name.c_str(), a.mean_reward_mean, a.mean_reward_std,
                  a.mean_speed_mean, a.mean_speed_std, a.track_exits_mean,
                  a.track_exits_std, a.collisions_mean, a.collisions_std,
                  a.lane_changes_mean, a.lane_changes_std);
    out << buf;
  }
  out << "\nmean-reward ratios (row / column):\n";
  for (size_t i = 0; i < result.entries.size(); ++i) {
    out << result.entries[i].name << ":";
    for (size_t j = 0; j < result.entries.size(); ++j) {
      std::snprintf(buf, sizeof(buf), " %.4f", result.reward_ratios[i][j]);
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

void write_compare_outputs(const CompareResult& result,
                           const std::string& out_prefix) {
  {
    std::ofstream out(out_prefix + "_summary.csv");
    if (!out) throw CsvError("cannot write " + out_prefix + "_summary.csv");
    out << "policy,mean_reward,mean_reward_std,mean_speed,mean_speed_std,"
           "track_exits,track_exits_std,collisions,collisions_std,"
           "lane_changes,lane_changes_std\n";
    char buf[512];
    for (const CompareEntry& e : result.entries) {
      const MetricsAggregate& a = e.aggregate;
      std::snprintf(buf, sizeof(buf),
                    "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                    "%.17g\n",
                    e.name.c_str(), a.mean_reward_mean, a.mean_reward_std,
                    a.mean_speed_mean, a.mean_speed_std, a.track_exits_mean,
                    a.track_exits_std, a.collisions_mean, a.collisions_std,
                    a.lane_changes_mean, a.lane_changes_std);
      out << buf;
    }
  }
  {
    std::ofstream out(out_prefix + "_ratios.csv");
    if (!out) throw CsvError("cannot write " + out_prefix + "_ratios.csv");
    out << "policy";
    for (const CompareEntry& e : result.entries) out << "," << e.name;
    out << "\n";
    char buf[64];
    for (size_t i = 0; i < result.entries.size(); ++i) {
      out << result.entries[i].name;
      for (size_t j = 0; j < result.entries.size(); ++j) {
        std::snprintf(buf, sizeof(buf), ",%.17g", result.reward_ratios[i][j]);
        out << buf;
      }
      out << "\n";
    }
  }
  {
    // whitespace-separated columns for generic plotting tools
    std::ofstream out(out_prefix + "_plot.dat");
    if (!out) throw CsvError("cannot write " + out_prefix + "_plot.dat");
    out << "# policy mean_reward reward_std mean_speed speed_std track_exits "
           "exits_std collisions collisions_std lane_changes changes_std\n";
    char buf[512];
    for (const CompareEntry& e : result.entries) {
      const MetricsAggregate& a = e.aggregate;
      std::snprintf(buf, sizeof(buf),
                    "%s %.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g\n",
                    e.name.c_str(), a.mean_reward_mean, a.mean_reward_std,
                    a.mean_speed_mean, a.mean_speed_std, a.track_exits_mean,
                    a.track_exits_std, a.collisions_mean, a.collisions_std,
                    a.lane_changes_mean, a.lane_changes_std);
      out << buf;
    }
  }
}

}  // namespace madrive
