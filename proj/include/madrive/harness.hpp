#pragma once

#include <optional>
#include <string>
#include <vector>

#include "madrive/config.hpp"
#include "madrive/mappo.hpp"
#include "madrive/metrics.hpp"
#include "madrive/pseudo_real.hpp"

namespace madrive {

// policy under evaluation: either a trained bundle driven greedily or the
// rule-based baseline
struct EvalPolicy {
  const PolicyBundle* bundle = nullptr;  // null = rule-based
  RssParams rss;

  static EvalPolicy trained(const PolicyBundle& b) { return {&b, {}}; }
  static EvalPolicy rule_based(const RssParams& p) { return {nullptr, p}; }
};

struct EvalOptions {
  int runs = 30;
  std::uint64_t seed = 0;
  std::optional<PseudoRealProfile> pseudo_real;
  // when set, per-run episode logs are written as <dir>/run_XXX.csv
  std::string log_dir;
  int threads = 1;
};

// greedy evaluation: `runs` seeded episodes of max_steps under nominal
// actuation (plus the pseudo-real perturbation when given)
std::vector<RunMetrics> evaluate_policy(const TrackMap& track,
                                        const EnvConfig& env_config,
                                        const EvalPolicy& policy,
                                        const EvalOptions& options);

// single evaluation episode; returns the episode log
EpisodeLog evaluate_episode(const TrackMap& track, const EnvConfig& env_config,
                            const EvalPolicy& policy, std::uint64_t run_seed,
                            const std::optional<PseudoRealProfile>& pseudo_real);

void write_train_log_csv(const std::vector<UpdateStats>& log,
                         const std::string& path);

struct CompareEntry {
  std::string name;
  std::vector<RunMetrics> runs;
  MetricsAggregate aggregate;
};

struct CompareResult {
  std::vector<CompareEntry> entries;
  // ratios[i][j] = mean_reward_i / mean_reward_j
  std::vector<std::vector<double>> reward_ratios;
};

CompareResult compare_metrics(const std::vector<std::string>& csv_paths);
void write_compare_outputs(const CompareResult& result,
                           const std::string& out_prefix);
std::string format_compare_table(const CompareResult& result);

}  // namespace madrive
