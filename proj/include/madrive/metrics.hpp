#pragma once

#include <string>
#include <vector>

#include "madrive/environment.hpp"

namespace madrive {

struct RunMetrics {
  int run = 0;
  double mean_reward = 0.0;  // per agent per step
  double mean_speed = 0.0;   // measured, per agent per step
  int track_exits = 0;       // off-track entry events
  int collisions = 0;        // collision entry events
  int lane_changes = 0;      // lane-change actions taken
};

struct MetricsAggregate {
  RunMetrics mean;  // counts as averages, stored in double-valued fields below
  double mean_reward_mean = 0.0, mean_reward_std = 0.0;
  double mean_speed_mean = 0.0, mean_speed_std = 0.0;
  double track_exits_mean = 0.0, track_exits_std = 0.0;
  double collisions_mean = 0.0, collisions_std = 0.0;
  double lane_changes_mean = 0.0, lane_changes_std = 0.0;
};

// recompute a run's metrics from its episode log; exits/collisions count
// 0 -> 1 transitions per agent, lane changes count l flags
RunMetrics metrics_from_log(const EpisodeLog& log, int run_index);

MetricsAggregate aggregate_metrics(const std::vector<RunMetrics>& runs);

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// per-run rows followed by `mean` and `std` summary rows
void write_metrics_csv(const std::vector<RunMetrics>& runs,
                       const std::string& path);
std::vector<RunMetrics> read_metrics_csv(const std::string& path);

}  // namespace madrive
