#include "madrive/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace madrive {

RunMetrics metrics_from_log(const EpisodeLog& log, int run_index) {
  RunMetrics m;
  m.run = run_index;
  if (log.empty()) return m;

  int n_agents = 0;
  for (const LogRow& row : log) n_agents = std::max(n_agents, row.agent + 1);

  std::vector<int> prev_c(static_cast<size_t>(n_agents), 0);
  std::vector<int> prev_t(static_cast<size_t>(n_agents), 0);
  double reward_sum = 0.0;
  double speed_sum = 0.0;
  for (const LogRow& row : log) {
    reward_sum += row.reward;
    speed_sum += row.v;
    const size_t a = static_cast<size_t>(row.agent);
    if (row.c && !prev_c[a]) ++m.collisions;
    if (row.t && !prev_t[a]) ++m.track_exits;
    prev_c[a] = row.c;
    prev_t[a] = row.t;
    m.lane_changes += row.l;
  }
  m.mean_reward = reward_sum / static_cast<double>(log.size());
  m.mean_speed = speed_sum / static_cast<double>(log.size());
  return m;
}

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& std_dev) {
  const double n = static_cast<double>(xs.size());
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  std_dev = xs.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
}

}  // namespace

MetricsAggregate aggregate_metrics(const std::vector<RunMetrics>& runs) {
  MetricsAggregate agg;
  std::vector<double> rewards, speeds, exits, collisions, changes;
  for (const RunMetrics& m : runs) {
    rewards.push_back(m.mean_reward);
    speeds.push_back(m.mean_speed);
    exits.push_back(static_cast<double>(m.track_exits));
    collisions.push_back(static_cast<double>(m.collisions));
    changes.push_back(static_cast<double>(m.lane_changes));
  }
  mean_std(rewards, agg.mean_reward_mean, agg.mean_reward_std);
  mean_std(speeds, agg.mean_speed_mean, agg.mean_speed_std);
  mean_std(exits, agg.track_exits_mean, agg.track_exits_std);
  mean_std(collisions, agg.collisions_mean, agg.collisions_std);
  mean_std(changes, agg.lane_changes_mean, agg.lane_changes_std);
  return agg;
}

void write_metrics_csv(const std::vector<RunMetrics>& runs,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot write metrics file: " + path);
  out << "run,mean_reward,mean_speed,track_exits,collisions,lane_changes\n";
  char buf[256];
  for (const RunMetrics& m : runs) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%d,%d,%d\n", m.run,
                  m.mean_reward, m.mean_speed, m.track_exits, m.collisions,
                  m.lane_changes);
    out << buf;
  }
  const MetricsAggregate agg = aggregate_metrics(runs);
  std::snprintf(buf, sizeof(buf), "mean,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                agg.mean_reward_mean, agg.mean_speed_mean, agg.track_exits_mean,
                agg.collisions_mean, agg.lane_changes_mean);
  out << buf;
  std::snprintf(buf, sizeof(buf), "std,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                agg.mean_reward_std, agg.mean_speed_std, agg.track_exits_std,
                agg.collisions_std, agg.lane_changes_std);
  out << buf;
  if (!out) throw CsvError("write failed: " + path);
}

std::vector<RunMetrics> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open metrics file: " + path);
  std::vector<RunMetrics> runs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line.rfind("run,", 0) != 0) {
        throw CsvError(path + ":1: missing metrics header");
      }
      continue;
    }
    std::string cells = line;
    std::replace(cells.begin(), cells.end(), ',', ' ');
    std::istringstream ss(cells);
    std::string run_field;
    ss >> run_field;
    if (run_field == "mean" || run_field == "std") continue;  // summary rows
    RunMetrics m;
    try {
      m.run = std::stoi(run_field);
    } catch (const std::exception&) {
      throw CsvError(path + ":" + std::to_string(line_no) + ": bad run index '" +
                     run_field + "'");
    }
    if (!(ss >> m.mean_reward >> m.mean_speed >> m.track_exits >> m.collisions >>
          m.lane_changes)) {
      throw CsvError(path + ":" + std::to_string(line_no) + ": malformed row");
    }
    runs.push_back(m);
  }
  if (runs.empty()) throw CsvError(path + ": no metric rows");
  return runs;
}

}  // namespace madrive
