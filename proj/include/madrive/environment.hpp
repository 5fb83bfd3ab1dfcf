#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "madrive/rng.hpp"
#include "madrive/track.hpp"
#include "madrive/vehicle.hpp"

namespace madrive {

enum class ActionId : int { Accelerate = 0, Brake = 1, ChangeLane = 2, NoOp = 3 };
inline constexpr int kNumActions = 4;

struct EnvConfig {
  int n_agents = 3;
  int n_parked = 3;
  int max_steps = 400;
  double dt = 0.1;
  double v_min = 0.1;
  std::vector<double> v_max = {0.3, 0.4, 0.5};  // per agent
  double accel = 0.25;
  double perception_radius = 1.0;
  double collision_radius = 0.09;
  std::uint64_t seed = 0;
  VehicleParams vehicle;

  double v_max_for(int agent) const {
    return v_max[static_cast<size_t>(agent) % v_max.size()];
  }
};

inline constexpr int kObservationDim = 9;

struct Observation {
  double steering_angle = 0.0;        // rad, toward the current goal point
  double lane_center_distance = 0.0;  // signed m to the current lane center
  double tangent_angle_error = 0.0;   // rad, heading minus lane tangent
  double dist_same_lane_ahead = 0.0;  // m, clamped at perception_radius
  double dist_opposite_lane_ahead = 0.0;
  double vel_same_lane_neighbor = 0.0;  // m/s, 0 when absent
  double vel_opposite_lane_neighbor = 0.0;
  double off_track = 0.0;  // {0, 1}
  double own_speed = 0.0;  // m/s, measured

  std::array<double, kObservationDim> to_array() const {
    return {steering_angle,          lane_center_distance,
            tangent_angle_error,     dist_same_lane_ahead,
            dist_opposite_lane_ahead, vel_same_lane_neighbor,
            vel_opposite_lane_neighbor, off_track,
            own_speed};
  }
};

struct RewardTerms {
  double v = 0.0;  // measured speed
  int c = 0;       // collision flag
  int t = 0;       // off-track flag
  int l = 0;       // lane-change flag
};

// exactly v - 5c - 5t - 0.5l
double compute_reward(const RewardTerms& terms);

struct StepResult {
  std::vector<Observation> observations;     // per agent
  std::vector<double> global_state;          // 9N + 4N
  std::vector<double> rewards;               // per agent
  std::vector<RewardTerms> terms;            // per agent
  bool done = false;
  int step = 0;
};

struct EnvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// snapshot of every car the observation builder needs; agents first, then
// parked cars
struct WorldView {
  const TrackMap* track = nullptr;
  std::vector<Pose> poses;
  std::vector<double> speeds;  // measured longitudinal speeds
  std::vector<int> lanes;
  int n_agents = 0;
  double perception_radius = 1.0;
};

// car i flagged iff its center is strictly closer than 2 * collision_radius
// to any other car
std::vector<int> detect_collisions(const std::vector<Pose>& poses,
                                   double collision_radius);

Observation build_observation(const WorldView& world, int agent,
                              const VehicleParams& params);

struct LogRow {
  int step = 0;
  int agent = 0;
  double x = 0.0, y = 0.0, theta = 0.0, v = 0.0;
  int action = 0;
  double reward = 0.0;
  int c = 0, t = 0, l = 0;
  int lane = 0;
};

using EpisodeLog = std::vector<LogRow>;

void write_episode_csv(const EpisodeLog& log, const std::string& path);
EpisodeLog read_episode_csv(const std::string& path);

class Environment {
 public:
  Environment(const TrackMap& track, EnvConfig config);

  // agents and parked cars spawn at distinct waypoints with pairwise gaps
  // > 3 * collision_radius; agent speeds start at v_min
  StepResult reset(const std::vector<ActuationProfile>& profiles,
                   std::uint64_t seed);

  StepResult step(const std::vector<ActionId>& actions);
  // skip_motion freezes the flagged agents' poses for this step (measured
  // speed 0); used by the pseudo-real jitter
  StepResult step(const std::vector<ActionId>& actions,
                  const std::vector<std::uint8_t>& skip_motion);

  bool done() const { return step_count_ >= config_.max_steps; }
  int step_count() const { return step_count_; }
  const EnvConfig& config() const { return config_; }
  const TrackMap& track() const { return track_; }
  const EpisodeLog& episode_log() const { return log_; }
  const VehicleState& agent_state(int i) const {
    return agents_[static_cast<size_t>(i)];
  }

  int observation_dim() const { return kObservationDim; }
  int global_state_dim() const { return (kObservationDim + 4) * config_.n_agents; }

 private:
  StepResult make_result(const std::vector<ActionId>* actions);
  WorldView world_view() const;

  TrackMap track_;
  EnvConfig config_;
  std::vector<VehicleState> agents_;
  std::vector<ActuationProfile> profiles_;
  std::vector<Pose> parked_;
  std::vector<int> parked_lanes_;
  std::vector<int> lane_change_flags_;
  Rng noise_rng_;
  int step_count_ = 0;
  bool initialized_ = false;
  EpisodeLog log_;
};

}  // namespace madrive
