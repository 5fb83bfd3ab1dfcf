#include "madrive/environment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace madrive {

double compute_reward(const RewardTerms& terms) {
  return terms.v - 5.0 * terms.c - 5.0 * terms.t - 0.5 * terms.l;
}

std::vector<int> detect_collisions(const std::vector<Pose>& poses,
                                   double collision_radius) {
  const size_t n = poses.size();
  std::vector<int> flags(n, 0);
  const double threshold = 2.0 * collision_radius;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (distance(poses[i].position(), poses[j].position()) < threshold) {
        flags[i] = 1;
        flags[j] = 1;
      }
    }
  }
  return flags;
}

Observation build_observation(const WorldView& world, int agent,
                              const VehicleParams& params) {
  const TrackMap& track = *world.track;
  const Pose& pose = world.poses[static_cast<size_t>(agent)];
  const int own_lane = world.lanes[static_cast<size_t>(agent)];
  const int other_lane = 1 - own_lane;

  Observation obs;
  const LaneProjection own_proj = project(track, own_lane, pose.position());
  const Vec2 goal = goal_point(track, own_lane, own_proj, params.lookahead);
  obs.steering_angle = steering_angle(pose, goal);
  obs.lane_center_distance = own_proj.lateral_offset;
  obs.tangent_angle_error = wrap_angle(pose.theta - own_proj.tangent_angle);

  // nearest car ahead per lane, by arc distance on that lane's ring
  const double radius = world.perception_radius;
  double best_dist[2] = {radius, radius};
  double best_vel[2] = {0.0, 0.0};
  const LaneProjection proj_on[2] = {project(track, 0, pose.position()),
                                     project(track, 1, pose.position())};
  const int n_cars = static_cast<int>(world.poses.size());
  for (int j = 0; j < n_cars; ++j) {
    if (j == agent) continue;
    const int car_lane = world.lanes[static_cast<size_t>(j)];
    const Ring& ring = track.lane(car_lane);
    const double arc_car =
        ring.project(world.poses[static_cast<size_t>(j)].position()).arc_position;
    double ahead = std::fmod(arc_car - proj_on[car_lane].arc_position,
                             ring.length());
    if (ahead < 0.0) ahead += ring.length();
    if (ahead <= radius && ahead < best_dist[car_lane]) {
      best_dist[car_lane] = ahead;
      best_vel[car_lane] = world.speeds[static_cast<size_t>(j)];
    }
  }
  obs.dist_same_lane_ahead = best_dist[own_lane];
  obs.vel_same_lane_neighbor = best_vel[own_lane];
  obs.dist_opposite_lane_ahead = best_dist[other_lane];
  obs.vel_opposite_lane_neighbor = best_vel[other_lane];

  obs.off_track = is_off_track(track, pose.position()) ? 1.0 : 0.0;
  obs.own_speed = world.speeds[static_cast<size_t>(agent)];
  return obs;
}

void write_episode_csv(const EpisodeLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw EnvError("cannot write episode log: " + path);
  out << "step,agent,x,y,theta,v,action,reward,c,t,l,lane\n";
  char buf[256];
  for (const LogRow& row : log) {
    std::snprintf(buf, sizeof(buf),
                  "%d,%d,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%d,%d,%d,%d\n",
                  row.step, row.agent, row.x, row.y, row.theta, row.v,
                  row.action, row.reward, row.c, row.t, row.l, row.lane);
    out << buf;
  }
  if (!out) throw EnvError("write failed: " + path);
}

EpisodeLog read_episode_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EnvError("cannot open episode log: " + path);
  EpisodeLog log;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;  // header
    LogRow row;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    if (!(ss >> row.step >> row.agent >> row.x >> row.y >> row.theta >>
          row.v >> row.action >> row.reward >> row.c >> row.t >> row.l >>
          row.lane)) {
      throw EnvError(path + ":" + std::to_string(line_no) +
                     ": malformed log row");
    }
    log.push_back(row);
  }
  return log;
}

Environment::Environment(const TrackMap& track, EnvConfig config)
    : track_(track), config_(std::move(config)) {
  if (config_.n_agents < 1) throw EnvError("n_agents must be >= 1");
  if (!(config_.dt > 0.0)) throw EnvError("dt must be positive");
  for (int i = 0; i < config_.n_agents; ++i) {
    if (config_.v_min > config_.v_max_for(i)) {
      throw EnvError("v_min must not exceed any agent's v_max");
    }
  }
}

StepResult Environment::reset(const std::vector<ActuationProfile>& profiles,
                              std::uint64_t seed) {
  if (static_cast<int>(profiles.size()) != config_.n_agents) {
    throw EnvError("need one actuation profile per agent");
  }
  profiles_ = profiles;
  Rng spawn_rng(derive_seed(seed, 0x5ead));
  noise_rng_ = Rng(derive_seed(seed, 0x701e));

  const int total = config_.n_agents + config_.n_parked;
  std::vector<Pose> placed;
  std::vector<int> placed_lanes;
  std::set<std::pair<int, int>> taken;  // (lane, waypoint index)
  const double min_gap = 3.0 * config_.collision_radius;
  for (int car = 0; car < total; ++car) {
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
      const int lane = static_cast<int>(spawn_rng.uniform_index(2));
      const Ring& ring = track_.lane(lane);
      const int idx =
          static_cast<int>(spawn_rng.uniform_index(static_cast<std::uint64_t>(ring.size())));
      if (taken.count({lane, idx})) continue;
      const Vec2 pos = ring.point(idx);
      bool clear = true;
      for (const Pose& other : placed) {
        if (distance(pos, other.position()) <= min_gap) {
          clear = false;
          break;
        }
      }
      if (!clear) continue;
      Pose pose{pos.x, pos.y, ring.tangent_at_waypoint(idx)};
      placed.push_back(pose);
      placed_lanes.push_back(lane);
      taken.insert({lane, idx});
      ok = true;
    }
    if (!ok) {
      throw EnvError("spawn failed after 1000 attempts: track too crowded");
    }
  }

  agents_.assign(static_cast<size_t>(config_.n_agents), VehicleState{});
  for (int i = 0; i < config_.n_agents; ++i) {
    VehicleState& st = agents_[static_cast<size_t>(i)];
    st.pose = placed[static_cast<size_t>(i)];
    st.lane_id = placed_lanes[static_cast<size_t>(i)];
    st.commanded_speed = config_.v_min;
    st.wheel_actual = {config_.v_min, config_.v_min};
    st.twist = forward_kinematics(st.wheel_actual, config_.vehicle.baseline);
  }
  parked_.assign(placed.begin() + config_.n_agents, placed.end());
  parked_lanes_.assign(placed_lanes.begin() + config_.n_agents,
                       placed_lanes.end());
  lane_change_flags_.assign(static_cast<size_t>(config_.n_agents), 0);
  step_count_ = 0;
  initialized_ = true;
  log_.clear();
  return make_result(nullptr);
}

StepResult Environment::step(const std::vector<ActionId>& actions) {
  return step(actions, {});
}

StepResult Environment::step(const std::vector<ActionId>& actions,
                             const std::vector<std::uint8_t>& skip_motion) {
  if (!initialized_) throw EnvError("step before reset");
  if (done()) throw EnvError("step on a finished episode");
  if (static_cast<int>(actions.size()) != config_.n_agents) {
    throw EnvError("need one action per agent");
  }

  // action semantics, fixed index order
  for (int i = 0; i < config_.n_agents; ++i) {
    VehicleState& st = agents_[static_cast<size_t>(i)];
    lane_change_flags_[static_cast<size_t>(i)] = 0;
    switch (actions[static_cast<size_t>(i)]) {
      case ActionId::Accelerate:
        st.commanded_speed = clamp(st.commanded_speed + config_.accel * config_.dt,
                                   config_.v_min, config_.v_max_for(i));
        break;
      case ActionId::Brake:
        st.commanded_speed = clamp(st.commanded_speed - config_.accel * config_.dt,
                                   config_.v_min, config_.v_max_for(i));
        break;
      case ActionId::ChangeLane:
        st.lane_id = 1 - st.lane_id;
        lane_change_flags_[static_cast<size_t>(i)] = 1;
        break;
      case ActionId::NoOp:
        break;
    }
  }

  // motion chain, fixed index order; parked cars never move
  const VehicleParams& vp = config_.vehicle;
  for (int i = 0; i < config_.n_agents; ++i) {
    VehicleState& st = agents_[static_cast<size_t>(i)];
    const ActuationProfile& profile = profiles_[static_cast<size_t>(i)];
    const double noise_draw =
        noise_rng_.normal(0.0, 1.0) * profile.steer_error_sigma;
    if (!skip_motion.empty() && skip_motion[static_cast<size_t>(i)]) {
      st.twist = {0.0, 0.0};
      continue;
    }
    const LaneProjection proj = project(track_, st.lane_id, st.pose.position());
    const Vec2 goal = goal_point(track_, st.lane_id, proj, vp.lookahead);
    const double alpha = steering_angle(st.pose, goal);
    const BodyTwist desired =
        steer_to_twist(alpha, st.commanded_speed, profile, noise_draw, vp);
    WheelCommand cmd = inverse_kinematics(desired, vp.baseline);
    cmd = apply_actuation(cmd, profile, vp.v_wheel_max);
    st.wheel_actual = motor_lag(st.wheel_actual, cmd, config_.dt, vp.tau);
    st.twist = forward_kinematics(st.wheel_actual, vp.baseline);
    st.pose = integrate_pose(st.pose, st.twist, config_.dt);
  }

  ++step_count_;
  return make_result(&actions);
}

WorldView Environment::world_view() const {
  WorldView world;
  world.track = &track_;
  world.n_agents = config_.n_agents;
  world.perception_radius = config_.perception_radius;
  const size_t total =
      static_cast<size_t>(config_.n_agents) + parked_.size();
  world.poses.reserve(total);
  world.speeds.reserve(total);
  world.lanes.reserve(total);
  for (int i = 0; i < config_.n_agents; ++i) {
    const VehicleState& st = agents_[static_cast<size_t>(i)];
    world.poses.push_back(st.pose);
    world.speeds.push_back(st.twist.v);
    world.lanes.push_back(st.lane_id);
  }
  for (size_t p = 0; p < parked_.size(); ++p) {
    world.poses.push_back(parked_[p]);
    world.speeds.push_back(0.0);
    world.lanes.push_back(parked_lanes_[p]);
  }
  return world;
}

StepResult Environment::make_result(const std::vector<ActionId>* actions) {
  const WorldView world = world_view();
  StepResult result;
  result.step = step_count_;
  result.done = done();
  result.observations.reserve(static_cast<size_t>(config_.n_agents));
  result.rewards.reserve(static_cast<size_t>(config_.n_agents));
  result.terms.reserve(static_cast<size_t>(config_.n_agents));

  const std::vector<int> collisions =
      detect_collisions(world.poses, config_.collision_radius);

  for (int i = 0; i < config_.n_agents; ++i) {
    const VehicleState& st = agents_[static_cast<size_t>(i)];
    Observation obs = build_observation(world, i, config_.vehicle);
    RewardTerms terms;
    terms.v = st.twist.v;
    terms.c = collisions[static_cast<size_t>(i)];
    terms.t = obs.off_track > 0.5 ? 1 : 0;
    terms.l = lane_change_flags_[static_cast<size_t>(i)];
    const double reward = compute_reward(terms);
    result.observations.push_back(obs);
    result.terms.push_back(terms);
    result.rewards.push_back(actions ? reward : 0.0);
  }

  // global state: all observations, then per-agent absolute (x, y, theta, v)
  result.global_state.reserve(static_cast<size_t>(global_state_dim()));
  for (const Observation& obs : result.observations) {
    const auto arr = obs.to_array();
    result.global_state.insert(result.global_state.end(), arr.begin(), arr.end());
  }
  for (int i = 0; i < config_.n_agents; ++i) {
    const VehicleState& st = agents_[static_cast<size_t>(i)];
    result.global_state.push_back(st.pose.x);
    result.global_state.push_back(st.pose.y);
    result.global_state.push_back(st.pose.theta);
    result.global_state.push_back(st.twist.v);
  }

  if (actions) {
    for (int i = 0; i < config_.n_agents; ++i) {
      const VehicleState& st = agents_[static_cast<size_t>(i)];
      LogRow row;
      row.step = step_count_ - 1;
      row.agent = i;
      row.x = st.pose.x;
      row.y = st.pose.y;
      row.theta = st.pose.theta;
      row.v = st.twist.v;
      row.action = static_cast<int>((*actions)[static_cast<size_t>(i)]);
      row.reward = result.rewards[static_cast<size_t>(i)];
      row.c = result.terms[static_cast<size_t>(i)].c;
      row.t = result.terms[static_cast<size_t>(i)].t;
      row.l = result.terms[static_cast<size_t>(i)].l;
      row.lane = st.lane_id;
      log_.push_back(row);
    }
  }
  return result;
}

}  // namespace madrive
