#include "madrive/baseline.hpp"

#include <algorithm>
#include <cmath>

namespace madrive {

double rss_safe_distance(double v_rear, double v_front,
                         const RssParams& params) {
  const double rho = params.response_time;
  const double v_reached = v_rear + rho * params.max_accel;
  const double d = v_rear * rho + 0.5 * params.max_accel * rho * rho +
                   v_reached * v_reached / (2.0 * params.min_brake) -
                   v_front * v_front / (2.0 * params.max_brake);
  return std::max(0.0, d);
}

ActionId rule_based_action(const Observation& obs, const VehicleState& state,
                           double v_max, const RssParams& params,
                           double footprint, double perception_radius) {
  const double own_v = obs.own_speed;
  const bool front_present = obs.dist_same_lane_ahead < perception_radius;
  const double front_gap = obs.dist_same_lane_ahead - footprint;
  const double safe_front =
      rss_safe_distance(own_v, obs.vel_same_lane_neighbor, params);

  if (front_present && front_gap < safe_front) {
    // Gipps-style gap acceptance: the target lane must be safe both toward
    // the car ahead and for the car behind; the single opposite-lane reading
    // stands in for both gaps
    const bool target_present = obs.dist_opposite_lane_ahead < perception_radius;
    const double target_gap = obs.dist_opposite_lane_ahead - footprint;
    const double target_front =
        rss_safe_distance(own_v, obs.vel_opposite_lane_neighbor, params);
    const double target_rear =
        rss_safe_distance(obs.vel_opposite_lane_neighbor, own_v, params);
    if (!target_present ||
        (target_gap > target_front && target_gap > target_rear)) {
      return ActionId::ChangeLane;
    }
    return ActionId::Brake;
  }
  if ((!front_present || front_gap > 2.0 * safe_front) &&
      state.commanded_speed < v_max) {
    return ActionId::Accelerate;
  }
  return ActionId::NoOp;
}

}  // namespace madrive
