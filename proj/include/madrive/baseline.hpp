#pragma once

#include "madrive/environment.hpp"

namespace madrive {

struct RssParams {
  double response_time = 0.1;  // s
  double max_accel = 0.25;     // m/s^2
  double min_brake = 0.25;     // m/s^2
  double max_brake = 0.25;     // m/s^2
};

// longitudinal safe following distance:
// max(0, v_r*rho + a_max*rho^2/2 + (v_r + rho*a_max)^2/(2*b_min) - v_f^2/(2*b_max))
double rss_safe_distance(double v_rear, double v_front, const RssParams& params);

// decision cascade: brake or change lane when the front gap is unsafe,
// accelerate when comfortably clear and below the speed limit, else hold.
// Observed distances are center-to-center, so the two-car footprint is
// subtracted before comparing against the RSS gap; a reading at
// perception_radius is the no-neighbor sentinel and counts as clear road.
ActionId rule_based_action(const Observation& obs, const VehicleState& state,
                           double v_max, const RssParams& params,
                           double footprint = 0.18,
                           double perception_radius = 1.0);

}  // namespace madrive
