#pragma once

#include "madrive/geom.hpp"

namespace madrive {

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // (-pi, pi]

  Vec2 position() const { return {x, y}; }
};

struct BodyTwist {
  double v = 0.0;      // m/s, >= 0 in this environment
  double omega = 0.0;  // rad/s
};

struct WheelCommand {
  double v_left = 0.0;   // m/s
  double v_right = 0.0;  // m/s
};

// The five per-agent randomized actuation parameters. Nominal profile is the
// identity transform of the command chain.
struct ActuationProfile {
  double steer_factor = 1.0;
  double motor_k = 27.0;
  double gain = 1.0;
  double trim = 0.0;
  double steer_error_sigma = 0.0;  // radians, per-step additive noise on alpha
};

inline ActuationProfile nominal_profile() { return {}; }

struct VehicleParams {
  double baseline = 0.1;     // wheel separation, m
  double k_steer = 4.0;      // steering controller gain, 1/s
  double omega_max = 4.0;    // rad/s
  double tau = 0.1;          // motor lag time constant, s
  double lookahead = 0.15;   // goal point distance, m
  double v_wheel_max = 1.0;  // m/s
};

struct VehicleState {
  Pose pose;
  BodyTwist twist;
  WheelCommand wheel_actual;  // post-lag wheel speeds
  int lane_id = 0;            // current target lane
  double commanded_speed = 0.0;
};

// angle from pose heading to the goal point, wrapped to (-pi, pi];
// degenerate goal (closer than 1e-9 m) returns 0
double steering_angle(const Pose& pose, const Vec2& goal);

// omega = clamp(k_steer * (steer_factor * alpha + noise_draw), +-omega_max);
// noise_draw is sampled per step from N(0, steer_error_sigma) by the caller
BodyTwist steer_to_twist(double alpha, double speed,
                         const ActuationProfile& profile, double noise_draw,
                         const VehicleParams& params);

WheelCommand inverse_kinematics(const BodyTwist& twist, double baseline);
BodyTwist forward_kinematics(const WheelCommand& cmd, double baseline);

// gain/trim/motor-constant distortion, clamped to +-v_wheel_max
WheelCommand apply_actuation(const WheelCommand& cmd,
                             const ActuationProfile& profile,
                             double v_wheel_max);

// first-order relaxation toward target; tau = 0 returns target exactly
WheelCommand motor_lag(const WheelCommand& actual, const WheelCommand& target,
                       double dt, double tau);

// exact-arc unicycle update for constant twist over dt
Pose integrate_pose(const Pose& pose, const BodyTwist& twist, double dt);

// sequential application of two actuation profiles as one; composing with the
// nominal profile is a bit-exact identity
ActuationProfile compose_profiles(const ActuationProfile& first,
                                  const ActuationProfile& second);

}  // namespace madrive
