#include "madrive/vehicle.hpp"

#include <cmath>

namespace madrive {

double steering_angle(const Pose& pose, const Vec2& goal) {
  const Vec2 d = goal - pose.position();
  if (d.norm() < 1e-9) return 0.0;
  return wrap_angle(std::atan2(d.y, d.x) - pose.theta);
}

BodyTwist steer_to_twist(double alpha, double speed,
                         const ActuationProfile& profile, double noise_draw,
                         const VehicleParams& params) {
  const double omega =
      params.k_steer * (profile.steer_factor * alpha + noise_draw);
  return {speed, clamp(omega, -params.omega_max, params.omega_max)};
}

WheelCommand inverse_kinematics(const BodyTwist& twist, double baseline) {
  const double half = twist.omega * baseline / 2.0;
  return {twist.v - half, twist.v + half};
}

BodyTwist forward_kinematics(const WheelCommand& cmd, double baseline) {
  return {(cmd.v_left + cmd.v_right) / 2.0,
          (cmd.v_right - cmd.v_left) / baseline};
}

WheelCommand apply_actuation(const WheelCommand& cmd,
                             const ActuationProfile& profile,
                             double v_wheel_max) {
  const double k_scale = profile.motor_k / 27.0;
  const double left = (profile.gain - profile.trim) * k_scale * cmd.v_left;
  const double right = (profile.gain + profile.trim) * k_scale * cmd.v_right;
  return {clamp(left, -v_wheel_max, v_wheel_max),
          clamp(right, -v_wheel_max, v_wheel_max)};
}

WheelCommand motor_lag(const WheelCommand& actual, const WheelCommand& target,
                       double dt, double tau) {
  if (tau == 0.0) return target;
  const double blend = 1.0 - std::exp(-dt / tau);
  return {actual.v_left + (target.v_left - actual.v_left) * blend,
          actual.v_right + (target.v_right - actual.v_right) * blend};
}

Pose integrate_pose(const Pose& pose, const BodyTwist& twist, double dt) {
  Pose next;
  if (std::abs(twist.omega) < 1e-8) {
    next.x = pose.x + twist.v * std::cos(pose.theta) * dt;
    next.y = pose.y + twist.v * std::sin(pose.theta) * dt;
    next.theta = wrap_angle(pose.theta + twist.omega * dt);
  } else {
    const double radius = twist.v / twist.omega;
    const double theta_next = pose.theta + twist.omega * dt;
    next.x = pose.x + radius * (std::sin(theta_next) - std::sin(pose.theta));
    next.y = pose.y + radius * (std::cos(pose.theta) - std::cos(theta_next));
    next.theta = wrap_angle(theta_next);
  }
  return next;
}

ActuationProfile compose_profiles(const ActuationProfile& first,
                                  const ActuationProfile& second) {
  ActuationProfile out;
  out.steer_factor = first.steer_factor * second.steer_factor;
  out.motor_k = first.motor_k * (second.motor_k / 27.0);
  out.gain = first.gain * second.gain;
  out.trim = first.trim + second.trim;
  if (second.steer_error_sigma == 0.0) {
    out.steer_error_sigma = first.steer_error_sigma;
  } else if (first.steer_error_sigma == 0.0) {
    out.steer_error_sigma = second.steer_error_sigma;
  } else {
    out.steer_error_sigma = std::sqrt(
        first.steer_error_sigma * first.steer_error_sigma +
        second.steer_error_sigma * second.steer_error_sigma);
  }
  return out;
}

}  // namespace madrive
