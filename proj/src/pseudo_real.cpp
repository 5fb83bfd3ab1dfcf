#include "madrive/pseudo_real.hpp"

#include <fstream>
#include <sstream>

namespace madrive {

PseudoRealProfile PseudoRealProfile::defaults() {
  // the default hardware stand-in: per-agent actuation bias drawn from the
  // medium randomization family, skipped motion updates for asynchrony, and
  // mild observation noise on distances/angles. An action delay is left out
  // of the default: policies trained without latency oscillate their
  // lane-change decisions under it, which saturates collision penalties and
  // masks every policy difference.
  PseudoRealProfile p;
  p.action_delay_steps = 0;
  p.update_jitter = 0.05;
  p.obs_noise_sigma = {0.01, 0.01, 0.01, 0.01, 0.01, 0.0, 0.0, 0.0, 0.0};
  p.bias.name = "pseudo-real-bias";
  p.bias.steer_factor = DistSpec::uniform(0.8, 1.2);
  p.bias.motor_k = DistSpec::uniform(22.0, 32.0);
  p.bias.gain = DistSpec::uniform(0.8, 1.2);
  p.bias.trim = DistSpec::uniform(-0.1, 0.1);
  p.bias.steer_error_sigma = DistSpec::normal(0.0, 0.1);
  return p;
}

PseudoRealProfile PseudoRealProfile::zero() {
  PseudoRealProfile p;
  p.bias.name = "zero-bias";
  return p;
}

PseudoRealProfile load_pseudo_real(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EnvError("cannot open pseudo-real profile: " + path);
  PseudoRealProfile p = PseudoRealProfile::zero();
  static const char* kObsFields[kObservationDim] = {
      "steering_angle",           "lane_center_distance",
      "tangent_angle_error",      "dist_same_lane_ahead",
      "dist_opposite_lane_ahead", "vel_same_lane_neighbor",
      "vel_opposite_lane_neighbor", "off_track",
      "own_speed"};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string key;
    row >> key;
    const std::string where = path + ":" + std::to_string(line_no);
    if (key == "action_delay_steps") {
      if (!(row >> p.action_delay_steps) || p.action_delay_steps < 0) {
        throw EnvError(where + ": action_delay_steps must be >= 0");
      }
    } else if (key == "update_jitter") {
      if (!(row >> p.update_jitter) || p.update_jitter < 0.0 ||
          p.update_jitter > 1.0) {
        throw EnvError(where + ": update_jitter must be in [0, 1]");
      }
    } else if (key == "observation_noise") {
      std::string field;
      double sigma;
      if (!(row >> field >> sigma) || sigma < 0.0) {
        throw EnvError(where + ": observation_noise needs field and sigma >= 0");
      }
      bool found = false;
      for (int i = 0; i < kObservationDim; ++i) {
        if (field == kObsFields[i]) {
          p.obs_noise_sigma[static_cast<size_t>(i)] = sigma;
          found = true;
          break;
        }
      }
      if (!found) throw EnvError(where + ": unknown observation field '" + field + "'");
    } else if (key == "bias") {
      std::string rest;
      std::getline(row, rest);
      // reuse the randomization-level line grammar for bias entries
      std::istringstream bias_row(rest);
      std::string param, kind;
      bias_row >> param >> kind;
      double a = 0.0, b = 0.0;
      DistSpec spec;
      if (kind == "const" && (bias_row >> a)) {
        spec = DistSpec::constant(a);
      } else if (kind == "uniform" && (bias_row >> a >> b) && a <= b) {
        spec = DistSpec::uniform(a, b);
      } else if (kind == "normal" && (bias_row >> a >> b) && b >= 0.0) {
        spec = DistSpec::normal(a, b);
      } else {
        throw EnvError(where + ": malformed bias distribution");
      }
      if (param == "steer_factor") {
        p.bias.steer_factor = spec;
      } else if (param == "motor_k") {
        p.bias.motor_k = spec;
      } else if (param == "gain") {
        p.bias.gain = spec;
      } else if (param == "trim") {
        p.bias.trim = spec;
      } else if (param == "steer_error") {
        p.bias.steer_error_sigma = spec;
      } else {
        throw EnvError(where + ": unknown bias parameter '" + param + "'");
      }
    } else {
      throw EnvError(where + ": unknown key '" + key + "'");
    }
  }
  return p;
}

ActionDelay::ActionDelay(int delay_steps, int n_agents) {
  for (int i = 0; i < delay_steps; ++i) {
    queue_.emplace_back(static_cast<size_t>(n_agents), ActionId::NoOp);
  }
}

std::vector<ActionId> ActionDelay::push(const std::vector<ActionId>& actions) {
  if (queue_.empty()) return actions;
  queue_.push_back(actions);
  std::vector<ActionId> out = std::move(queue_.front());
  queue_.pop_front();
  return out;
}

PseudoRealEnv::PseudoRealEnv(Environment& env, const PseudoRealProfile& profile)
    : env_(env),
      profile_(profile),
      delay_(profile.action_delay_steps, env.config().n_agents) {}

StepResult PseudoRealEnv::reset(
    const std::vector<ActuationProfile>& policy_profiles, std::uint64_t seed) {
  rng_ = Rng(derive_seed(seed, 0xB1A5));
  delay_ = ActionDelay(profile_.action_delay_steps, env_.config().n_agents);
  std::vector<ActuationProfile> effective;
  effective.reserve(policy_profiles.size());
  for (const ActuationProfile& p : policy_profiles) {
    const ActuationProfile bias = sample_profile(profile_.bias, rng_);
    effective.push_back(compose_profiles(p, bias));
  }
  StepResult result = env_.reset(effective, seed);
  perturb_observations(result);
  return result;
}

StepResult PseudoRealEnv::step(const std::vector<ActionId>& actions) {
  const std::vector<ActionId> executed = delay_.push(actions);
  const int n = env_.config().n_agents;
  std::vector<std::uint8_t> skip;
  if (profile_.update_jitter > 0.0) {
    skip.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      skip[static_cast<size_t>(i)] =
          rng_.bernoulli(profile_.update_jitter) ? 1 : 0;
    }
  }
  StepResult result = env_.step(executed, skip);
  perturb_observations(result);
  return result;
}

void PseudoRealEnv::perturb_observations(StepResult& result) {
  bool any = false;
  for (double s : profile_.obs_noise_sigma) any = any || s > 0.0;
  if (!any) return;
  const double radius = env_.config().perception_radius;
  for (Observation& obs : result.observations) {
    auto fields = obs.to_array();
    for (int i = 0; i < kObservationDim; ++i) {
      const double sigma = profile_.obs_noise_sigma[static_cast<size_t>(i)];
      if (sigma > 0.0) {
        fields[static_cast<size_t>(i)] += rng_.normal(0.0, sigma);
      }
    }
    // keep noisy fields inside their declared ranges
    obs.steering_angle = wrap_angle(fields[0]);
    obs.lane_center_distance = fields[1];
    obs.tangent_angle_error = wrap_angle(fields[2]);
    obs.dist_same_lane_ahead = clamp(fields[3], 0.0, radius);
    obs.dist_opposite_lane_ahead = clamp(fields[4], 0.0, radius);
    obs.vel_same_lane_neighbor = fields[5];
    obs.vel_opposite_lane_neighbor = fields[6];
    obs.off_track = fields[7] >= 0.5 ? 1.0 : 0.0;
    obs.own_speed = fields[8];
  }
}

}  // namespace madrive
