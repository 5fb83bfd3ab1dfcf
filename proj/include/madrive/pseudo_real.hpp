#pragma once

#include <array>
#include <deque>
#include <string>
#include <vector>

#include "madrive/environment.hpp"
#include "madrive/randomization.hpp"

namespace madrive {

// held-out perturbation family standing in for hardware: delayed actions,
// frozen per-run actuation bias, observation noise, skipped motion updates
struct PseudoRealProfile {
  int action_delay_steps = 0;
  double update_jitter = 0.0;  // probability an agent's motion update is skipped
  std::array<double, kObservationDim> obs_noise_sigma{};  // per observation field
  RandomizationLevel bias;  // per-agent bias sampled once per run

  // delay 1, bias from distributions 20% wider than the high-randomization
  // bounds, sigma 0.01 noise on distance/angle fields, 5% jitter
  static PseudoRealProfile defaults();
  // identity: perturbs nothing, bit-for-bit
  static PseudoRealProfile zero();
};

PseudoRealProfile load_pseudo_real(const std::string& path);

// fixed-length action queue; the environment executes what entered the queue
// delay steps ago, NoOp during warm-up
class ActionDelay {
 public:
  ActionDelay(int delay_steps, int n_agents);
  std::vector<ActionId> push(const std::vector<ActionId>& actions);

 private:
  std::deque<std::vector<ActionId>> queue_;
};

// environment adapter applying a PseudoRealProfile around reset/step; draws
// come from a stream separate from the environment's own so the zero profile
// is bitwise invisible
class PseudoRealEnv {
 public:
  PseudoRealEnv(Environment& env, const PseudoRealProfile& profile);

  StepResult reset(const std::vector<ActuationProfile>& policy_profiles,
                   std::uint64_t seed);
  StepResult step(const std::vector<ActionId>& actions);

  bool done() const { return env_.done(); }
  const Environment& env() const { return env_; }

 private:
  void perturb_observations(StepResult& result);

  Environment& env_;
  PseudoRealProfile profile_;
  ActionDelay delay_;
  Rng rng_;
};

}  // namespace madrive
