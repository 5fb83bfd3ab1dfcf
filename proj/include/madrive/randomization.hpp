#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "madrive/rng.hpp"
#include "madrive/vehicle.hpp"

namespace madrive {

struct DistSpec {
  enum class Kind { Constant, Uniform, Normal };
  Kind kind = Kind::Constant;
  double a = 0.0;  // value | lo | mean
  double b = 0.0;  // unused | hi | sigma

  static DistSpec constant(double v) { return {Kind::Constant, v, 0.0}; }
  static DistSpec uniform(double lo, double hi) {
    return {Kind::Uniform, lo, hi};
  }
  static DistSpec normal(double mean, double sigma) {
    return {Kind::Normal, mean, sigma};
  }

  double sample(Rng& rng) const;
  double mean() const;
};

// one distribution per ActuationProfile parameter, in profile field order
struct RandomizationLevel {
  std::string name;
  DistSpec steer_factor = DistSpec::constant(1.0);
  DistSpec motor_k = DistSpec::constant(27.0);
  DistSpec gain = DistSpec::constant(1.0);
  DistSpec trim = DistSpec::constant(0.0);
  DistSpec steer_error_sigma = DistSpec::constant(0.0);
};

struct RandomizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RandomizationLevel level_none();
RandomizationLevel level_medium();
RandomizationLevel level_high();

// resolves "none"/"med"/"high" or treats the argument as a level file path
RandomizationLevel resolve_level(const std::string& name_or_path);

// level file: lines of `param uniform lo hi` / `param normal mean sigma` /
// `param const value`, params: steer_factor, motor_k, gain, trim, steer_error
RandomizationLevel load_level(const std::string& path);

// each parameter drawn independently; the steer-error draw is stored as the
// per-step noise sigma
ActuationProfile sample_profile(const RandomizationLevel& level, Rng& rng);

}  // namespace madrive
