#include "madrive/randomization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace madrive {

double DistSpec::sample(Rng& rng) const {
  switch (kind) {
    case Kind::Constant:
      return a;
    case Kind::Uniform:
      return rng.uniform(a, b);
    case Kind::Normal:
      return rng.normal(a, b);
  }
  return a;
}

double DistSpec::mean() const {
  switch (kind) {
    case Kind::Constant:
      return a;
    case Kind::Uniform:
      return (a + b) / 2.0;
    case Kind::Normal:
      return a;
  }
  return a;
}

RandomizationLevel level_none() {
  RandomizationLevel level;
  level.name = "none";
  return level;
}

RandomizationLevel level_medium() {
  RandomizationLevel level;
  level.name = "med";
  level.steer_factor = DistSpec::uniform(0.8, 1.2);
  level.motor_k = DistSpec::uniform(22.0, 32.0);
  level.gain = DistSpec::uniform(0.8, 1.2);
  level.trim = DistSpec::uniform(-0.1, 0.1);
  level.steer_error_sigma = DistSpec::normal(0.0, 0.1);
  return level;
}

RandomizationLevel level_high() {
  RandomizationLevel level;
  level.name = "high";
  level.steer_factor = DistSpec::uniform(0.5, 1.5);
  level.motor_k = DistSpec::uniform(14.0, 40.0);
  level.gain = DistSpec::uniform(0.5, 1.5);
  level.trim = DistSpec::uniform(-0.15, 0.15);
  level.steer_error_sigma = DistSpec::normal(0.0, 0.5);
  return level;
}

RandomizationLevel resolve_level(const std::string& name_or_path) {
  if (name_or_path == "none") return level_none();
  if (name_or_path == "med" || name_or_path == "medium") return level_medium();
  if (name_or_path == "high") return level_high();
  return load_level(name_or_path);
}

namespace {

DistSpec parse_dist(const std::string& path, int line_no,
                    std::istringstream& row) {
  std::string kind;
  if (!(row >> kind)) {
    throw RandomizationError(path + ":" + std::to_string(line_no) +
                             ": missing distribution kind");
  }
  double a = 0.0, b = 0.0;
  if (kind == "const") {
    if (!(row >> a)) {
      throw RandomizationError(path + ":" + std::to_string(line_no) +
                               ": const needs one value");
    }
    return DistSpec::constant(a);
  }
  if (kind == "uniform") {
    if (!(row >> a >> b) || a > b) {
      throw RandomizationError(path + ":" + std::to_string(line_no) +
                               ": uniform needs lo <= hi");
    }
    return DistSpec::uniform(a, b);
  }
  if (kind == "normal") {
    if (!(row >> a >> b) || b < 0.0) {
      throw RandomizationError(path + ":" + std::to_string(line_no) +
                               ": normal needs mean and sigma >= 0");
    }
    return DistSpec::normal(a, b);
  }
  throw RandomizationError(path + ":" + std::to_string(line_no) +
                           ": unknown distribution kind '" + kind + "'");
}

}  // namespace

RandomizationLevel load_level(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RandomizationError("cannot open level file: " + path);
  RandomizationLevel level;
  level.name = path;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string param;
    row >> param;
    if (param == "steer_factor") {
      level.steer_factor = parse_dist(path, line_no, row);
    } else if (param == "motor_k") {
      level.motor_k = parse_dist(path, line_no, row);
    } else if (param == "gain") {
      level.gain = parse_dist(path, line_no, row);
    } else if (param == "trim") {
      level.trim = parse_dist(path, line_no, row);
    } else if (param == "steer_error") {
      level.steer_error_sigma = parse_dist(path, line_no, row);
    } else {
      throw RandomizationError(path + ":" + std::to_string(line_no) +
                               ": unknown parameter '" + param + "'");
    }
  }
  return level;
}

ActuationProfile sample_profile(const RandomizationLevel& level, Rng& rng) {
  ActuationProfile profile;
  profile.steer_factor = level.steer_factor.sample(rng);
  profile.motor_k = level.motor_k.sample(rng);
  profile.gain = level.gain.sample(rng);
  profile.trim = level.trim.sample(rng);
  // the steer-error entry describes the per-step noise distribution; its
  // sigma goes into the profile (a normal spec consumes no draw), while a
  // uniform spec draws the sigma itself
  switch (level.steer_error_sigma.kind) {
    case DistSpec::Kind::Normal:
      profile.steer_error_sigma = std::abs(level.steer_error_sigma.b);
      break;
    case DistSpec::Kind::Constant:
      profile.steer_error_sigma = std::abs(level.steer_error_sigma.a);
      break;
    case DistSpec::Kind::Uniform:
      profile.steer_error_sigma = std::abs(level.steer_error_sigma.sample(rng));
      break;
  }
  return profile;
}

}  // namespace madrive
