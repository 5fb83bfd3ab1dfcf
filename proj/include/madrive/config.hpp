#pragma once

#include <string>

#include "madrive/baseline.hpp"
#include "madrive/environment.hpp"
#include "madrive/mappo.hpp"

namespace madrive {

// everything the CLI runs from: environment, vehicle, training and RSS
// parameters, plus an optional track file
struct Config {
  EnvConfig env;
  TrainConfig train;
  RssParams rss;
  std::string track_path;  // empty = built-in track
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// plain-text `key value` lines, '#' comments; unknown keys are errors
Config load_config(const std::string& path);

TrackMap track_for(const Config& config);

}  // namespace madrive
