#include "madrive/config.hpp"

#include <fstream>
#include <sstream>

namespace madrive {

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Config cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string key;
    row >> key;
    const std::string where = path + ":" + std::to_string(line_no);
    auto need = [&](auto& target) {
      if (!(row >> target)) throw ConfigError(where + ": missing value for " + key);
    };
    if (key == "n_agents") {
      need(cfg.env.n_agents);
    } else if (key == "n_parked") {
      need(cfg.env.n_parked);
    } else if (key == "max_steps") {
      need(cfg.env.max_steps);
    } else if (key == "dt") {
      need(cfg.env.dt);
    } else if (key == "v_min") {
      need(cfg.env.v_min);
    } else if (key == "v_max") {
      cfg.env.v_max.clear();
      double v;
      while (row >> v) cfg.env.v_max.push_back(v);
      if (cfg.env.v_max.empty()) {
        throw ConfigError(where + ": v_max needs at least one value");
      }
    } else if (key == "accel") {
      need(cfg.env.accel);
    } else if (key == "perception_radius") {
      need(cfg.env.perception_radius);
    } else if (key == "collision_radius") {
      need(cfg.env.collision_radius);
    } else if (key == "seed") {
      need(cfg.env.seed);
    } else if (key == "baseline") {
      need(cfg.env.vehicle.baseline);
    } else if (key == "k_steer") {
      need(cfg.env.vehicle.k_steer);
    } else if (key == "omega_max") {
      need(cfg.env.vehicle.omega_max);
    } else if (key == "tau") {
      need(cfg.env.vehicle.tau);
    } else if (key == "lookahead") {
      need(cfg.env.vehicle.lookahead);
    } else if (key == "v_wheel_max") {
      need(cfg.env.vehicle.v_wheel_max);
    } else if (key == "episodes") {
      need(cfg.train.episodes);
    } else if (key == "lr_actor") {
      need(cfg.train.lr_actor);
    } else if (key == "lr_critic") {
      need(cfg.train.lr_critic);
    } else if (key == "ppo_epochs") {
      need(cfg.train.ppo_epochs);
    } else if (key == "entropy_coef") {
      need(cfg.train.entropy_coef);
    } else if (key == "gamma") {
      need(cfg.train.gamma);
    } else if (key == "gae_lambda") {
      need(cfg.train.gae_lambda);
    } else if (key == "clip_eps") {
      need(cfg.train.clip_eps);
    } else if (key == "value_coef") {
      need(cfg.train.value_coef);
    } else if (key == "minibatches") {
      need(cfg.train.minibatches);
    } else if (key == "max_grad_norm") {
      need(cfg.train.max_grad_norm);
    } else if (key == "episodes_per_update") {
      need(cfg.train.episodes_per_update);
    } else if (key == "rss_response_time") {
      need(cfg.rss.response_time);
    } else if (key == "rss_max_accel") {
      need(cfg.rss.max_accel);
    } else if (key == "rss_min_brake") {
      need(cfg.rss.min_brake);
    } else if (key == "rss_max_brake") {
      need(cfg.rss.max_brake);
    } else if (key == "track") {
      need(cfg.track_path);
    } else {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

TrackMap track_for(const Config& config) {
  if (config.track_path.empty()) return default_track();
  return load_track(config.track_path);
}

}  // namespace madrive
