#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "madrive/environment.hpp"
#include "madrive/randomization.hpp"

using namespace madrive;

namespace {

EnvConfig small_config() {
  EnvConfig cfg;
  cfg.n_agents = 3;
  cfg.n_parked = 3;
  cfg.max_steps = 50;
  return cfg;
}

std::vector<ActuationProfile> nominal_profiles(int n) {
  return std::vector<ActuationProfile>(static_cast<size_t>(n),
                                       nominal_profile());
}

// deterministic pseudo-random action stream for exercising the env
std::vector<ActionId> random_actions(Rng& rng, int n) {
  std::vector<ActionId> actions;
  for (int i = 0; i < n; ++i) {
    actions.push_back(static_cast<ActionId>(rng.uniform_index(4)));
  }
  return actions;
}

}  // namespace

TEST_CASE("compute_reward is exactly v - 5c - 5t - 0.5l") {
  CHECK(compute_reward({0.3, 0, 0, 0}) == 0.3);
  CHECK(compute_reward({0.2, 1, 0, 1}) == doctest::Approx(-5.3));
  CHECK(compute_reward({0.1, 1, 1, 1}) == doctest::Approx(-10.4));
}

TEST_CASE("reset spawns distinct on-track poses with clear gaps") {
  const TrackMap track = default_track();
  Environment env(track, small_config());
  const StepResult r = env.reset(nominal_profiles(3), 17);
  CHECK_FALSE(r.done);
  CHECK(r.observations.size() == 3);
  CHECK(static_cast<int>(r.global_state.size()) == (9 + 4) * 3);

  // collect all 6 poses from the global state block and the parked flags via
  // a fresh world: agents must be on track and mutually separated
  std::vector<Vec2> agent_positions;
  for (int i = 0; i < 3; ++i) {
    const double x = r.global_state[static_cast<size_t>(9 * 3 + 4 * i)];
    const double y = r.global_state[static_cast<size_t>(9 * 3 + 4 * i + 1)];
    agent_positions.push_back({x, y});
    CHECK_FALSE(is_off_track(track, {x, y}));
    CHECK(r.observations[static_cast<size_t>(i)].off_track == 0.0);
    // spawn speed is v_min
    CHECK(r.observations[static_cast<size_t>(i)].own_speed ==
          doctest::Approx(0.1));
  }
  for (size_t i = 0; i < agent_positions.size(); ++i) {
    for (size_t j = i + 1; j < agent_positions.size(); ++j) {
      CHECK(distance(agent_positions[i], agent_positions[j]) >
            3.0 * small_config().collision_radius);
    }
  }
}

TEST_CASE("same seed spawns identically, different seeds differ") {
  const TrackMap track = default_track();
  Environment a(track, small_config());
  Environment b(track, small_config());
  const StepResult ra = a.reset(nominal_profiles(3), 5);
  const StepResult rb = b.reset(nominal_profiles(3), 5);
  CHECK(ra.global_state == rb.global_state);
  Environment c(track, small_config());
  const StepResult rc = c.reset(nominal_profiles(3), 6);
  CHECK(ra.global_state != rc.global_state);
}

TEST_CASE("single agent, no parked cars") {
  EnvConfig cfg = small_config();
  cfg.n_agents = 1;
  cfg.n_parked = 0;
  Environment env(default_track(), cfg);
  const StepResult r = env.reset(nominal_profiles(1), 3);
  CHECK(r.observations[0].own_speed == doctest::Approx(0.1));
  // sentinel neighbor readings
  CHECK(r.observations[0].dist_same_lane_ahead == cfg.perception_radius);
  CHECK(r.observations[0].dist_opposite_lane_ahead == cfg.perception_radius);
  CHECK(r.observations[0].vel_same_lane_neighbor == 0.0);
  CHECK(r.observations[0].vel_opposite_lane_neighbor == 0.0);
}

TEST_CASE("overcrowded track fails to spawn with a configuration error") {
  EnvConfig cfg = small_config();
  cfg.n_agents = 3;
  cfg.n_parked = 200;
  Environment env(default_track(), cfg);
  CHECK_THROWS_AS(env.reset(nominal_profiles(3), 1), EnvError);
}

TEST_CASE("action semantics: accelerate, brake, lane change, no-op") {
  EnvConfig cfg = small_config();
  cfg.n_agents = 1;
  cfg.n_parked = 0;
  Environment env(default_track(), cfg);
  env.reset(nominal_profiles(1), 11);

  // v_min clamp on brake
  env.step({ActionId::Brake});
  CHECK(env.agent_state(0).commanded_speed == doctest::Approx(0.1));

  // accelerate: 0.1 + 0.25 * 0.1 steps
  env.step({ActionId::Accelerate});
  CHECK(env.agent_state(0).commanded_speed == doctest::Approx(0.125));
  env.step({ActionId::Accelerate});
  env.step({ActionId::Accelerate});
  env.step({ActionId::Accelerate});
  CHECK(env.agent_state(0).commanded_speed == doctest::Approx(0.2));

  // accelerate from 0.2 -> 0.225 in a single step
  env.step({ActionId::Accelerate});
  CHECK(env.agent_state(0).commanded_speed == doctest::Approx(0.225));

  // clamp at the agent's v_max (0.3)
  for (int i = 0; i < 10; ++i) env.step({ActionId::Accelerate});
  CHECK(env.agent_state(0).commanded_speed == doctest::Approx(0.3));

  // no-op holds speed
  env.step({ActionId::NoOp});
  CHECK(env.agent_state(0).commanded_speed == doctest::Approx(0.3));

  // lane change is an involution and sets the l flag on both steps
  const int lane0 = env.agent_state(0).lane_id;
  const StepResult s1 = env.step({ActionId::ChangeLane});
  CHECK(env.agent_state(0).lane_id == 1 - lane0);
  CHECK(s1.terms[0].l == 1);
  const StepResult s2 = env.step({ActionId::ChangeLane});
  CHECK(env.agent_state(0).lane_id == lane0);
  CHECK(s2.terms[0].l == 1);
  const StepResult s3 = env.step({ActionId::NoOp});
  CHECK(s3.terms[0].l == 0);
}

TEST_CASE("episode runs exactly max_steps and then refuses to step") {
  EnvConfig cfg = small_config();
  cfg.max_steps = 7;
  Environment env(default_track(), cfg);
  StepResult r = env.reset(nominal_profiles(3), 2);
  const std::vector<ActionId> noop(3, ActionId::NoOp);
  for (int t = 0; t < 7; ++t) {
    CHECK_FALSE(env.done());
    r = env.step(noop);
    CHECK(r.step == t + 1);
    CHECK(r.done == (t == 6));
  }
  CHECK(env.done());
  CHECK_THROWS_AS(env.step(noop), EnvError);
  CHECK(env.episode_log().size() == 7 * 3);
}

TEST_CASE("no-penalty steps reward exactly the measured speed") {
  EnvConfig cfg = small_config();
  cfg.n_agents = 1;
  cfg.n_parked = 0;
  Environment env(default_track(), cfg);
  env.reset(nominal_profiles(1), 21);
  for (int t = 0; t < 30; ++t) {
    const StepResult r = env.step({ActionId::NoOp});
    REQUIRE(r.terms[0].c == 0);
    REQUIRE(r.terms[0].t == 0);
    REQUIRE(r.terms[0].l == 0);
    CHECK(r.rewards[0] == r.terms[0].v);
    CHECK(r.rewards[0] == env.agent_state(0).twist.v);
  }
}

TEST_CASE("detect_collisions boundary and chain cases") {
  const double r = 0.09;
  // exactly 2r apart: no collision (strict inequality)
  std::vector<Pose> pair = {{0, 0, 0}, {2 * r, 0, 0}};
  CHECK(detect_collisions(pair, r) == std::vector<int>{0, 0});
  pair[1].x = 2 * r - 1e-9;
  CHECK(detect_collisions(pair, r) == std::vector<int>{1, 1});

  // chain of 3 cars, 1.5r apart: all flagged
  std::vector<Pose> chain = {{0, 0, 0}, {1.5 * r, 0, 0}, {3.0 * r, 0, 0}};
  CHECK(detect_collisions(chain, r) == std::vector<int>{1, 1, 1});

  // single car never collides
  CHECK(detect_collisions({{1, 2, 3}}, r) == std::vector<int>{1 == 2});
}

TEST_CASE("build_observation: constructed scenes") {
  const TrackMap track = default_track();
  const Ring& outer = track.lane(1);
  VehicleParams vp;

  WorldView world;
  world.track = &track;
  world.n_agents = 1;
  world.perception_radius = 1.0;

  // agent at arc 0 on the outer lane, heading along the tangent
  const Vec2 start = outer.point(0);
  world.poses.push_back({start.x, start.y, outer.tangent_at_waypoint(0)});
  world.speeds.push_back(0.25);
  world.lanes.push_back(1);

  SUBCASE("no cars in range: sentinel distances and zero velocities") {
    const Observation obs = build_observation(world, 0, vp);
    CHECK(obs.dist_same_lane_ahead == 1.0);
    CHECK(obs.dist_opposite_lane_ahead == 1.0);
    CHECK(obs.vel_same_lane_neighbor == 0.0);
    CHECK(obs.vel_opposite_lane_neighbor == 0.0);
    CHECK(obs.off_track == 0.0);
    CHECK(obs.own_speed == 0.25);
    CHECK(std::abs(obs.lane_center_distance) < 1e-9);
    CHECK(std::abs(obs.tangent_angle_error) < 1e-9);
  }

  SUBCASE("parked car 0.4 m ahead in the same lane") {
    const Vec2 ahead = outer.point_at_arc(0.4);
    world.poses.push_back({ahead.x, ahead.y, 0.0});
    world.speeds.push_back(0.0);
    world.lanes.push_back(1);
    const Observation obs = build_observation(world, 0, vp);
    CHECK(obs.dist_same_lane_ahead == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(obs.vel_same_lane_neighbor == 0.0);
    CHECK(obs.dist_opposite_lane_ahead == 1.0);
  }

  SUBCASE("car behind does not register (ahead-only search)") {
    const Vec2 behind = outer.point_at_arc(outer.length() - 0.3);
    world.poses.push_back({behind.x, behind.y, 0.0});
    world.speeds.push_back(0.2);
    world.lanes.push_back(1);
    const Observation obs = build_observation(world, 0, vp);
    CHECK(obs.dist_same_lane_ahead == 1.0);
    // and the same car seen from the other side is 0.3 m ahead of IT
    const Observation other = build_observation(world, 1, vp);
    CHECK(other.dist_same_lane_ahead == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(other.vel_same_lane_neighbor == doctest::Approx(0.25));
  }

  SUBCASE("moving neighbor in the opposite lane reports its speed") {
    const Vec2 inner_pos = track.lane(0).point_at_arc(
        track.lane(0).project(start).arc_position + 0.5);
    world.poses.push_back({inner_pos.x, inner_pos.y, 0.0});
    world.speeds.push_back(0.4);
    world.lanes.push_back(0);
    const Observation obs = build_observation(world, 0, vp);
    CHECK(obs.dist_opposite_lane_ahead == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(obs.vel_opposite_lane_neighbor == 0.4);
    CHECK(obs.dist_same_lane_ahead == 1.0);
  }

  SUBCASE("off-track agent raises the flag") {
    world.poses[0] = {10.0, 10.0, 0.0};
    const Observation obs = build_observation(world, 0, vp);
    CHECK(obs.off_track == 1.0);
  }
}

TEST_CASE("determinism: identical seed and actions give identical logs") {
  const TrackMap track = default_track();
  auto run = [&](std::uint64_t seed) {
    Environment env(track, small_config());
    env.reset(nominal_profiles(3), seed);
    Rng rng(1234);
    for (int t = 0; t < 50; ++t) env.step(random_actions(rng, 3));
    return env.episode_log();
  };
  const EpisodeLog a = run(7);
  const EpisodeLog b = run(7);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].y == b[i].y);
    CHECK(a[i].theta == b[i].theta);
    CHECK(a[i].v == b[i].v);
    CHECK(a[i].reward == b[i].reward);
    CHECK(a[i].c == b[i].c);
    CHECK(a[i].t == b[i].t);
    CHECK(a[i].l == b[i].l);
  }
}

TEST_CASE("randomized profiles keep the trajectory deterministic per seed") {
  const TrackMap track = default_track();
  RandomizationLevel level = level_high();
  auto run = [&](std::uint64_t seed) {
    Rng profile_rng(seed);
    std::vector<ActuationProfile> profiles;
    for (int i = 0; i < 3; ++i) profiles.push_back(sample_profile(level, profile_rng));
    Environment env(track, small_config());
    env.reset(profiles, seed);
    Rng rng(99);
    for (int t = 0; t < 50; ++t) env.step(random_actions(rng, 3));
    return env.episode_log();
  };
  const EpisodeLog a = run(13);
  const EpisodeLog b = run(13);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].reward == b[i].reward);
  }
}

TEST_CASE("reward decomposition, collision oracle, and bounds over episodes") {
  const TrackMap track = default_track();
  EnvConfig cfg = small_config();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Environment env(track, cfg);
    Rng profile_rng(seed + 100);
    std::vector<ActuationProfile> profiles;
    for (int i = 0; i < 3; ++i) {
      profiles.push_back(sample_profile(level_medium(), profile_rng));
    }
    env.reset(profiles, seed);
    Rng rng(seed);
    std::vector<Pose> poses(6);
    while (!env.done()) {
      const StepResult r = env.step(random_actions(rng, 3));
      for (int i = 0; i < 3; ++i) {
        const RewardTerms& terms = r.terms[static_cast<size_t>(i)];
        // reward decomposition is exact
        CHECK(r.rewards[static_cast<size_t>(i)] == compute_reward(terms));
        // speed bounds
        CHECK(terms.v >= 0.0);
        CHECK(terms.v <= cfg.vehicle.v_wheel_max);
        CHECK(env.agent_state(i).commanded_speed >= cfg.v_min);
        CHECK(env.agent_state(i).commanded_speed <= cfg.v_max_for(i));
        // observation boundedness
        const Observation& obs = r.observations[static_cast<size_t>(i)];
        CHECK(obs.dist_same_lane_ahead >= 0.0);
        CHECK(obs.dist_same_lane_ahead <= cfg.perception_radius);
        CHECK(obs.dist_opposite_lane_ahead >= 0.0);
        CHECK(obs.dist_opposite_lane_ahead <= cfg.perception_radius);
        CHECK(obs.steering_angle > -kPi);
        CHECK(obs.steering_angle <= kPi);
        CHECK(obs.tangent_angle_error > -kPi);
        CHECK(obs.tangent_angle_error <= kPi);
        CHECK((obs.off_track == 0.0 || obs.off_track == 1.0));
        CHECK(obs.own_speed == terms.v);
      }
    }
    // collision flags match an O(n^2) oracle recomputed from the logs
    const EpisodeLog& log = env.episode_log();
    for (int t = 0; t < cfg.max_steps; ++t) {
      std::vector<Vec2> agent_pos(3);
      for (int i = 0; i < 3; ++i) {
        const LogRow& row = log[static_cast<size_t>(t * 3 + i)];
        agent_pos[static_cast<size_t>(i)] = {row.x, row.y};
      }
      // parked cars never move; recover them from the spawn by probing the
      // environment world through observations is overkill here, so check
      // agent-agent pairs and consistency of flags with distance only
      for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
          const bool close =
              distance(agent_pos[static_cast<size_t>(i)],
                       agent_pos[static_cast<size_t>(j)]) <
              2.0 * cfg.collision_radius;
          if (close) {
            CHECK(log[static_cast<size_t>(t * 3 + i)].c == 1);
            CHECK(log[static_cast<size_t>(t * 3 + j)].c == 1);
          }
        }
      }
    }
  }
}

TEST_CASE("episode log CSV round trip") {
  namespace fs = std::filesystem;
  const TrackMap track = default_track();
  Environment env(track, small_config());
  env.reset(nominal_profiles(3), 31);
  Rng rng(31);
  while (!env.done()) env.step(random_actions(rng, 3));

  const fs::path dir = fs::temp_directory_path() / "madrive_env_test";
  fs::create_directories(dir);
  const std::string path = (dir / "episode.csv").string();
  write_episode_csv(env.episode_log(), path);
  const EpisodeLog back = read_episode_csv(path);
  REQUIRE(back.size() == env.episode_log().size());
  for (size_t i = 0; i < back.size(); ++i) {
    const LogRow& a = env.episode_log()[i];
    const LogRow& b = back[i];
    CHECK(a.step == b.step);
    CHECK(a.agent == b.agent);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.theta == b.theta);
    CHECK(a.v == b.v);
    CHECK(a.action == b.action);
    CHECK(a.reward == b.reward);
    CHECK(a.c == b.c);
    CHECK(a.t == b.t);
    CHECK(a.l == b.l);
    CHECK(a.lane == b.lane);
  }
  fs::remove_all(dir);
}

TEST_CASE("config validation") {
  EnvConfig cfg = small_config();
  cfg.n_agents = 0;
  CHECK_THROWS_AS(Environment(default_track(), cfg), EnvError);
  cfg = small_config();
  cfg.dt = 0.0;
  CHECK_THROWS_AS(Environment(default_track(), cfg), EnvError);
  cfg = small_config();
  cfg.v_min = 0.5;
  cfg.v_max = {0.3};
  CHECK_THROWS_AS(Environment(default_track(), cfg), EnvError);
  Environment ok(default_track(), small_config());
  CHECK_THROWS_AS(ok.step({ActionId::NoOp, ActionId::NoOp, ActionId::NoOp}),
                  EnvError);  // step before reset
}
