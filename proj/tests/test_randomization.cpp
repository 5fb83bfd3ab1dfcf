#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "madrive/randomization.hpp"

using namespace madrive;

TEST_CASE("level none is a point mass at the nominal column") {
  const RandomizationLevel level = level_none();
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const ActuationProfile p = sample_profile(level, rng);
    CHECK(p.steer_factor == 1.0);
    CHECK(p.motor_k == 27.0);
    CHECK(p.gain == 1.0);
    CHECK(p.trim == 0.0);
    CHECK(p.steer_error_sigma == 0.0);
  }
}

TEST_CASE("medium level stays inside its declared bounds with sigma 0.1") {
  const RandomizationLevel level = level_medium();
  Rng rng(2);
  for (int i = 0; i < 2000; ++i) {
    const ActuationProfile p = sample_profile(level, rng);
    CHECK(p.steer_factor >= 0.8);
    CHECK(p.steer_factor <= 1.2);
    CHECK(p.motor_k >= 22.0);
    CHECK(p.motor_k <= 32.0);
    CHECK(p.gain >= 0.8);
    CHECK(p.gain <= 1.2);
    CHECK(p.trim >= -0.1);
    CHECK(p.trim <= 0.1);
    CHECK(p.steer_error_sigma == 0.1);
  }
}

TEST_CASE("high level Monte Carlo: mean, min, max of U(0.5, 1.5)") {
  const RandomizationLevel level = level_high();
  Rng rng(3);
  double sum = 0.0;
  double lo = 1e300, hi = -1e300;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const ActuationProfile p = sample_profile(level, rng);
    sum += p.steer_factor;
    lo = std::min(lo, p.steer_factor);
    hi = std::max(hi, p.steer_factor);
    CHECK(p.steer_error_sigma == 0.5);
  }
  const double mean = sum / n;
  CHECK(std::abs(mean - 1.0) < 0.005);
  CHECK(lo >= 0.5);
  CHECK(hi <= 1.5);
}

TEST_CASE("seeded reproducibility of the profile sequence") {
  const RandomizationLevel level = level_high();
  Rng a(99), b(99);
  for (int i = 0; i < 200; ++i) {
    const ActuationProfile pa = sample_profile(level, a);
    const ActuationProfile pb = sample_profile(level, b);
    CHECK(pa.steer_factor == pb.steer_factor);
    CHECK(pa.motor_k == pb.motor_k);
    CHECK(pa.gain == pb.gain);
    CHECK(pa.trim == pb.trim);
    CHECK(pa.steer_error_sigma == pb.steer_error_sigma);
  }
}

TEST_CASE("resolve_level maps names and falls through to files") {
  CHECK(resolve_level("none").name == "none");
  CHECK(resolve_level("med").name == "med");
  CHECK(resolve_level("medium").name == "med");
  CHECK(resolve_level("high").name == "high");
  CHECK_THROWS_AS(resolve_level("no-such-file"), RandomizationError);
}

TEST_CASE("custom level files parse the three distribution kinds") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "madrive_level_test";
  fs::create_directories(dir);
  const std::string path = (dir / "custom.level").string();
  {
    std::ofstream out(path);
    out << "# custom level\n";
    out << "steer_factor uniform 0.9 1.1\n";
    out << "motor_k const 27\n";
    out << "gain normal 1.0 0.05\n";
    out << "trim uniform -0.02 0.02\n";
    out << "steer_error normal 0 0.05\n";
  }
  const RandomizationLevel level = load_level(path);
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const ActuationProfile p = sample_profile(level, rng);
    CHECK(p.steer_factor >= 0.9);
    CHECK(p.steer_factor <= 1.1);
    CHECK(p.motor_k == 27.0);
    CHECK(p.trim >= -0.02);
    CHECK(p.trim <= 0.02);
    CHECK(p.steer_error_sigma == 0.05);
  }

  {
    std::ofstream out(path);
    out << "steer_factor uniform 1.2 0.8\n";  // lo > hi
  }
  CHECK_THROWS_WITH_AS(load_level(path), doctest::Contains(":1:"),
                       RandomizationError);
  {
    std::ofstream out(path);
    out << "bogus const 1\n";
  }
  CHECK_THROWS_AS(load_level(path), RandomizationError);
  fs::remove_all(dir);
}
