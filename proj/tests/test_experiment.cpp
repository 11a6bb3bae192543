#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gamblet/experiment.hpp"

using namespace gamblet;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config serialization round trip") {
  ExperimentConfig cfg;
  cfg.problem = "wave";
  cfg.coefficient = "laplacian";
  cfg.r = 4;
  cfg.scheme = "gl2";
  cfg.dt = 0.0125;
  cfg.T = 0.75;
  cfg.nl = 3.0;
  cfg.eps = 1.0 / 1280.0;
  cfg.tau = 0.01;
  cfg.multi_timestep = true;
  cfg.out = "/tmp/somewhere";
  cfg.seed = 42;
  std::stringstream ss;
  serialize_config(ss, cfg);
  auto back = parse_config(ss);
  CHECK(back == cfg);
}

TEST_CASE("config parsing") {
  std::stringstream ss(
      "# a comment\n"
      "problem = parabolic\n"
      "r = 3\n"
      "scheme = sdirk3\n"
      "dt = 0.05\n"
      "\n"
      "T = 0.2\n");
  auto cfg = parse_config(ss);
  CHECK(cfg.problem == "parabolic");
  CHECK(cfg.r == 3);
  CHECK(cfg.scheme == "sdirk3");
  CHECK(cfg.dt == 0.05);
  CHECK(cfg.T == 0.2);

  std::stringstream bad("problem parabolic\n");
  CHECK_THROWS_WITH_AS(parse_config(bad),
                       doctest::Contains("line 1"), std::invalid_argument);
  std::stringstream unknown("floop = 3\n");
  CHECK_THROWS_AS(parse_config(unknown), std::invalid_argument);
}

TEST_CASE("config validation names the field") {
  ExperimentConfig cfg;
  cfg.r = 0;
  CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("r"),
                       std::invalid_argument);
  cfg = {};
  cfg.problem = "banana";
  CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("problem"),
                       std::invalid_argument);
  cfg = {};
  cfg.problem = "parabolic";
  cfg.dt = -1.0;
  CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("dt"),
                       std::invalid_argument);
  cfg = {};
  cfg.problem = "wave";
  cfg.scheme = "nope";
  CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("scheme"),
                       std::invalid_argument);
  CHECK_NOTHROW(validate_config(ExperimentConfig{}));
}

TEST_CASE("elliptic experiment produces a tiny residual") {
  ExperimentConfig cfg;
  cfg.problem = "elliptic";
  cfg.r = 2;
  cfg.tau = 0.0025;
  cfg.out = fresh_dir("gamblet_test_elliptic").string();
  auto result = run_experiment(cfg);
  REQUIRE(result.metrics.count("residual"));
  CHECK(result.metrics.at("residual") <= 1e-10);
  for (const auto& f : result.files) CHECK(fs::exists(f));
}

TEST_CASE("experiments are deterministic") {
  ExperimentConfig cfg;
  cfg.problem = "elliptic";
  cfg.r = 2;
  cfg.tau = 0.01;
  cfg.seed = 9;

  cfg.out = fresh_dir("gamblet_test_det_a").string();
  auto first = run_experiment(cfg);
  cfg.out = fresh_dir("gamblet_test_det_b").string();
  auto second = run_experiment(cfg);

  REQUIRE(first.files.size() == second.files.size());
  for (std::size_t i = 0; i < first.files.size(); ++i)
    CHECK(slurp(first.files[i]) == slurp(second.files[i]));
  CHECK(first.metrics == second.metrics);
}

TEST_CASE("parabolic experiment writes a trajectory and error metrics") {
  ExperimentConfig cfg;
  cfg.problem = "parabolic";
  cfg.r = 2;
  cfg.scheme = "euler";
  cfg.dt = 0.1;
  cfg.T = 0.2;
  cfg.reference_dt = 0.025;
  cfg.out = fresh_dir("gamblet_test_parabolic").string();
  auto result = run_experiment(cfg);
  CHECK(result.metrics.count("l2_error"));
  CHECK(result.metrics.count("h1_error"));
  CHECK(result.metrics.count("rel_energy_error"));
  CHECK(result.metrics.at("l2_error") >= 0.0);
}

TEST_CASE("timing sweep and slopes") {
  ExperimentConfig cfg;
  cfg.r = 3;
  auto rows = timing_sweep(cfg, {2, 3});
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(row.n == (Eigen::Index(1) << (2 * row.r)));
    CHECK(row.transform_seconds > 0.0);
    CHECK(row.solve_seconds > 0.0);
  }
  CHECK(std::isfinite(transform_slope(rows)));
  CHECK(std::isfinite(solve_slope(rows)));

  auto single = timing_sweep(cfg, {2});
  CHECK(std::isnan(transform_slope(single)));
  CHECK(std::isnan(solve_slope(single)));

  std::stringstream ss;
  write_timing_csv(ss, rows);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "r,n,transform_seconds,solve_seconds");
}

TEST_CASE("experiment forcing and initial data") {
  auto g = experiment_forcing();
  auto u0 = experiment_initial();
  const double two_pi = 2.0 * 3.14159265358979323846;
  CHECK(g(0.25, 0.0, 0.0) == doctest::Approx(std::sin(two_pi * 0.25)).epsilon(1e-14));
  CHECK(u0(0.25, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(u0(0.5, 0.25, 0.0)) <= 1e-14);
  // forcing matches the initial profile at t = 0
  CHECK(g(0.1, 0.2, 0.0) == doctest::Approx(u0(0.1, 0.2, 0.0)).epsilon(1e-13));
}
