#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gamblet/integrators.hpp"

namespace gamblet {

/// Flat key = value experiment description; experiments are data, not code.
struct ExperimentConfig {
  std::string problem = "elliptic";   // elliptic | wave | parabolic
  std::string coefficient = "rough";  // rough | laplacian | file:<path>
  int r = 3;
  std::string scheme = "midpoint";
  double dt = 0.1;
  double T = 1.0;
  double nl = -1.0;          // layers; < 0 means exact hierarchy
  std::vector<double> rho;   // per-level override of nl
  double eps = 1e-6;
  double tau = -1.0;         // elliptic shift; < 0 means tau = infinity
  bool multi_timestep = false;
  std::string out = "out";
  double reference_dt = 1.0 / 1280.0;
  std::string reference_scheme = "radau";
  unsigned seed = 1;
  int max_threads = 1;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(std::istream& is);
ExperimentConfig parse_config_file(const std::filesystem::path& path);
void serialize_config(std::ostream& os, const ExperimentConfig& cfg);
/// Throws std::invalid_argument naming the offending field.
void validate_config(const ExperimentConfig& cfg);

struct ExperimentResult {
  std::map<std::string, double> metrics;
  std::vector<std::filesystem::path> files;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct TimingRow {
  int r = 0;
  Eigen::Index n = 0;
  double transform_seconds = 0.0;
  double solve_seconds = 0.0;
};

std::vector<TimingRow> timing_sweep(const ExperimentConfig& cfg,
                                    const std::vector<int>& sizes);

/// Least-squares slope of log(transform time) vs log(N); NaN for fewer than
/// two sizes.
double transform_slope(const std::vector<TimingRow>& rows);
double solve_slope(const std::vector<TimingRow>& rows);

void write_timing_csv(std::ostream& os, const std::vector<TimingRow>& rows);

/// The forcing and initial data of the wave and heat experiments:
/// g = sin(2 pi (t + x1)) cos(2 pi (t + x2)).
SpatialFunction experiment_forcing();
/// sin(2 pi x1) cos(2 pi x2): wave initial velocity, heat initial value.
SpatialFunction experiment_initial();

}  // namespace gamblet
