#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gamblet/diagnostics.hpp"
#include "gamblet/experiment.hpp"

namespace {

using namespace gamblet;

struct CommonArgs {
  std::string config_path;
  int r = -1;
  double nl = -2.0;
  double dt = -1.0;
  std::string scheme;
  std::string out;
  int max_threads = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("config", args.config_path, "experiment config file");
  cmd->add_option("--r", args.r, "hierarchy depth override");
  cmd->add_option("--nl", args.nl, "localization layers override (-1 = exact)");
  cmd->add_option("--dt", args.dt, "time step override");
  cmd->add_option("--scheme", args.scheme, "integrator override");
  cmd->add_option("--out", args.out, "output directory override");
  cmd->add_option("--max-threads", args.max_threads, "thread cap override");
}

ExperimentConfig load_config(const CommonArgs& args) {
  ExperimentConfig cfg;
  if (!args.config_path.empty()) cfg = parse_config_file(args.config_path);
  if (args.r >= 0) cfg.r = args.r;
  if (args.nl >= -1.0) cfg.nl = args.nl;
  if (args.dt > 0.0) cfg.dt = args.dt;
  if (!args.scheme.empty()) cfg.scheme = args.scheme;
  if (!args.out.empty()) cfg.out = args.out;
  if (args.max_threads >= 1) cfg.max_threads = args.max_threads;
  if (cfg.max_threads == 1)
    if (const char* env = std::getenv("GAMBLET_MAX_THREADS"))
      cfg.max_threads = std::max(1, std::atoi(env));
  return cfg;
}

int report(const ExperimentResult& result) {
  for (const auto& [key, value] : result.metrics)
    std::cout << key << " = " << value << '\n';
  for (const auto& file : result.files) std::cout << "wrote " << file << '\n';
  return 0;
}

int run_with(ExperimentConfig cfg) {
  return report(run_experiment(cfg));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gamblet multiresolution solver experiments"};
  app.require_subcommand(1);

  CommonArgs run_args, cond_args, decay_args, wave_args, para_args, multi_args;
  CommonArgs timing_args;
  std::vector<int> timing_sizes{3, 4, 5, 6};

  add_common(app.add_subcommand("run", "run an experiment config"), run_args);
  add_common(app.add_subcommand(
                 "fig-condition-numbers",
                 "per-level condition numbers of an elliptic hierarchy"),
             cond_args);
  add_common(app.add_subcommand("fig-decay",
                                "energy decay profile of one coarse gamblet"),
             decay_args);
  add_common(app.add_subcommand("fig-wave-errors",
                                "wave run with errors vs a fine reference"),
             wave_args);
  add_common(app.add_subcommand("fig-parabolic-errors",
                                "heat run with errors vs a fine reference"),
             para_args);
  add_common(app.add_subcommand("fig-multi-timestep",
                                "tail-refined heat run and its schedule"),
             multi_args);
  auto* timing = app.add_subcommand("timing-sweep",
                                    "transform/solve wall time across sizes");
  add_common(timing, timing_args);
  timing->add_option("--sizes", timing_sizes, "hierarchy depths to sweep");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("run")) return run_with(load_config(run_args));
    if (app.got_subcommand("fig-condition-numbers")) {
      ExperimentConfig cfg = load_config(cond_args);
      cfg.problem = "elliptic";
      return run_with(cfg);
    }
    if (app.got_subcommand("fig-decay")) {
      ExperimentConfig cfg = load_config(decay_args);
      cfg.problem = "elliptic";
      validate_config(cfg);
      FemGrid grid{cfg.r};
      OperatorAssembly asmb = assemble(
          grid, cfg.coefficient == "laplacian" ? CoefficientField::constant(cfg.r)
                                               : rough_coefficient(cfg.r));
      CellHierarchy hier(cfg.r);
      auto gh = std::make_shared<GambletHierarchy<double>>(
          exact_transform<double>(asmb, hier, Tau::infinity()));
      std::filesystem::create_directories(cfg.out);
      std::ofstream os(std::filesystem::path(cfg.out) / "decay.csv");
      os << "figure,level,metric,value\n";
      for (int k = 1; k <= cfg.r; ++k) {
        auto profile = decay_profile(*gh, k, IndexTree::cell_count(k) / 2);
        for (const auto& [radius, frac] : profile)
          os << "decay," << k << ",radius_" << radius << ',' << frac << '\n';
      }
      std::cout << "wrote " << cfg.out << "/decay.csv\n";
      return 0;
    }
    if (app.got_subcommand("fig-wave-errors")) {
      ExperimentConfig cfg = load_config(wave_args);
      cfg.problem = "wave";
      if (wave_args.scheme.empty()) cfg.scheme = "midpoint";
      return run_with(cfg);
    }
    if (app.got_subcommand("fig-parabolic-errors")) {
      ExperimentConfig cfg = load_config(para_args);
      cfg.problem = "parabolic";
      if (para_args.scheme.empty()) cfg.scheme = "trbdf2";
      return run_with(cfg);
    }
    if (app.got_subcommand("fig-multi-timestep")) {
      ExperimentConfig cfg = load_config(multi_args);
      cfg.problem = "parabolic";
      if (multi_args.scheme.empty()) cfg.scheme = "euler";
      cfg.multi_timestep = true;
      if (cfg.eps >= cfg.dt) cfg.eps = 1.0 / 1280.0;
      return run_with(cfg);
    }
    if (app.got_subcommand("timing-sweep")) {
      ExperimentConfig cfg = load_config(timing_args);
      auto rows = timing_sweep(cfg, timing_sizes);
      std::filesystem::create_directories(cfg.out);
      auto path = std::filesystem::path(cfg.out) / "timing.csv";
      std::ofstream os(path);
      write_timing_csv(os, rows);
      std::cout << "wrote " << path << '\n';
      if (rows.size() >= 2) {
        std::cout << "transform_slope = " << transform_slope(rows) << '\n';
        std::cout << "solve_slope = " << solve_slope(rows) << '\n';
      }
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const SolveFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
