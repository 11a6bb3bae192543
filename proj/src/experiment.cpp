#include "gamblet/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include <json.hpp>

#include "gamblet/diagnostics.hpp"
#include "gamblet/mm_io.hpp"

namespace gamblet {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

std::string format_list(const std::vector<double>& v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  return os.str();
}

CoefficientField coefficient_of(const ExperimentConfig& cfg) {
  if (cfg.coefficient == "rough") return rough_coefficient(cfg.r);
  if (cfg.coefficient == "laplacian") return CoefficientField::constant(cfg.r);
  if (cfg.coefficient.rfind("file:", 0) == 0) {
    std::ifstream is(cfg.coefficient.substr(5));
    if (!is)
      throw std::invalid_argument("coefficient: cannot read " +
                                  cfg.coefficient.substr(5));
    return read_coefficient_grid(is, cfg.r);
  }
  throw std::invalid_argument("coefficient: unknown choice " + cfg.coefficient);
}

std::vector<double> rho_of(const ExperimentConfig& cfg) {
  if (!cfg.rho.empty()) return cfg.rho;
  if (cfg.nl >= 0.0) return uniform_layers(cfg.r, cfg.nl);
  return {};
}

double now_minus(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

SpatialFunction experiment_forcing() {
  return [](double x, double y, double t) {
    return std::sin(2.0 * kPi * (t + x)) * std::cos(2.0 * kPi * (t + y));
  };
}

SpatialFunction experiment_initial() {
  return [](double x, double y, double) {
    return std::sin(2.0 * kPi * x) * std::cos(2.0 * kPi * y);
  };
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": expected key = value");
      continue;
    }
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "problem") cfg.problem = value;
      else if (key == "coefficient") cfg.coefficient = value;
      else if (key == "r") cfg.r = std::stoi(value);
      else if (key == "scheme") cfg.scheme = value;
      else if (key == "dt") cfg.dt = std::stod(value);
      else if (key == "T") cfg.T = std::stod(value);
      else if (key == "nl") cfg.nl = std::stod(value);
      else if (key == "rho") cfg.rho = parse_list(value);
      else if (key == "eps") cfg.eps = std::stod(value);
      else if (key == "tau") cfg.tau = std::stod(value);
      else if (key == "multi_timestep") cfg.multi_timestep = value == "1" || value == "true";
      else if (key == "out") cfg.out = value;
      else if (key == "reference_dt") cfg.reference_dt = std::stod(value);
      else if (key == "reference_scheme") cfg.reference_scheme = value;
      else if (key == "seed") cfg.seed = unsigned(std::stoul(value));
      else if (key == "max_threads") cfg.max_threads = std::stoi(value);
      else
        throw std::invalid_argument("unknown key");
    } catch (const std::exception& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " (" + key + "): " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot read " + path.string());
  return parse_config(is);
}

void serialize_config(std::ostream& os, const ExperimentConfig& cfg) {
  os << std::setprecision(17);
  os << "problem = " << cfg.problem << '\n';
  os << "coefficient = " << cfg.coefficient << '\n';
  os << "r = " << cfg.r << '\n';
  os << "scheme = " << cfg.scheme << '\n';
  os << "dt = " << cfg.dt << '\n';
  os << "T = " << cfg.T << '\n';
  os << "nl = " << cfg.nl << '\n';
  if (!cfg.rho.empty()) os << "rho = " << format_list(cfg.rho) << '\n';
  os << "eps = " << cfg.eps << '\n';
  os << "tau = " << cfg.tau << '\n';
  os << "multi_timestep = " << (cfg.multi_timestep ? 1 : 0) << '\n';
  os << "out = " << cfg.out << '\n';
  os << "reference_dt = " << cfg.reference_dt << '\n';
  os << "reference_scheme = " << cfg.reference_scheme << '\n';
  os << "seed = " << cfg.seed << '\n';
  os << "max_threads = " << cfg.max_threads << '\n';
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.problem != "elliptic" && cfg.problem != "wave" &&
      cfg.problem != "parabolic")
    throw std::invalid_argument("problem: must be elliptic, wave, or parabolic");
  if (cfg.r < 1 || cfg.r > 10)
    throw std::invalid_argument("r: must be in [1, 10]");
  coefficient_of(cfg);  // rejects unknown choices and missing files
  if (cfg.problem != "elliptic") {
    scheme_from_name(cfg.scheme);  // rejects unknown tags
    if (cfg.dt <= 0.0) throw std::invalid_argument("dt: must be positive");
    if (cfg.T <= 0.0) throw std::invalid_argument("T: must be positive");
    double n = cfg.T / cfg.dt;
    if (std::abs(n - std::llround(n)) > 1e-12)
      throw std::invalid_argument("dt: must divide T");
  }
  if (!cfg.rho.empty() && int(cfg.rho.size()) != cfg.r)
    throw std::invalid_argument("rho: need one radius per level");
  if (cfg.eps <= 0.0) throw std::invalid_argument("eps: must be positive");
  if (cfg.multi_timestep && cfg.eps >= cfg.dt)
    throw std::invalid_argument("eps: multi_timestep needs eps < dt");
  if (cfg.max_threads < 1)
    throw std::invalid_argument("max_threads: must be at least 1");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  ExperimentResult result;
  const std::filesystem::path out(cfg.out);
  std::filesystem::create_directories(out);

  CoefficientField coeff = coefficient_of(cfg);
  FemGrid grid{cfg.r};
  OperatorAssembly asmb = assemble(grid, coeff);
  std::vector<double> rho = rho_of(cfg);
  TransformOptions topts;
  topts.max_threads = cfg.max_threads;

  auto record_csv = [&result](const std::filesystem::path& path) {
    result.files.push_back(path);
  };

  if (cfg.problem == "elliptic") {
    Tau tau = cfg.tau > 0.0 ? Tau::of(cfg.tau) : Tau::infinity();
    auto basis = std::make_shared<MultiresBasis>(cfg.r);
    SparseMatrix<double> op = tau_operator<double>(asmb, tau);
    auto gh = std::make_shared<GambletHierarchy<double>>(
        rho.empty() ? exact_transform<double>(op, basis, tau, topts)
                    : localized_transform<double>(op, basis, rho, tau, topts));
    write_hierarchy(out / "hierarchy", *gh);
    record_csv(out / "hierarchy" / "manifest.json");

    MultiresSolver<double> solver(gh);
    std::mt19937 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Vec<double> g(gh->fine_size());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = unif(rng);
    auto sol = solver.solve(g);
    double residual =
        (op.m * sol.recombined - g).norm() / std::max(g.norm(), 1e-300);
    result.metrics["residual"] = residual;

    {
      std::ofstream os(out / "subbands.csv");
      os << std::setprecision(17);
      write_subband_csv(os, sol);
      record_csv(out / "subbands.csv");
    }
    {
      auto reports = condition_report(*gh);
      std::ofstream os(out / "condition.csv");
      os << std::setprecision(17);
      write_condition_csv(os, "condition-numbers", reports);
      record_csv(out / "condition.csv");
      result.metrics["condition_slope"] = condition_slope(reports);
    }
  } else {
    GambletOptions gopts;
    gopts.rho = rho;
    gopts.transform = topts;
    GambletProvider provider(asmb, gopts);
    Scheme scheme = scheme_from_name(cfg.scheme);
    Forcing f = [&grid](double t) {
      return load_vector(grid, experiment_forcing(), t);
    };

    std::ofstream traj_os(out / "trajectory.csv");
    traj_os << std::setprecision(17);
    record_csv(out / "trajectory.csv");

    Vec<double> final_q;
    if (cfg.problem == "wave") {
      WaveState init;
      init.q = Vec<double>::Zero(grid.n_interior());
      init.p = load_vector(grid, experiment_initial(), 0.0);
      auto traj = run_wave(scheme, std::move(init), provider, cfg.dt, cfg.T, f);
      traj_os << "step,t,energy,bound_lhs,bound_rhs\n";
      for (std::size_t n = 0; n < traj.states.size(); ++n)
        traj_os << n << ',' << traj.states[n].t << ',' << traj.energies[n]
                << ',' << traj.bound_lhs[n] << ',' << traj.bound_rhs[n] << '\n';
      result.metrics["final_energy"] = traj.energies.back();
      result.metrics["imag_residue"] = traj.imag_residue;
      final_q = traj.states.back().q;
    } else {
      ParabolicState init;
      init.q = interpolate_nodes(grid, experiment_initial(), 0.0);
      if (cfg.multi_timestep) {
        std::vector<double> schedule;
        long long before = provider.shifted_solves();
        auto fin = multi_timestep_run(scheme, std::move(init), provider, cfg.dt,
                                      cfg.T, cfg.eps, f, &schedule);
        result.metrics["refinement_depth"] =
            double(refinement_depth(cfg.dt, cfg.eps));
        result.metrics["hierarchy_solves"] =
            double(provider.shifted_solves() - before);
        traj_os << "stage,step_size\n";
        for (std::size_t j = 0; j < schedule.size(); ++j)
          traj_os << j << ',' << schedule[j] << '\n';
        final_q = fin.q;
        result.metrics["final_t"] = fin.t;
      } else {
        auto traj =
            run_parabolic(scheme, std::move(init), provider, cfg.dt, cfg.T, f);
        traj_os << "step,t,l2_norm\n";
        for (std::size_t n = 0; n < traj.states.size(); ++n)
          traj_os << n << ',' << traj.states[n].t << ','
                  << traj.states[n].q.norm() << '\n';
        result.metrics["imag_residue"] = traj.imag_residue;
        final_q = traj.states.back().q;
      }
    }

    // Reference route: fully direct solves, no hierarchy, fine time step.
    double nref = cfg.T / cfg.reference_dt;
    if (std::abs(nref - std::llround(nref)) < 1e-9) {
      DirectProvider ref_provider(asmb.mass, asmb.stiffness);
      Scheme ref_scheme = scheme_from_name(cfg.reference_scheme);
      Vec<double> ref_q;
      if (cfg.problem == "wave") {
        WaveState init;
        init.q = Vec<double>::Zero(grid.n_interior());
        init.p = load_vector(grid, experiment_initial(), 0.0);
        ref_q = run_wave(ref_scheme, std::move(init), ref_provider,
                         cfg.reference_dt, cfg.T, f)
                    .states.back()
                    .q;
      } else {
        ParabolicState init;
        init.q = interpolate_nodes(grid, experiment_initial(), 0.0);
        ref_q = run_parabolic(ref_scheme, std::move(init), ref_provider,
                              cfg.reference_dt, cfg.T, f)
                    .states.back()
                    .q;
      }
      auto err = error_norms(final_q, ref_q, asmb);
      result.metrics["h1_error"] = err.h1;
      result.metrics["l2_error"] = err.l2;
      result.metrics["rel_energy_error"] = err.rel_energy;
    }

    {
      double probe_tau = cfg.dt * cfg.dt / 4.0;
      for (cplx t : scheme_taus(scheme, cfg.dt))
        if (t.imag() == 0.0 && t.real() > 0.0) {
          probe_tau = t.real();
          break;
        }
      auto sol = provider.solver_for(probe_tau).subband_components(final_q);
      std::ofstream os(out / "subbands.csv");
      os << std::setprecision(17);
      write_subband_csv(os, sol);
      record_csv(out / "subbands.csv");
    }
  }

  nlohmann::json summary;
  for (const auto& [key, value] : result.metrics) summary[key] = value;
  std::ofstream os(out / "summary.json");
  os << summary.dump(2) << '\n';
  result.files.push_back(out / "summary.json");
  return result;
}

std::vector<TimingRow> timing_sweep(const ExperimentConfig& cfg,
                                    const std::vector<int>& sizes) {
  std::vector<TimingRow> rows;
  for (int r : sizes) {
    ExperimentConfig local = cfg;
    local.r = r;
    CoefficientField coeff = coefficient_of(local);
    FemGrid grid{r};
    OperatorAssembly asmb = assemble(grid, coeff);
    std::vector<double> rho = rho_of(local);
    if (rho.empty()) rho = uniform_layers(r, 3.0);
    Tau tau = Tau::of(cfg.dt * cfg.dt / 4.0);
    SparseMatrix<double> op = tau_operator<double>(asmb, tau);
    auto basis = std::make_shared<MultiresBasis>(r);
    TransformOptions topts;
    topts.max_threads = cfg.max_threads;

    TimingRow row;
    row.r = r;
    row.n = grid.n_interior();
    auto t0 = std::chrono::steady_clock::now();
    auto gh = std::make_shared<GambletHierarchy<double>>(
        localized_transform<double>(op, basis, rho, tau, topts));
    row.transform_seconds = now_minus(t0);

    MultiresSolver<double> solver(gh);
    std::mt19937 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Vec<double> g(gh->fine_size());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = unif(rng);
    t0 = std::chrono::steady_clock::now();
    auto sol = solver.solve(g);
    row.solve_seconds = now_minus(t0);
    (void)sol;
    rows.push_back(row);
  }
  return rows;
}

namespace {

double timing_slope(const std::vector<TimingRow>& rows, bool transform) {
  if (rows.size() < 2) return std::nan("");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = double(rows.size());
  for (const auto& row : rows) {
    double x = std::log(double(row.n));
    double y = std::log(std::max(
        transform ? row.transform_seconds : row.solve_seconds, 1e-9));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

double transform_slope(const std::vector<TimingRow>& rows) {
  return timing_slope(rows, true);
}

double solve_slope(const std::vector<TimingRow>& rows) {
  return timing_slope(rows, false);
}

void write_timing_csv(std::ostream& os, const std::vector<TimingRow>& rows) {
  os << "r,n,transform_seconds,solve_seconds\n";
  os << std::setprecision(17);
  for (const auto& row : rows)
    os << row.r << ',' << row.n << ',' << row.transform_seconds << ','
       << row.solve_seconds << '\n';
}

}  // namespace gamblet
