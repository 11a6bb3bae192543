#include "gamblet/integrators.hpp"

#include <cmath>
#include <stdexcept>

namespace gamblet {

namespace {

std::pair<double, double> key_of(cplx tau) { return {tau.real(), tau.imag()}; }

double rel_imag(const Vec<cplx>& v) {
  double re = 0.0, im = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    re += v[i].real() * v[i].real();
    im += v[i].imag() * v[i].imag();
  }
  return std::sqrt(im) / std::max(std::sqrt(re), 1e-300);
}

int step_count(double dt, double T) {
  if (dt <= 0.0 || T <= 0.0)
    throw std::invalid_argument("run: need dt > 0 and T > 0");
  double n = T / dt;
  int ni = int(std::llround(n));
  if (std::abs(n - ni) > 1e-9)
    throw std::invalid_argument("run: dt must divide T");
  return ni;
}

}  // namespace

DirectProvider::DirectProvider(SparseMatrix<double> mass,
                               SparseMatrix<double> stiffness)
    : mass_(std::move(mass)), stiffness_(std::move(stiffness)) {
  if (mass_.rows() != mass_.cols() || stiffness_.rows() != stiffness_.cols() ||
      mass_.rows() != stiffness_.rows())
    throw DimensionMismatch("DirectProvider: M and K must be square and equal size");
  mass_solver_ = std::make_unique<SymmetricSolver<double>>(mass_);
}

Vec<double> DirectProvider::solve_mass(const Vec<double>& b) {
  return mass_solver_->solve(b);
}

Vec<double> DirectProvider::solve_shifted(double tau, const Vec<double>& b) {
  auto key = key_of(cplx(tau, 0.0));
  auto it = real_.find(key);
  if (it == real_.end()) {
    SparseMatrix<double> shifted = add(mass_, scale(stiffness_, tau));
    it = real_.emplace(key, std::make_unique<SymmetricSolver<double>>(shifted))
             .first;
  }
  ++shifted_solves_;
  return it->second->solve(b);
}

Vec<cplx> DirectProvider::solve_shifted(cplx tau, const Vec<cplx>& b) {
  auto key = key_of(tau);
  auto it = complex_.find(key);
  if (it == complex_.end()) {
    SparseMatrix<cplx> shifted =
        add(promote<cplx>(mass_), scale(promote<cplx>(stiffness_), tau));
    it = complex_.emplace(key, std::make_unique<SymmetricSolver<cplx>>(shifted))
             .first;
  }
  ++shifted_solves_;
  return it->second->solve(b);
}

void DirectProvider::prepare(cplx tau) {
  if (tau.imag() == 0.0)
    solve_shifted(tau.real(), Vec<double>::Zero(size()));
  else
    solve_shifted(tau, Vec<cplx>::Zero(size()));
  --shifted_solves_;
}

GambletProvider::GambletProvider(OperatorAssembly assembly, GambletOptions opts)
    : assembly_(std::move(assembly)), opts_(std::move(opts)) {
  basis_ = std::make_shared<MultiresBasis>(assembly_.grid.r);
  if (!opts_.rho.empty() && int(opts_.rho.size()) != assembly_.grid.r)
    throw std::invalid_argument("GambletProvider: rho size must equal r");
  mass_solver_ = std::make_unique<SymmetricSolver<double>>(assembly_.mass);
}

template <class S>
std::unique_ptr<MultiresSolver<S>> GambletProvider::build(Tau tau) {
  SparseMatrix<S> op = tau_operator<S>(assembly_, tau);
  auto gh = std::make_shared<GambletHierarchy<S>>(
      opts_.rho.empty()
          ? exact_transform<S>(op, basis_, tau, opts_.transform)
          : localized_transform<S>(op, basis_, opts_.rho, tau, opts_.transform));
  return std::make_unique<MultiresSolver<S>>(std::move(gh), opts_.tol);
}

const MultiresSolver<double>& GambletProvider::solver_for(double tau) {
  auto key = key_of(cplx(tau, 0.0));
  auto it = real_.find(key);
  if (it == real_.end())
    it = real_.emplace(key, build<double>(Tau::of(tau))).first;
  return *it->second;
}

const MultiresSolver<cplx>& GambletProvider::solver_for(cplx tau) {
  auto key = key_of(tau);
  auto it = complex_.find(key);
  if (it == complex_.end())
    it = complex_.emplace(key, build<cplx>(Tau::of(tau))).first;
  return *it->second;
}

Vec<double> GambletProvider::solve_mass(const Vec<double>& b) {
  return mass_solver_->solve(b);
}

Vec<double> GambletProvider::solve_shifted(double tau, const Vec<double>& b) {
  ++shifted_solves_;
  return solver_for(tau).solve(b).recombined;
}

Vec<cplx> GambletProvider::solve_shifted(cplx tau, const Vec<cplx>& b) {
  ++shifted_solves_;
  return solver_for(tau).solve(b).recombined;
}

void GambletProvider::prepare(cplx tau) {
  if (tau.imag() == 0.0)
    solver_for(tau.real());
  else
    solver_for(tau);
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "euler" || name == "implicit-euler") return Scheme::implicit_euler;
  if (name == "midpoint") return Scheme::midpoint;
  if (name == "trbdf2") return Scheme::trbdf2;
  if (name == "dirk3") return Scheme::dirk3;
  if (name == "sdirk3") return Scheme::sdirk3;
  if (name == "gl2") return Scheme::gl2;
  if (name == "radau") return Scheme::radau_iia;
  if (name == "lobatto") return Scheme::lobatto_iiic;
  throw std::invalid_argument("unknown scheme: " + name);
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::implicit_euler: return "euler";
    case Scheme::midpoint: return "midpoint";
    case Scheme::trbdf2: return "trbdf2";
    case Scheme::dirk3: return "dirk3";
    case Scheme::sdirk3: return "sdirk3";
    case Scheme::gl2: return "gl2";
    case Scheme::radau_iia: return "radau";
    case Scheme::lobatto_iiic: return "lobatto";
  }
  throw std::invalid_argument("unknown scheme tag");
}

std::vector<cplx> scheme_taus(Scheme s, double dt) {
  switch (s) {
    case Scheme::implicit_euler:
      return {cplx(dt, 0.0)};
    case Scheme::midpoint:
      return {cplx(dt * dt / 4.0, 0.0)};
    case Scheme::trbdf2:
      return {cplx(kTrbdf2Gamma * dt / 2.0, 0.0)};
    case Scheme::dirk3: {
      auto t = dirk3();
      return {cplx(dt * t.a(0, 0), 0.0), cplx(dt * t.a(1, 1), 0.0),
              cplx(dt * t.a(2, 2), 0.0)};
    }
    case Scheme::sdirk3:
      return {cplx(dt * sdirk3_lambda(), 0.0)};
    case Scheme::gl2: {
      auto dec = gl2().eigendecomposition();
      std::vector<cplx> out;
      for (Eigen::Index i = 0; i < dec.lambda.size(); ++i)
        out.push_back(dt * dt * dec.lambda[i] * dec.lambda[i]);
      return out;
    }
    case Scheme::radau_iia:
    case Scheme::lobatto_iiic: {
      auto dec = (s == Scheme::radau_iia ? radau_iia() : lobatto_iiic())
                     .eigendecomposition();
      std::vector<cplx> out;
      for (Eigen::Index i = 0; i < dec.lambda.size(); ++i)
        out.push_back(dt * dec.lambda[i]);
      return out;
    }
  }
  throw std::invalid_argument("unknown scheme tag");
}

WaveState midpoint_step(const WaveState& state, SolverProvider& sp, double dt,
                        const Vec<double>& f_mid) {
  const double tau = dt * dt / 4.0;
  const auto& m = sp.mass();
  const auto& k = sp.stiffness();
  Vec<double> rhs = spmv(m, state.q) - tau * spmv(k, state.q) + dt * state.p +
                    0.5 * dt * dt * f_mid;
  WaveState next;
  next.q = sp.solve_shifted(tau, rhs);
  next.p = state.p - 0.5 * dt * spmv(k, Vec<double>(state.q + next.q)) +
           dt * f_mid;
  next.t = state.t + dt;
  return next;
}

WaveState irk_wave_step(const WaveState& state, const ButcherTableau& tab,
                        SolverProvider& sp, double dt, const Forcing& f,
                        double* imag_residue) {
  const int s = tab.stages();
  const auto dec = tab.eigendecomposition();
  const auto& k = sp.stiffness();
  Vec<double> kq = spmv(k, state.q);

  // Stage blocks F_i = (p_n; -K q_n + f(t_n + c_i dt)); the transform by
  // S^{-1} (x) I decouples H into s shifted blocks per eigenvalue.
  std::vector<Vec<double>> fp(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) fp[std::size_t(i)] = f(state.t + tab.c[i] * dt) - kq;

  std::vector<Vec<cplx>> x(static_cast<std::size_t>(s)), y(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) {
    cplx lam = dec.lambda[i];
    cplx psum = 0.0;
    Vec<cplx> fpt = Vec<cplx>::Zero(state.q.size());
    for (int j = 0; j < s; ++j) {
      psum += dec.s_inv(i, j);
      fpt += dec.s_inv(i, j) * fp[std::size_t(j)].cast<cplx>();
    }
    Vec<cplx> fqt = psum * state.p.cast<cplx>();
    x[std::size_t(i)] =
        sp.solve_shifted(dt * dt * lam * lam, Vec<cplx>(fqt + dt * lam * fpt));
    y[std::size_t(i)] =
        fpt - dt * lam * (promote<cplx>(k).m * x[std::size_t(i)]);
  }

  Vec<cplx> dq = Vec<cplx>::Zero(state.q.size());
  Vec<cplx> dp = Vec<cplx>::Zero(state.q.size());
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      dq += tab.b[i] * dec.s(i, j) * x[std::size_t(j)];
      dp += tab.b[i] * dec.s(i, j) * y[std::size_t(j)];
    }
  if (imag_residue)
    *imag_residue = std::max(rel_imag(dq), rel_imag(dp));

  WaveState next;
  next.q = state.q + dt * dq.real();
  next.p = state.p + dt * dp.real();
  next.t = state.t + dt;
  return next;
}

ParabolicState implicit_euler_step(const ParabolicState& state,
                                   SolverProvider& sp, double dt,
                                   const Vec<double>& f_next) {
  Vec<double> rhs = spmv(sp.mass(), state.q) + dt * f_next;
  return {sp.solve_shifted(dt, rhs), state.t + dt};
}

ParabolicState trbdf2_step(const ParabolicState& state, SolverProvider& sp,
                           double dt, const Vec<double>& f0,
                           const Vec<double>& f_gamma, const Vec<double>& f1) {
  const double g = kTrbdf2Gamma;
  const double tau = g * dt / 2.0;
  const auto& m = sp.mass();
  const auto& k = sp.stiffness();
  Vec<double> rhs1 = spmv(m, state.q) - tau * spmv(k, state.q) +
                     0.5 * dt * (f0 + f_gamma);
  Vec<double> qg = sp.solve_shifted(tau, rhs1);
  const double d = g * (2.0 - g);
  Vec<double> rhs2 = spmv(m, qg) / d -
                     ((1.0 - g) * (1.0 - g) / d) * spmv(m, state.q) +
                     ((1.0 - g) / (2.0 - g)) * dt * f1;
  // (1-g)/(2-g) dt = g dt / 2 for g = 2 - sqrt(2): both solves share one tau.
  return {sp.solve_shifted(tau, rhs2), state.t + dt};
}

ParabolicState dirk_step(const ParabolicState& state, const ButcherTableau& tab,
                         SolverProvider& sp, double dt, const Forcing& f) {
  if (!tab.lower_triangular())
    throw std::invalid_argument("dirk_step: tableau not lower triangular: " +
                                tab.name);
  const int s = tab.stages();
  const auto& k = sp.stiffness();
  std::vector<Vec<double>> stage(static_cast<std::size_t>(s));
  Vec<double> next = state.q;
  for (int i = 0; i < s; ++i) {
    Vec<double> acc = state.q;
    for (int j = 0; j < i; ++j) acc += dt * tab.a(i, j) * stage[std::size_t(j)];
    Vec<double> rhs = f(state.t + tab.c[i] * dt) - spmv(k, acc);
    try {
      stage[std::size_t(i)] = sp.solve_shifted(dt * tab.a(i, i), rhs);
    } catch (const SolveFailure& e) {
      throw SolveFailure("stage " + std::to_string(i + 1) + ": " + e.what(),
                         e.residual);
    }
    next += dt * tab.b[i] * stage[std::size_t(i)];
  }
  return {std::move(next), state.t + dt};
}

ParabolicState irk_step(const ParabolicState& state, const ButcherTableau& tab,
                        SolverProvider& sp, double dt, const Forcing& f,
                        double* imag_residue) {
  const int s = tab.stages();
  const auto dec = tab.eigendecomposition();
  const auto& k = sp.stiffness();
  Vec<double> kq = spmv(k, state.q);
  std::vector<Vec<double>> fv(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) fv[std::size_t(i)] = f(state.t + tab.c[i] * dt) - kq;

  std::vector<Vec<cplx>> kt(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) {
    Vec<cplx> ft = Vec<cplx>::Zero(state.q.size());
    for (int j = 0; j < s; ++j)
      ft += dec.s_inv(i, j) * fv[std::size_t(j)].cast<cplx>();
    try {
      kt[std::size_t(i)] = sp.solve_shifted(dt * dec.lambda[i], ft);
    } catch (const SolveFailure& e) {
      throw SolveFailure("eigen-system " + std::to_string(i + 1) + ": " +
                             e.what(),
                         e.residual);
    }
  }
  Vec<cplx> dq = Vec<cplx>::Zero(state.q.size());
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j)
      dq += tab.b[i] * dec.s(i, j) * kt[std::size_t(j)];
  if (imag_residue) *imag_residue = rel_imag(dq);
  return {Vec<double>(state.q + dt * dq.real()), state.t + dt};
}

double energy(const WaveState& state, SolverProvider& sp) {
  double kinetic = 0.5 * state.p.dot(sp.solve_mass(state.p));
  double potential = 0.5 * state.q.dot(spmv(sp.stiffness(), state.q));
  return kinetic + potential;
}

WaveTrajectory run_wave(Scheme s, WaveState init, SolverProvider& sp, double dt,
                        double T, const Forcing& f) {
  const int n = step_count(dt, T);
  WaveTrajectory traj;
  traj.states.push_back(std::move(init));
  traj.energies.push_back(energy(traj.states.back(), sp));
  const double e0 = traj.energies.front();
  traj.bound_lhs.push_back(0.0);
  traj.bound_rhs.push_back(0.0);
  double forcing_sum = 0.0;

  for (int step = 0; step < n; ++step) {
    const WaveState& cur = traj.states.back();
    WaveState next;
    double residue = 0.0;
    switch (s) {
      case Scheme::midpoint: {
        Vec<double> fm = f(cur.t + 0.5 * dt);
        forcing_sum += std::sqrt(fm.dot(sp.solve_mass(fm)));
        next = midpoint_step(cur, sp, dt, fm);
        break;
      }
      case Scheme::gl2:
        next = irk_wave_step(cur, gl2(), sp, dt, f, &residue);
        break;
      case Scheme::radau_iia:
        next = irk_wave_step(cur, radau_iia(), sp, dt, f, &residue);
        break;
      case Scheme::lobatto_iiic:
        next = irk_wave_step(cur, lobatto_iiic(), sp, dt, f, &residue);
        break;
      default:
        throw std::invalid_argument("run_wave: scheme " + scheme_name(s) +
                                    " is not a wave integrator");
    }
    traj.imag_residue = std::max(traj.imag_residue, residue);
    traj.states.push_back(std::move(next));
    traj.energies.push_back(energy(traj.states.back(), sp));
    traj.bound_lhs.push_back(std::abs(std::sqrt(traj.energies.back()) -
                                      std::sqrt(e0)));
    traj.bound_rhs.push_back(dt * forcing_sum / std::sqrt(2.0));
  }
  return traj;
}

ParabolicTrajectory run_parabolic(Scheme s, ParabolicState init,
                                  SolverProvider& sp, double dt, double T,
                                  const Forcing& f) {
  const int n = step_count(dt, T);
  ParabolicTrajectory traj;
  traj.states.push_back(std::move(init));
  for (int step = 0; step < n; ++step) {
    const ParabolicState& cur = traj.states.back();
    ParabolicState next;
    double residue = 0.0;
    switch (s) {
      case Scheme::implicit_euler:
        next = implicit_euler_step(cur, sp, dt, f(cur.t + dt));
        break;
      case Scheme::trbdf2:
        next = trbdf2_step(cur, sp, dt, f(cur.t), f(cur.t + kTrbdf2Gamma * dt),
                           f(cur.t + dt));
        break;
      case Scheme::dirk3:
        next = dirk_step(cur, dirk3(), sp, dt, f);
        break;
      case Scheme::sdirk3:
        next = dirk_step(cur, sdirk3(), sp, dt, f);
        break;
      case Scheme::gl2:
        next = irk_step(cur, gl2(), sp, dt, f, &residue);
        break;
      case Scheme::radau_iia:
        next = irk_step(cur, radau_iia(), sp, dt, f, &residue);
        break;
      case Scheme::lobatto_iiic:
        next = irk_step(cur, lobatto_iiic(), sp, dt, f, &residue);
        break;
      default:
        throw std::invalid_argument("run_parabolic: scheme " + scheme_name(s) +
                                    " is not a parabolic integrator");
    }
    traj.imag_residue = std::max(traj.imag_residue, residue);
    traj.states.push_back(std::move(next));
  }
  return traj;
}

int refinement_depth(double dt, double eps) {
  if (!(eps > 0.0) || !(eps <= dt))
    throw std::invalid_argument("refinement_depth: need 0 < eps <= dt");
  int s = 0;
  while (dt / std::exp2(s) > eps) ++s;
  return s;
}

std::vector<double> tail_schedule(double dt, double eps) {
  const int s = refinement_depth(dt, eps);
  std::vector<double> steps;
  for (int j = 1; j <= s; ++j) steps.push_back(dt / std::exp2(j));
  steps.push_back(dt / std::exp2(s));
  return steps;
}

ParabolicState multi_timestep_run(Scheme s, ParabolicState init,
                                  SolverProvider& sp, double dt, double T,
                                  double eps, const Forcing& f,
                                  std::vector<double>* schedule) {
  const int n = step_count(dt, T);
  if (n < 1) throw std::invalid_argument("multi_timestep_run: T < dt");
  ParabolicState cur = std::move(init);
  for (int step = 0; step < n - 1; ++step)
    cur = run_parabolic(s, std::move(cur), sp, dt, dt, f).states.back();
  auto tail = tail_schedule(dt, eps);
  if (schedule) {
    schedule->assign(std::size_t(n) - 1, dt);
    schedule->insert(schedule->end(), tail.begin(), tail.end());
  }
  for (double h : tail)
    cur = run_parabolic(s, std::move(cur), sp, h, h, f).states.back();
  return cur;
}

}  // namespace gamblet
