#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gamblet/solve.hpp"
#include "gamblet/tableau.hpp"
#include "gamblet/transform.hpp"

namespace gamblet {

struct WaveState {
  Vec<double> q;  // displacement coefficients
  Vec<double> p;  // momentum, p = M qdot
  double t = 0.0;
};

struct ParabolicState {
  Vec<double> q;
  double t = 0.0;
};

/// Load vector at a given time.
using Forcing = std::function<Vec<double>(double)>;

inline Forcing zero_forcing(Eigen::Index n) {
  return [n](double) { return Vec<double>::Zero(n); };
}

/// Shifted solves (M + tau K) x = b backing the implicit steps. One provider
/// caches whatever it needs per distinct tau; every step only talks to this
/// interface, so the scalar convergence tests and the PDE runs share the
/// same stepping code.
class SolverProvider {
 public:
  virtual ~SolverProvider() = default;

  virtual Eigen::Index size() const = 0;
  virtual const SparseMatrix<double>& mass() const = 0;
  virtual const SparseMatrix<double>& stiffness() const = 0;

  virtual Vec<double> solve_mass(const Vec<double>& b) = 0;
  virtual Vec<double> solve_shifted(double tau, const Vec<double>& b) = 0;
  virtual Vec<cplx> solve_shifted(cplx tau, const Vec<cplx>& b) = 0;

  /// Build (and cache) the machinery for one tau ahead of stepping.
  virtual void prepare(cplx tau) = 0;

  long long shifted_solves() const { return shifted_solves_; }

 protected:
  long long shifted_solves_ = 0;
};

/// Direct sparse factorizations per tau. The oracle route and the scalar
/// model problems use this.
class DirectProvider : public SolverProvider {
 public:
  DirectProvider(SparseMatrix<double> mass, SparseMatrix<double> stiffness);

  Eigen::Index size() const override { return mass_.rows(); }
  const SparseMatrix<double>& mass() const override { return mass_; }
  const SparseMatrix<double>& stiffness() const override { return stiffness_; }
  Vec<double> solve_mass(const Vec<double>& b) override;
  Vec<double> solve_shifted(double tau, const Vec<double>& b) override;
  Vec<cplx> solve_shifted(cplx tau, const Vec<cplx>& b) override;
  void prepare(cplx tau) override;

 private:
  using Key = std::pair<double, double>;
  SparseMatrix<double> mass_, stiffness_;
  std::unique_ptr<SymmetricSolver<double>> mass_solver_;
  std::map<Key, std::unique_ptr<SymmetricSolver<double>>> real_;
  std::map<Key, std::unique_ptr<SymmetricSolver<cplx>>> complex_;
};

struct GambletOptions {
  std::vector<double> rho;  // empty: exact transform
  double tol = 1e-12;
  TransformOptions transform;
};

/// Shifted solves through the multiresolution decomposition: one hierarchy
/// per distinct tau, built on first use and reused for every later step.
class GambletProvider : public SolverProvider {
 public:
  GambletProvider(OperatorAssembly assembly, GambletOptions opts = {});

  Eigen::Index size() const override { return assembly_.mass.rows(); }
  const SparseMatrix<double>& mass() const override { return assembly_.mass; }
  const SparseMatrix<double>& stiffness() const override {
    return assembly_.stiffness;
  }
  Vec<double> solve_mass(const Vec<double>& b) override;
  Vec<double> solve_shifted(double tau, const Vec<double>& b) override;
  Vec<cplx> solve_shifted(cplx tau, const Vec<cplx>& b) override;
  void prepare(cplx tau) override;

  const MultiresSolver<double>& solver_for(double tau);
  const MultiresSolver<cplx>& solver_for(cplx tau);

 private:
  using Key = std::pair<double, double>;
  OperatorAssembly assembly_;
  GambletOptions opts_;
  std::shared_ptr<const MultiresBasis> basis_;
  std::unique_ptr<SymmetricSolver<double>> mass_solver_;
  std::map<Key, std::unique_ptr<MultiresSolver<double>>> real_;
  std::map<Key, std::unique_ptr<MultiresSolver<cplx>>> complex_;

  template <class S>
  std::unique_ptr<MultiresSolver<S>> build(Tau tau);
};

enum class Scheme {
  implicit_euler,
  midpoint,
  trbdf2,
  dirk3,
  sdirk3,
  gl2,
  radau_iia,
  lobatto_iiic,
};

Scheme scheme_from_name(const std::string& name);
std::string scheme_name(Scheme s);

/// TR-BDF2 stage fraction 2 - sqrt(2), the choice with gamma/2 = (1-gamma)/(2-gamma).
inline constexpr double kTrbdf2Gamma = 0.585786437626904951;

/// tau = zeta^2/4 values a scheme touches at step size dt; one hierarchy per
/// distinct value.
std::vector<cplx> scheme_taus(Scheme s, double dt);

WaveState midpoint_step(const WaveState& state, SolverProvider& sp, double dt,
                        const Vec<double>& f_mid);
WaveState irk_wave_step(const WaveState& state, const ButcherTableau& tab,
                        SolverProvider& sp, double dt, const Forcing& f,
                        double* imag_residue = nullptr);

ParabolicState implicit_euler_step(const ParabolicState& state,
                                   SolverProvider& sp, double dt,
                                   const Vec<double>& f_next);
ParabolicState trbdf2_step(const ParabolicState& state, SolverProvider& sp,
                           double dt, const Vec<double>& f0,
                           const Vec<double>& f_gamma, const Vec<double>& f1);
ParabolicState dirk_step(const ParabolicState& state, const ButcherTableau& tab,
                         SolverProvider& sp, double dt, const Forcing& f);
ParabolicState irk_step(const ParabolicState& state, const ButcherTableau& tab,
                        SolverProvider& sp, double dt, const Forcing& f,
                        double* imag_residue = nullptr);

double energy(const WaveState& state, SolverProvider& sp);

struct WaveTrajectory {
  std::vector<WaveState> states;
  std::vector<double> energies;
  /// Per step n: |sqrt(E_n) - sqrt(E_0)| and the forced-energy bound
  /// dt * 2^{-1/2} * sum_{k<n} |f_{k+1/2}|_{M^{-1}}.
  std::vector<double> bound_lhs, bound_rhs;
  double imag_residue = 0.0;  // worst stage-combination residue (IRK schemes)
};

struct ParabolicTrajectory {
  std::vector<ParabolicState> states;
  double imag_residue = 0.0;
};

WaveTrajectory run_wave(Scheme s, WaveState init, SolverProvider& sp, double dt,
                        double T, const Forcing& f);
ParabolicTrajectory run_parabolic(Scheme s, ParabolicState init,
                                  SolverProvider& sp, double dt, double T,
                                  const Forcing& f);

/// Smallest s with dt/2^s <= eps.
int refinement_depth(double dt, double eps);
/// Tail steps dt/2, dt/4, ..., dt/2^s, dt/2^s; sums to dt exactly.
std::vector<double> tail_schedule(double dt, double eps);

/// Uniform steps of dt up to T - dt, then the refined tail over the last
/// coarse interval. Each distinct step size reuses one cached hierarchy.
ParabolicState multi_timestep_run(Scheme s, ParabolicState init,
                                  SolverProvider& sp, double dt, double T,
                                  double eps, const Forcing& f,
                                  std::vector<double>* schedule = nullptr);

}  // namespace gamblet
