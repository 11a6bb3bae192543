#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "gamblet/fem.hpp"
#include "gamblet/hierarchy.hpp"
#include "gamblet/integrators.hpp"

using namespace gamblet;

namespace {

// 1x1 model problem q' = -lambda q (M = 1, K = lambda), exact decay.
DirectProvider scalar_provider(double lambda) {
  SparseMatrix<double> m = SparseMatrix<double>::identity(1);
  SparseMatrix<double> k =
      SparseMatrix<double>::from_triplets(1, 1, {{0, 0, lambda}}, true);
  return DirectProvider(std::move(m), std::move(k));
}

double parabolic_model_error(Scheme s, double dt) {
  auto sp = scalar_provider(1.0);
  ParabolicState st{Vec<double>::Ones(1), 0.0};
  auto traj = run_parabolic(s, st, sp, dt, 1.0, zero_forcing(1));
  return std::abs(traj.states.back().q[0] - std::exp(-1.0));
}

// wave model q'' = -q (M = 1, K = 1), exact solution cos(t).
double wave_model_error(Scheme s, double dt) {
  auto sp = scalar_provider(1.0);
  WaveState st{Vec<double>::Ones(1), Vec<double>::Zero(1), 0.0};
  auto traj = run_wave(s, st, sp, dt, 1.0, zero_forcing(1));
  return std::abs(traj.states.back().q[0] - std::cos(1.0));
}

double observed_order(const std::function<double(double)>& err, double dt) {
  double e1 = err(dt), e2 = err(dt / 2.0);
  return std::log2(e1 / e2);
}

struct PdeSetup {
  OperatorAssembly asmb;
  Forcing forcing;
  Vec<double> q0, p0;
};

PdeSetup pde_setup(int r) {
  FemGrid grid{r};
  auto asmb = assemble(grid, rough_coefficient(r));
  const double two_pi = 2.0 * 3.14159265358979323846;
  Forcing f = [grid, two_pi](double t) {
    return load_vector(
        grid,
        [two_pi, t](double x, double y, double) {
          return std::sin(two_pi * (t + x)) * std::cos(two_pi * (t + y));
        },
        t);
  };
  Vec<double> q0 = Vec<double>::Zero(grid.n_interior());
  Vec<double> v0 = interpolate_nodes(
      grid,
      [two_pi](double x, double y, double) {
        return std::sin(two_pi * x) * std::cos(two_pi * y);
      },
      0.0);
  return {std::move(asmb), std::move(f), std::move(q0), std::move(v0)};
}

}  // namespace

TEST_CASE("tableau consistency") {
  for (auto tab : {dirk3(), sdirk3(), gl2(), radau_iia(), lobatto_iiic()}) {
    CAPTURE(tab.name);
    CHECK(std::abs(tab.b.sum() - 1.0) <= 1e-12);
    // published DIRK3 digits leave a 7e-11 gap in the third row sum
    for (int i = 0; i < tab.stages(); ++i)
      CHECK(std::abs(tab.a.row(i).sum() - tab.c[i]) <= 1e-10);
  }
  CHECK(dirk3().lower_triangular());
  CHECK(sdirk3().lower_triangular());
  CHECK(!gl2().lower_triangular());
  CHECK(!radau_iia().lower_triangular());
  CHECK(!lobatto_iiic().lower_triangular());

  double lam = sdirk3_lambda();
  CHECK(std::abs(1.0 / 6.0 - 1.5 * lam + 3.0 * lam * lam -
                 lam * lam * lam) <= 1e-14);
  CHECK(sdirk3().a(0, 0) == doctest::Approx(lam).epsilon(1e-14));
  CHECK((sdirk3().b.transpose() - sdirk3().a.row(2)).cwiseAbs().maxCoeff() ==
        0.0);

  // verbatim spot checks
  CHECK(dirk3().b[0] == 0.1008717264855379);
  CHECK(dirk3().a(2, 1) == -0.5944302919004032);
  CHECK(gl2().a(0, 1) == doctest::Approx(0.25 - std::sqrt(3.0) / 6.0).epsilon(1e-15));
  CHECK(radau_iia().c[2] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lobatto_iiic().a(0, 1) == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("tableau eigendecomposition reconstructs the RK matrix") {
  for (auto tab : {gl2(), radau_iia(), lobatto_iiic()}) {
    CAPTURE(tab.name);
    auto dec = tab.eigendecomposition();
    Dense<cplx> rebuilt =
        dec.s * dec.lambda.asDiagonal() * dec.s_inv;
    CHECK((rebuilt - tab.a.cast<cplx>()).cwiseAbs().maxCoeff() <= 1e-12);
    for (int i = 0; i < tab.stages(); ++i)
      CHECK(dec.lambda[i].real() > 0.0);
  }
  auto dec = gl2().eigendecomposition();
  // GL2 eigenvalues 1/4 +- i sqrt(3)/12
  for (int i = 0; i < 2; ++i) {
    CHECK(dec.lambda[i].real() == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(std::abs(dec.lambda[i].imag()) ==
          doctest::Approx(std::sqrt(3.0) / 12.0).epsilon(1e-13));
  }
}

TEST_CASE("scheme name round trip and tau sets") {
  for (Scheme s : {Scheme::implicit_euler, Scheme::midpoint, Scheme::trbdf2,
                   Scheme::dirk3, Scheme::sdirk3, Scheme::gl2,
                   Scheme::radau_iia, Scheme::lobatto_iiic})
    CHECK(scheme_from_name(scheme_name(s)) == s);
  CHECK_THROWS(scheme_from_name("nope"));

  double dt = 0.1;
  auto euler = scheme_taus(Scheme::implicit_euler, dt);
  REQUIRE(euler.size() == 1);
  CHECK(euler[0] == cplx(dt, 0.0));
  auto mid = scheme_taus(Scheme::midpoint, dt);
  REQUIRE(mid.size() == 1);
  CHECK(mid[0] == cplx(dt * dt / 4.0, 0.0));
  auto tr = scheme_taus(Scheme::trbdf2, dt);
  REQUIRE(tr.size() == 1);
  CHECK(tr[0].real() == doctest::Approx(kTrbdf2Gamma * dt / 2.0).epsilon(1e-15));
  CHECK(scheme_taus(Scheme::dirk3, dt).size() == 3);
}

TEST_CASE("scalar convergence orders") {
  struct Expect {
    Scheme s;
    double order;
  };
  const Expect table[] = {
      {Scheme::implicit_euler, 1.0}, {Scheme::midpoint, 2.0},
      {Scheme::trbdf2, 2.0},         {Scheme::dirk3, 3.0},
      {Scheme::sdirk3, 3.0},         {Scheme::gl2, 4.0},
      {Scheme::radau_iia, 5.0},      {Scheme::lobatto_iiic, 4.0},
  };
  for (auto [s, expect] : table) {
    CAPTURE(scheme_name(s));
    auto err = [s](double dt) {
      return s == Scheme::midpoint ? wave_model_error(s, dt)
                                   : parabolic_model_error(s, dt);
    };
    double base = s == Scheme::radau_iia || s == Scheme::lobatto_iiic ||
                          s == Scheme::gl2
                      ? 0.2
                      : 0.1;
    double order = observed_order(err, base);
    CHECK(order > expect - 0.3);
    CHECK(order < expect + 0.5);
  }
}

TEST_CASE("implicit Euler scalar amplification is 1/(1 + lambda dt)") {
  auto sp = scalar_provider(3.0);
  ParabolicState st{Vec<double>::Ones(1), 0.0};
  auto next = implicit_euler_step(st, sp, 0.25, Vec<double>::Zero(1));
  CHECK(next.q[0] == doctest::Approx(1.0 / (1.0 + 3.0 * 0.25)).epsilon(1e-14));
  CHECK(next.t == doctest::Approx(0.25));
}

TEST_CASE("midpoint scalar step is the Cayley rotation") {
  const double dt = 0.3, lam = 2.0;
  auto sp = scalar_provider(lam);
  WaveState st{Vec<double>::Ones(1), Vec<double>::Constant(1, 0.5), 0.0};
  auto next = midpoint_step(st, sp, dt, Vec<double>::Zero(1));
  // (q,p) advances by the Cayley transform of [[0,1],[-lam,0]]
  double a = dt * dt * lam / 4.0;
  double q = ((1.0 - a) * st.q[0] + dt * st.p[0]) / (1.0 + a);
  double p = st.p[0] - dt * lam * (st.q[0] + q) / 2.0;
  CHECK(next.q[0] == doctest::Approx(q).epsilon(1e-14));
  CHECK(next.p[0] == doctest::Approx(p).epsilon(1e-14));
}

TEST_CASE("free drift when K = 0") {
  SparseMatrix<double> m = SparseMatrix<double>::identity(2);
  SparseMatrix<double> k = SparseMatrix<double>::zero(2, 2);
  k.symmetric = true;
  DirectProvider sp(std::move(m), std::move(k));
  WaveState st{Vec<double>::Zero(2), Vec<double>::Ones(2), 0.0};
  auto next = midpoint_step(st, sp, 0.5, Vec<double>::Zero(2));
  CHECK((next.q - Vec<double>::Constant(2, 0.5)).cwiseAbs().maxCoeff() <=
        1e-14);
  CHECK((next.p - st.p).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("trbdf2 gamma balances the two stage operators") {
  CHECK(kTrbdf2Gamma == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-15));
  CHECK(kTrbdf2Gamma / 2.0 ==
        doctest::Approx((1.0 - kTrbdf2Gamma) / (2.0 - kTrbdf2Gamma))
            .epsilon(1e-13));
  // zero data and zero forcing stays exactly zero
  auto sp = scalar_provider(1.0);
  ParabolicState st{Vec<double>::Zero(1), 0.0};
  auto next = trbdf2_step(st, sp, 0.1, Vec<double>::Zero(1),
                          Vec<double>::Zero(1), Vec<double>::Zero(1));
  CHECK(next.q[0] == 0.0);
}

TEST_CASE("gamblet provider matches direct solves step by step") {
  const int r = 3;
  auto setup = pde_setup(r);
  for (Scheme s : {Scheme::midpoint, Scheme::implicit_euler, Scheme::trbdf2,
                   Scheme::dirk3, Scheme::gl2, Scheme::radau_iia}) {
    CAPTURE(scheme_name(s));
    DirectProvider direct(setup.asmb.mass, setup.asmb.stiffness);
    GambletProvider gamblet(setup.asmb, {});
    const double dt = 0.05;
    if (s == Scheme::midpoint || s == Scheme::gl2 || s == Scheme::radau_iia) {
      WaveState st{setup.q0, setup.asmb.mass.m * setup.p0, 0.0};
      auto a = run_wave(s, st, direct, dt, 5 * dt, setup.forcing);
      auto b = run_wave(s, st, gamblet, dt, 5 * dt, setup.forcing);
      double scale = a.states.back().q.cwiseAbs().maxCoeff() + 1.0;
      CHECK((a.states.back().q - b.states.back().q).cwiseAbs().maxCoeff() /
                scale <= 1e-9);
    } else {
      ParabolicState st{setup.q0, 0.0};
      auto a = run_parabolic(s, st, direct, dt, 5 * dt, setup.forcing);
      auto b = run_parabolic(s, st, gamblet, dt, 5 * dt, setup.forcing);
      double scale = a.states.back().q.cwiseAbs().maxCoeff() + 1.0;
      CHECK((a.states.back().q - b.states.back().q).cwiseAbs().maxCoeff() /
                scale <= 1e-9);
    }
  }
}

TEST_CASE("B-stability: contractive difference of parabolic flows") {
  const int r = 2;
  auto asmb = assemble(FemGrid{r}, rough_coefficient(r));
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (Scheme s : {Scheme::implicit_euler, Scheme::sdirk3, Scheme::gl2,
                   Scheme::radau_iia}) {
    CAPTURE(scheme_name(s));
    DirectProvider sp(asmb.mass, asmb.stiffness);
    for (int pair = 0; pair < 5; ++pair) {
      Vec<double> u(asmb.mass.rows()), v(asmb.mass.rows());
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        u[i] = unif(rng);
        v[i] = unif(rng);
      }
      ParabolicState su{u, 0.0}, sv{v, 0.0};
      double prev = std::sqrt((u - v).dot(asmb.mass.m * (u - v)));
      for (int step = 0; step < 10; ++step) {
        su = run_parabolic(s, su, sp, 0.1, 0.1, zero_forcing(u.size()))
                 .states.back();
        sv = run_parabolic(s, sv, sp, 0.1, 0.1, zero_forcing(u.size()))
                 .states.back();
        Vec<double> d = su.q - sv.q;
        double now = std::sqrt(d.dot(asmb.mass.m * d));
        CHECK(now <= prev * (1.0 + 1e-12));
        prev = now;
      }
    }
  }
}

TEST_CASE("unforced midpoint conserves the discrete energy") {
  const int r = 3;
  auto asmb = assemble(FemGrid{r}, rough_coefficient(r));
  DirectProvider sp(asmb.mass, asmb.stiffness);
  FemGrid grid{r};
  Vec<double> p0 = asmb.mass.m * interpolate_nodes(
                                     grid,
                                     [](double x, double y, double) {
                                       return std::sin(6.28318530717958647692 * x) *
                                              std::cos(6.28318530717958647692 * y);
                                     },
                                     0.0);
  WaveState st{Vec<double>::Zero(asmb.mass.rows()), p0, 0.0};
  auto traj = run_wave(Scheme::midpoint, st, sp, 0.05, 1.0,
                       zero_forcing(asmb.mass.rows()));
  double e0 = traj.energies.front();
  for (double e : traj.energies)
    CHECK(std::abs(e - e0) <= 1e-10 * std::max(1.0, e0));
}

TEST_CASE("forced midpoint obeys the square-root energy bound") {
  const int r = 3;
  auto setup = pde_setup(r);
  DirectProvider sp(setup.asmb.mass, setup.asmb.stiffness);
  WaveState st{setup.q0, setup.asmb.mass.m * setup.p0, 0.0};
  auto traj = run_wave(Scheme::midpoint, st, sp, 0.05, 1.0, setup.forcing);
  REQUIRE(traj.bound_lhs.size() == traj.bound_rhs.size());
  for (std::size_t i = 0; i < traj.bound_lhs.size(); ++i)
    CHECK(traj.bound_lhs[i] <= traj.bound_rhs[i] + 1e-12);
}

TEST_CASE("energy of trivial states") {
  auto sp = scalar_provider(1.0);
  WaveState zero{Vec<double>::Zero(1), Vec<double>::Zero(1), 0.0};
  CHECK(energy(zero, sp) == 0.0);
  WaveState e1{Vec<double>::Ones(1), Vec<double>::Zero(1), 0.0};
  CHECK(energy(e1, sp) == doctest::Approx(0.5).epsilon(1e-14));
  WaveState p1{Vec<double>::Zero(1), Vec<double>::Ones(1), 0.0};
  CHECK(energy(p1, sp) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("IRK stage combinations stay essentially real") {
  const int r = 2;
  auto setup = pde_setup(r);
  DirectProvider sp(setup.asmb.mass, setup.asmb.stiffness);
  WaveState st{setup.q0, setup.asmb.mass.m * setup.p0, 0.0};
  auto traj = run_wave(Scheme::radau_iia, st, sp, 0.1, 0.5, setup.forcing);
  CHECK(traj.imag_residue <= 1e-9);
  ParabolicState ps{setup.q0, 0.0};
  auto ptraj = run_parabolic(Scheme::gl2, ps, sp, 0.1, 0.5, setup.forcing);
  CHECK(ptraj.imag_residue <= 1e-9);
}

TEST_CASE("refinement depth and tail schedule") {
  CHECK(refinement_depth(1.0 / 10.0, 1.0 / 1280.0) == 7);
  CHECK(refinement_depth(0.1, 0.1) == 0);
  CHECK(refinement_depth(0.1, 0.05) == 1);

  for (double eps : {1.0 / 1280.0, 1e-3, 0.02}) {
    double dt = 0.1;
    auto tail = tail_schedule(dt, eps);
    int s = refinement_depth(dt, eps);
    REQUIRE(int(tail.size()) == s + 1);
    double sum = std::accumulate(tail.begin(), tail.end(), 0.0);
    CHECK(sum == doctest::Approx(dt).epsilon(1e-15));
    for (int i = 0; i + 1 < int(tail.size()); ++i)
      CHECK(tail[std::size_t(i)] == doctest::Approx(dt / std::pow(2.0, i + 1))
                                        .epsilon(1e-15));
    if (s >= 1) CHECK(tail.back() == tail[tail.size() - 2]);
  }
}

TEST_CASE("multi time stepping refines the endpoint") {
  const int r = 2;
  auto setup = pde_setup(r);
  ParabolicState st{setup.q0, 0.0};
  const double dt = 0.1, T = 0.5;

  DirectProvider ref_sp(setup.asmb.mass, setup.asmb.stiffness);
  ParabolicState ref{setup.q0, 0.0};
  auto fine = run_parabolic(Scheme::radau_iia, ref, ref_sp, 1.0 / 1280.0, T,
                            setup.forcing);
  const Vec<double>& exact = fine.states.back().q;

  DirectProvider sp_uniform(setup.asmb.mass, setup.asmb.stiffness);
  auto uniform = run_parabolic(Scheme::implicit_euler, st, sp_uniform, dt, T,
                               setup.forcing);
  double err_uniform =
      (uniform.states.back().q - exact).cwiseAbs().maxCoeff();

  DirectProvider sp_multi(setup.asmb.mass, setup.asmb.stiffness);
  std::vector<double> schedule;
  double eps = 1.0 / 1280.0;
  auto multi = multi_timestep_run(Scheme::implicit_euler, st, sp_multi, dt, T,
                                  eps, setup.forcing, &schedule);
  double err_multi = (multi.q - exact).cwiseAbs().maxCoeff();

  int s = refinement_depth(dt, eps);
  REQUIRE(int(schedule.size()) == int(T / dt) - 1 + s + 1);
  double total = std::accumulate(schedule.begin(), schedule.end(), 0.0);
  CHECK(total == doctest::Approx(T).epsilon(1e-13));
  CHECK(multi.t == doctest::Approx(T).epsilon(1e-12));

  CHECK(err_multi <= 2.0 * err_uniform);
  CHECK(sp_multi.shifted_solves() <= (long long)(T / dt) + 2 * s);
}

TEST_CASE("monotone accuracy of the tail in eps") {
  const int r = 2;
  auto setup = pde_setup(r);
  ParabolicState st{setup.q0, 0.0};
  const double dt = 0.1, T = 0.3;

  DirectProvider ref_sp(setup.asmb.mass, setup.asmb.stiffness);
  auto fine = run_parabolic(Scheme::radau_iia, st, ref_sp, 1.0 / 1280.0, T,
                            setup.forcing);
  const Vec<double>& exact = fine.states.back().q;

  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {0.05, 0.0125, 1.0 / 320.0}) {
    DirectProvider sp(setup.asmb.mass, setup.asmb.stiffness);
    auto multi = multi_timestep_run(Scheme::implicit_euler, st, sp, dt, T, eps,
                                    setup.forcing, nullptr);
    double err = (multi.q - exact).cwiseAbs().maxCoeff();
    CHECK(err <= prev * (1.0 + 1e-9));
    prev = err;
  }
}
