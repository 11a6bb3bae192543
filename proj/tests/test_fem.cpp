#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gamblet/fem.hpp"
#include "gamblet/solver.hpp"
#include "gamblet/transform.hpp"

using namespace gamblet;

namespace {

// Composite midpoint refinement of int phi_i g over the node's support,
// independent of the assembly's Gauss rule.
double refined_node_integral(const FemGrid& grid, int nx, int ny,
                             const SpatialFunction& g, double t) {
  const double h = grid.h();
  const double x0 = (nx + 1) * h, y0 = (ny + 1) * h;
  const int m = 24;
  double total = 0.0;
  for (int ex = -1; ex <= 0; ++ex)
    for (int ey = -1; ey <= 0; ++ey)
      for (int qx = 0; qx < m; ++qx)
        for (int qy = 0; qy < m; ++qy) {
          double x = x0 + (ex + (qx + 0.5) / m) * h;
          double y = y0 + (ey + (qy + 0.5) / m) * h;
          if (x <= 0.0 || x >= 1.0 || y <= 0.0 || y >= 1.0) continue;
          double phi = (1.0 - std::abs(x - x0) / h) * (1.0 - std::abs(y - y0) / h);
          total += phi * g(x, y, t) * (h / m) * (h / m);
        }
  return total;
}

}  // namespace

TEST_CASE("rough coefficient values") {
  auto coeff = rough_coefficient(6);
  // Every cosine/sine argument vanishes on cell (0,0): each factor is 1.5.
  CHECK(coeff.a_at(0, 0) == doctest::Approx(std::pow(1.5, 6)).epsilon(1e-13));
  CHECK(coeff.a_at(0, 0) == doctest::Approx(11.390625).epsilon(1e-13));
  CHECK(coeff.a_min() > 0.0);
  CHECK(coeff.a_max() / coeff.a_min() > 100.0);
  for (double mu : coeff.mu) CHECK(mu == 1.0);
}

TEST_CASE("coefficient grid round trip") {
  auto coeff = rough_coefficient(3);
  std::stringstream ss;
  write_coefficient_grid(ss, coeff);
  auto back = read_coefficient_grid(ss, 3);
  for (std::size_t i = 0; i < coeff.a.size(); ++i)
    CHECK(back.a[i] == doctest::Approx(coeff.a[i]).epsilon(1e-15));
}

TEST_CASE("coefficient positivity enforced") {
  std::vector<double> a(9, 1.0), mu(9, 1.0);
  a[4] = -1.0;
  CHECK_THROWS_AS(CoefficientField(1, a, mu), std::invalid_argument);
}

TEST_CASE("unit-coefficient stiffness and mass diagonals") {
  FemGrid grid{3};
  auto asmb = assemble(grid, CoefficientField::constant(3));
  const double h = grid.h();
  // Interior node away from the boundary: four full element contributions.
  Eigen::Index mid = (grid.nodes_per_side() / 2) * grid.nodes_per_side() +
                     grid.nodes_per_side() / 2;
  CHECK(asmb.stiffness.m.coeff(mid, mid) ==
        doctest::Approx(8.0 / 3.0).epsilon(1e-13));
  CHECK(asmb.mass.m.coeff(mid, mid) ==
        doctest::Approx(4.0 * h * h / 9.0).epsilon(1e-13));
}

TEST_CASE("mass and stiffness are symmetric positive definite") {
  FemGrid grid{3};
  auto asmb = assemble(grid, rough_coefficient(3));
  CHECK(asmb.mass.symmetric);
  CHECK(asmb.stiffness.symmetric);
  CHECK((asmb.mass.dense() - asmb.mass.dense().transpose()).norm() == 0.0);
  CHECK((asmb.stiffness.dense() - asmb.stiffness.dense().transpose()).norm() ==
        0.0);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vec<double> x(asmb.mass.rows());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = unif(rng);
    CHECK(x.dot(asmb.stiffness.m * x) > 0.0);
    CHECK(x.dot(asmb.mass.m * x) > 0.0);
  }
}

TEST_CASE("tau operator") {
  FemGrid grid{2};
  auto asmb = assemble(grid, rough_coefficient(2));
  auto shifted = tau_operator<double>(asmb, Tau::of(0.25));
  Dense<double> expect = asmb.mass.dense() + 0.25 * asmb.stiffness.dense();
  CHECK((shifted.dense() - expect).cwiseAbs().maxCoeff() <= 1e-15);

  auto pure = tau_operator<double>(asmb, Tau::infinity());
  CHECK((pure.dense() - asmb.stiffness.dense()).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(tau_operator<double>(asmb, Tau::of(0.0)),
                  std::invalid_argument);

  auto lam = cplx(0.1, 0.2);
  auto complex_shift = tau_operator<cplx>(asmb, Tau::of(lam));
  Dense<cplx> cexpect =
      asmb.mass.dense().cast<cplx>() + lam * asmb.stiffness.dense().cast<cplx>();
  CHECK((complex_shift.dense() - cexpect).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("load vector") {
  FemGrid grid{3};
  const double h = grid.h();
  auto zero = load_vector(grid, [](double, double, double) { return 0.0; }, 0.0);
  CHECK(zero.norm() == 0.0);

  auto ones = load_vector(grid, [](double, double, double) { return 1.0; }, 0.0);
  Eigen::Index mid = (grid.nodes_per_side() / 2) * grid.nodes_per_side() +
                     grid.nodes_per_side() / 2;
  CHECK(ones[mid] == doctest::Approx(h * h).epsilon(1e-13));
}

TEST_CASE("load vector vs refined quadrature") {
  FemGrid grid{4};
  SpatialFunction g = [](double x, double y, double) {
    return std::sin(3.14159265358979323846 * x) *
           std::cos(3.14159265358979323846 * y);
  };
  auto f = load_vector(grid, g, 0.0);
  for (auto [nx, ny] : {std::pair{0, 0}, {7, 7}, {3, 12}}) {
    double oracle = refined_node_integral(grid, nx, ny, g, 0.0);
    Eigen::Index idx = Eigen::Index(ny) * grid.nodes_per_side() + nx;
    CHECK(f[idx] == doctest::Approx(oracle).epsilon(1e-4));
  }
}

TEST_CASE("mass eigenvalues scale with h^2 and the inverse inequality holds") {
  double prev_c1 = 0.0;
  for (int r = 2; r <= 4; ++r) {
    FemGrid grid{r};
    auto asmb = assemble(grid, CoefficientField::constant(r));
    auto [mlo, mhi] = extreme_eigenvalues(asmb.mass);
    const double h2 = grid.h() * grid.h();
    CHECK(mlo / h2 > 0.05);
    CHECK(mhi / h2 < 5.0);
    auto [qlo, qhi] = generalized_extreme_eigenvalues(asmb.stiffness, asmb.mass);
    double c1 = std::sqrt(qhi) * grid.h();
    CHECK(c1 < 10.0);
    if (prev_c1 > 0.0)
      CHECK(c1 == doctest::Approx(prev_c1).epsilon(0.5));
    prev_c1 = c1;
    (void)qlo;
  }
}

TEST_CASE("transform output is invariant under global operator scaling") {
  FemGrid grid{3};
  auto asmb = assemble(grid, rough_coefficient(3));
  auto basis = std::make_shared<MultiresBasis>(3);
  Tau tau = Tau::of(0.01);
  auto op = tau_operator<double>(asmb, tau);
  auto scaled = scale(op, 7.5);
  auto gh = exact_transform<double>(op, basis, tau);
  auto gh_scaled = exact_transform<double>(scaled, basis, tau);
  for (int k = 2; k <= 3; ++k) {
    CHECK((gh.restriction[k].dense() - gh_scaled.restriction[k].dense())
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
    CHECK((gh.subband_coeffs[k].dense() - gh_scaled.subband_coeffs[k].dense())
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
  }
  CHECK((gh.basis_coeffs[1].dense() - gh_scaled.basis_coeffs[1].dense())
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
}
