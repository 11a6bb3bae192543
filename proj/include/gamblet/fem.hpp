#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "gamblet/sparse.hpp"

namespace gamblet {

/// Piecewise-constant a and mu on the (2^r+1)x(2^r+1) fine mesh cells,
/// row-major (cell (i,j) covers [i*h,(i+1)*h) x [j*h,(j+1)*h)).
struct CoefficientField {
  int r = 0;
  std::vector<double> a;   // (2^r+1)^2 values
  std::vector<double> mu;  // same layout

  CoefficientField(int r_, std::vector<double> a_, std::vector<double> mu_);

  int cells_per_side() const { return (1 << r) + 1; }
  double a_at(int i, int j) const { return a[std::size_t(j) * cells_per_side() + i]; }
  double mu_at(int i, int j) const { return mu[std::size_t(j) * cells_per_side() + i]; }

  double a_min() const;
  double a_max() const;

  static CoefficientField constant(int r, double a_value = 1.0,
                                   double mu_value = 1.0);
};

/// A rough multiscale product coefficient spanning r
/// oscillatory factors per mesh cell, mu = 1.
CoefficientField rough_coefficient(int r);

/// Plain-text grid import/export (row-major, one line per cell row).
void write_coefficient_grid(std::ostream& os, const CoefficientField& c);
CoefficientField read_coefficient_grid(std::istream& is, int r);

/// Bilinear quadrilaterals on the uniform mesh of size h = 1/(2^r+1) with
/// homogeneous Dirichlet boundary; N = 4^r interior nodes. Interior node
/// (i,j) (1-based mesh coords) carries linear index (j-1)*2^r + (i-1),
/// matching the level-r cell indexing of the hierarchy.
struct FemGrid {
  int r = 0;

  explicit FemGrid(int r_);

  int nodes_per_side() const { return 1 << r; }
  Eigen::Index n_interior() const {
    return Eigen::Index(nodes_per_side()) * nodes_per_side();
  }
  double h() const { return 1.0 / double((1 << r) + 1); }
  std::array<double, 2> node_position(Eigen::Index idx) const {
    int n = nodes_per_side();
    return {h() * double(idx % n + 1), h() * double(idx / n + 1)};
  }
};

struct OperatorAssembly {
  FemGrid grid;
  SparseMatrix<double> mass;       // int phi_i phi_j mu
  SparseMatrix<double> stiffness;  // int (grad phi_i)^T a grad phi_j
};

/// Exact closed-form element integration of the bilinear elements against
/// the piecewise-constant coefficients.
OperatorAssembly assemble(const FemGrid& grid, const CoefficientField& coeff);

/// Mass matrix with mu = 1 (the L2 Gram matrix), used for norms and
/// eigenvalue-range diagnostics.
SparseMatrix<double> unit_mass_matrix(const FemGrid& grid);

/// tau parameter of the implicit operator M + tau*K; tau = zeta^2/4.
/// The infinity sentinel selects the pure stiffness operator K.
struct Tau {
  cplx value{1.0, 0.0};
  bool infinite = false;

  static Tau of(double t) { return {cplx(t, 0.0), false}; }
  static Tau of(cplx t) { return {t, false}; }
  static Tau infinity() { return {cplx(0.0, 0.0), true}; }

  bool is_real() const { return infinite || value.imag() == 0.0; }
};

/// M + tau*K (or K for the infinity sentinel), in the requested scalar field.
template <class S>
SparseMatrix<S> tau_operator(const OperatorAssembly& asmb, Tau tau);

/// Load vector f_i = int phi_i g(x, t) via 2x2 Gauss quadrature per element.
using SpatialFunction = std::function<double(double, double, double)>;
Vec<double> load_vector(const FemGrid& grid, const SpatialFunction& g, double t);

/// Node-value vector of a smooth function (initial data interpolation).
Vec<double> interpolate_nodes(const FemGrid& grid, const SpatialFunction& g,
                              double t);

}  // namespace gamblet
