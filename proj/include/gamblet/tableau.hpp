#pragma once

#include <string>

#include "gamblet/sparse.hpp"

namespace gamblet {

/// Runge-Kutta tableau plus the eigendecomposition of its RK matrix, which
/// the fully implicit schemes use to decouple the stage system.
struct ButcherTableau {
  std::string name;
  Dense<double> a;
  Vec<double> b;
  Vec<double> c;

  int stages() const { return int(b.size()); }
  bool lower_triangular() const;

  struct Decomposition {
    Vec<cplx> lambda;   // eigenvalues of a
    Dense<cplx> s;      // a = s * diag(lambda) * s_inv
    Dense<cplx> s_inv;
  };
  /// Throws std::runtime_error when the RK matrix is not diagonalizable.
  Decomposition eigendecomposition() const;
};

/// Root of 1/6 - (3/2)x + 3x^2 - x^3 = 0 giving the L-stable SDIRK3 diagonal.
double sdirk3_lambda();

ButcherTableau dirk3();
ButcherTableau sdirk3();
ButcherTableau gl2();
ButcherTableau radau_iia();
ButcherTableau lobatto_iiic();

}  // namespace gamblet
