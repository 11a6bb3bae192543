#include "gamblet/tableau.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace gamblet {

bool ButcherTableau::lower_triangular() const {
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.cols(); ++j)
      if (a(i, j) != 0.0) return false;
  return true;
}

ButcherTableau::Decomposition ButcherTableau::eigendecomposition() const {
  Eigen::EigenSolver<Dense<double>> es(a);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("tableau eigendecomposition failed: " + name);
  Decomposition dec;
  dec.lambda = es.eigenvalues();
  dec.s = es.eigenvectors();
  Eigen::FullPivLU<Dense<cplx>> lu(dec.s);
  if (!lu.isInvertible())
    throw std::runtime_error("RK matrix not diagonalizable: " + name);
  dec.s_inv = lu.inverse();
  double err = (dec.s * dec.lambda.asDiagonal() * dec.s_inv -
                a.cast<cplx>())
                   .norm();
  if (err > 1e-10 * std::max(1.0, a.norm()))
    throw std::runtime_error("RK matrix not diagonalizable: " + name);
  return dec;
}

double sdirk3_lambda() {
  // Newton from the tabulated approximation; the cubic has one real root
  // in (0,1).
  double x = 0.4358665215;
  for (int it = 0; it < 50; ++it) {
    double f = 1.0 / 6.0 - 1.5 * x + 3.0 * x * x - x * x * x;
    double df = -1.5 + 6.0 * x - 3.0 * x * x;
    double step = f / df;
    x -= step;
    if (std::abs(step) < 1e-16) break;
  }
  return x;
}

ButcherTableau dirk3() {
  ButcherTableau t;
  t.name = "DIRK3";
  t.a = Dense<double>::Zero(3, 3);
  t.a << 0.0585104413426586, 0.0, 0.0,
      0.0389225469556698, 0.7675348853239251, 0.0,
      0.1613387070350185, -0.5944302919004032, 0.7165457925008468;
  t.b = Vec<double>(3);
  t.b << 0.1008717264855379, 0.4574278841698629, 0.4417003893445992;
  t.c = Vec<double>(3);
  t.c << 0.0585104413419415, 0.8064574322792799, 0.2834542075672883;
  return t;
}

ButcherTableau sdirk3() {
  const double l = sdirk3_lambda();
  ButcherTableau t;
  t.name = "SDIRK3";
  t.a = Dense<double>::Zero(3, 3);
  t.a << l, 0.0, 0.0,
      0.5 * (1.0 - l), l, 0.0,
      0.25 * (-6.0 * l * l + 16.0 * l - 1.0),
      0.25 * (6.0 * l * l - 20.0 * l + 5.0), l;
  t.b = Vec<double>(3);
  t.b << 0.25 * (-6.0 * l * l + 16.0 * l - 1.0),
      0.25 * (6.0 * l * l - 20.0 * l + 5.0), l;
  t.c = Vec<double>(3);
  t.c << l, 0.5 * (1.0 + l), 1.0;
  return t;
}

ButcherTableau gl2() {
  const double s3 = std::sqrt(3.0);
  ButcherTableau t;
  t.name = "GL2";
  t.a = Dense<double>(2, 2);
  t.a << 0.25, 0.25 - s3 / 6.0, 0.25 + s3 / 6.0, 0.25;
  t.b = Vec<double>(2);
  t.b << 0.5, 0.5;
  t.c = Vec<double>(2);
  t.c << 0.5 - s3 / 6.0, 0.5 + s3 / 6.0;
  return t;
}

ButcherTableau radau_iia() {
  const double s6 = std::sqrt(6.0);
  ButcherTableau t;
  t.name = "RadauIIA";
  t.a = Dense<double>(3, 3);
  t.a << 11.0 / 45.0 - 7.0 * s6 / 360.0, 37.0 / 225.0 - 169.0 * s6 / 1800.0,
      -2.0 / 225.0 + s6 / 75.0,
      37.0 / 225.0 + 169.0 * s6 / 1800.0, 11.0 / 45.0 + 7.0 * s6 / 360.0,
      -2.0 / 225.0 - s6 / 75.0,
      4.0 / 9.0 - s6 / 36.0, 4.0 / 9.0 + s6 / 36.0, 1.0 / 9.0;
  t.b = Vec<double>(3);
  t.b << 4.0 / 9.0 - s6 / 36.0, 4.0 / 9.0 + s6 / 36.0, 1.0 / 9.0;
  t.c = Vec<double>(3);
  t.c << 0.4 - s6 / 10.0, 0.4 + s6 / 10.0, 1.0;
  return t;
}

ButcherTableau lobatto_iiic() {
  ButcherTableau t;
  t.name = "LobattoIIIC";
  t.a = Dense<double>(3, 3);
  t.a << 1.0 / 6.0, -1.0 / 3.0, 1.0 / 6.0,
      1.0 / 6.0, 5.0 / 12.0, -1.0 / 12.0,
      1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0;
  t.b = Vec<double>(3);
  t.b << 1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0;
  t.c = Vec<double>(3);
  t.c << 0.0, 0.5, 1.0;
  return t;
}

}  // namespace gamblet
