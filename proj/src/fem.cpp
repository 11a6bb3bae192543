#include "gamblet/fem.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gamblet {

CoefficientField::CoefficientField(int r_, std::vector<double> a_,
                                   std::vector<double> mu_)
    : r(r_), a(std::move(a_)), mu(std::move(mu_)) {
  std::size_t n = std::size_t(cells_per_side()) * cells_per_side();
  if (a.size() != n || mu.size() != n)
    throw std::invalid_argument("CoefficientField: wrong value count");
  for (double v : a)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("CoefficientField: a must be positive finite");
  for (double v : mu)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("CoefficientField: mu must be positive finite");
}

double CoefficientField::a_min() const { return *std::min_element(a.begin(), a.end()); }
double CoefficientField::a_max() const { return *std::max_element(a.begin(), a.end()); }

CoefficientField CoefficientField::constant(int r, double a_value, double mu_value) {
  std::size_t n = std::size_t((1 << r) + 1) * ((1 << r) + 1);
  return CoefficientField(r, std::vector<double>(n, a_value),
                          std::vector<double>(n, mu_value));
}

CoefficientField rough_coefficient(int r) {
  if (r < 1) throw std::invalid_argument("rough_coefficient: r must be >= 1");
  const int nc = (1 << r) + 1;
  const double denom = double((1 << r) + 1);
  std::vector<double> a(std::size_t(nc) * nc, 1.0);
  for (int j = 0; j < nc; ++j)
    for (int i = 0; i < nc; ++i) {
      double v = 1.0;
      for (int k = 1; k <= r; ++k) {
        double f = double(std::int64_t(1) << k) * M_PI;
        v *= (1.0 + 0.5 * std::cos(f * (i / denom + j / denom))) *
             (1.0 + 0.5 * std::sin(f * (j / denom - 3.0 * i / denom)));
      }
      a[std::size_t(j) * nc + i] = v;
    }
  return CoefficientField(r, std::move(a),
                          std::vector<double>(std::size_t(nc) * nc, 1.0));
}

void write_coefficient_grid(std::ostream& os, const CoefficientField& c) {
  const int nc = c.cells_per_side();
  os.precision(17);
  for (int j = 0; j < nc; ++j) {
    for (int i = 0; i < nc; ++i) os << (i ? " " : "") << c.a_at(i, j);
    os << "\n";
  }
}

CoefficientField read_coefficient_grid(std::istream& is, int r) {
  const int nc = (1 << r) + 1;
  std::vector<double> a;
  a.reserve(std::size_t(nc) * nc);
  double v;
  while (is >> v) a.push_back(v);
  if (a.size() != std::size_t(nc) * nc)
    throw std::invalid_argument("read_coefficient_grid: expected " +
                                std::to_string(std::size_t(nc) * nc) + " values, got " +
                                std::to_string(a.size()));
  return CoefficientField(r, std::move(a),
                          std::vector<double>(std::size_t(nc) * nc, 1.0));
}

FemGrid::FemGrid(int r_) : r(r_) {
  if (r < 1 || r > 12) throw std::invalid_argument("FemGrid: r out of [1,12]");
}

namespace {

// Per-element 4x4 blocks from the 1D factors on [0,h]:
//   mass      h/6 * [[2,1],[1,2]]
//   stiffness 1/h * [[1,-1],[-1,1]]
// tensorized in the local node order (0,0),(1,0),(0,1),(1,1).
struct ElementMatrices {
  Eigen::Matrix4d mass;   // for h scaling: multiply by h^2
  Eigen::Matrix4d stiff;  // h-independent in 2D
};

ElementMatrices reference_element() {
  Eigen::Matrix2d m1;
  m1 << 2.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 2.0 / 6.0;
  Eigen::Matrix2d k1;
  k1 << 1.0, -1.0, -1.0, 1.0;
  ElementMatrices em;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) {
          int row = a + 2 * b, col = c + 2 * d;
          em.mass(row, col) = m1(a, c) * m1(b, d);
          em.stiff(row, col) = k1(a, c) * m1(b, d) + m1(a, c) * k1(b, d);
        }
  return em;
}

template <class Per>
SparseMatrix<double> assemble_form(const FemGrid& grid, Per&& per_element) {
  const int n = grid.nodes_per_side();
  const int ne = n + 1;  // elements per side
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(ne) * ne * 16);
  for (int ey = 0; ey < ne; ++ey)
    for (int ex = 0; ex < ne; ++ex) {
      Eigen::Matrix4d block = per_element(ex, ey);
      // element corner (ex+dx, ey+dy) in mesh coords; interior iff 1..n
      int idx[4];
      for (int local = 0; local < 4; ++local) {
        int mi = ex + (local & 1), mj = ey + (local >> 1);
        idx[local] = (mi >= 1 && mi <= n && mj >= 1 && mj <= n)
                         ? (mj - 1) * n + (mi - 1)
                         : -1;
      }
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          if (idx[a] >= 0 && idx[b] >= 0)
            trip.emplace_back(idx[a], idx[b], block(a, b));
    }
  auto out = SparseMatrix<double>::from_triplets(grid.n_interior(),
                                                 grid.n_interior(), trip, true);
  return out;
}

}  // namespace

OperatorAssembly assemble(const FemGrid& grid, const CoefficientField& coeff) {
  if (coeff.r != grid.r)
    throw std::invalid_argument("assemble: coefficient/grid depth mismatch");
  static const ElementMatrices em = reference_element();
  const double h2 = grid.h() * grid.h();
  auto mass = assemble_form(grid, [&](int ex, int ey) {
    return Eigen::Matrix4d(coeff.mu_at(ex, ey) * h2 * em.mass);
  });
  auto stiff = assemble_form(grid, [&](int ex, int ey) {
    return Eigen::Matrix4d(coeff.a_at(ex, ey) * em.stiff);
  });
  return OperatorAssembly{grid, std::move(mass), std::move(stiff)};
}

SparseMatrix<double> unit_mass_matrix(const FemGrid& grid) {
  static const ElementMatrices em = reference_element();
  const double h2 = grid.h() * grid.h();
  return assemble_form(grid, [&](int, int) { return Eigen::Matrix4d(h2 * em.mass); });
}

template <class S>
SparseMatrix<S> tau_operator(const OperatorAssembly& asmb, Tau tau) {
  if (tau.infinite) return promote<S>(asmb.stiffness);
  if (tau.value == cplx(0.0, 0.0))
    throw std::invalid_argument("tau_operator: tau must be nonzero");
  if constexpr (is_complex_v<S>) {
    Eigen::SparseMatrix<S> out =
        asmb.mass.m.cast<S>() + S(tau.value) * asmb.stiffness.m.cast<S>();
    return SparseMatrix<S>{std::move(out), true};
  } else {
    if (tau.value.imag() != 0.0)
      throw std::invalid_argument("tau_operator: complex tau in real field");
    Eigen::SparseMatrix<double> out =
        asmb.mass.m + tau.value.real() * asmb.stiffness.m;
    return SparseMatrix<double>{std::move(out), true};
  }
}

template SparseMatrix<double> tau_operator<double>(const OperatorAssembly&, Tau);
template SparseMatrix<cplx> tau_operator<cplx>(const OperatorAssembly&, Tau);

Vec<double> load_vector(const FemGrid& grid, const SpatialFunction& g, double t) {
  const int n = grid.nodes_per_side();
  const int ne = n + 1;
  const double h = grid.h();
  // 2x2 Gauss points on [0,1]
  const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  Vec<double> f = Vec<double>::Zero(grid.n_interior());
  for (int ey = 0; ey < ne; ++ey)
    for (int ex = 0; ex < ne; ++ex)
      for (int qx = 0; qx < 2; ++qx)
        for (int qy = 0; qy < 2; ++qy) {
          double lx = gp[qx], ly = gp[qy];
          double x = (ex + lx) * h, y = (ey + ly) * h;
          double gv = g(x, y, t);
          double wq = 0.25 * h * h;  // Gauss weights 1/2 each, scaled by h
          double shape[4] = {(1 - lx) * (1 - ly), lx * (1 - ly), (1 - lx) * ly,
                             lx * ly};
          for (int local = 0; local < 4; ++local) {
            int mi = ex + (local & 1), mj = ey + (local >> 1);
            if (mi >= 1 && mi <= n && mj >= 1 && mj <= n)
              f[(mj - 1) * n + (mi - 1)] += wq * gv * shape[local];
          }
        }
  return f;
}

Vec<double> interpolate_nodes(const FemGrid& grid, const SpatialFunction& g,
                              double t) {
  Vec<double> q(grid.n_interior());
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    auto [x, y] = grid.node_position(i);
    q[i] = g(x, y, t);
  }
  return q;
}

}  // namespace gamblet
