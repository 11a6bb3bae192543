#include "gamblet/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gamblet {

IndexTree::IndexTree(int r) : depth(r) {
  if (r < 1 || r > 12) throw std::invalid_argument("IndexTree: depth out of [1,12]");
}

CellHierarchy::CellHierarchy(int r) : depth(r) {
  if (r < 1 || r > 12) throw std::invalid_argument("CellHierarchy: depth out of [1,12]");
}

std::array<std::int64_t, 4> IndexTree::children(int k_parent, std::int64_t idx) {
  int k = k_parent + 1;
  int ix = 2 * x_of(k_parent, idx), iy = 2 * y_of(k_parent, idx);
  return {linear(k, ix, iy), linear(k, ix + 1, iy), linear(k, ix, iy + 1),
          linear(k, ix + 1, iy + 1)};
}

std::vector<int> IndexTree::label(int k, std::int64_t idx) {
  std::vector<int> out(k);
  int ix = x_of(k, idx), iy = y_of(k, idx);
  for (int level = k; level >= 1; --level) {
    out[level - 1] = (ix & 1) + 2 * (iy & 1);
    ix >>= 1;
    iy >>= 1;
  }
  return out;
}

double CellHierarchy::cell_distance(int k, std::int64_t i, std::int64_t j) {
  double s = cell_side(k);
  int gx = std::max(0, std::abs(IndexTree::x_of(k, i) - IndexTree::x_of(k, j)) - 1);
  int gy = std::max(0, std::abs(IndexTree::y_of(k, i) - IndexTree::y_of(k, j)) - 1);
  return s * std::hypot(double(gx), double(gy));
}

std::pair<IndexTree, CellHierarchy> build_hierarchy(int r) {
  return {IndexTree(r), CellHierarchy(r)};
}

SparseMatrix<double> build_pi(const IndexTree& tree, int k) {
  if (k < 1 || k > tree.depth - 1)
    throw std::invalid_argument("build_pi: level out of [1, r-1]");
  std::vector<Eigen::Triplet<double>> t;
  const std::int64_t np = IndexTree::cell_count(k);
  t.reserve(4 * np);
  for (std::int64_t p = 0; p < np; ++p)
    for (std::int64_t c : IndexTree::children(k, p))
      t.emplace_back(int(p), int(c), 0.5);  // 1/sqrt(4): equal-volume Haar
  return SparseMatrix<double>::from_triplets(np, IndexTree::cell_count(k + 1), t);
}

OrthogonalBasis build_U(int n) {
  if (n < 2) throw std::invalid_argument("build_U: n must be >= 2");
  Dense<double> u = Dense<double>::Zero(n, n);
  u(0, 0) = 1.0;
  u(0, 1) = -1.0;
  u(1, 0) = u(1, 1) = 1.0;
  for (int m = 2; m < n; ++m) {
    // append column m and row m to the principal (m+1)x(m+1) block
    u(m - 1, m) = -double(m);
    for (int j = 0; j <= m; ++j) u(m, j) = 1.0;
  }
  Dense<double> un = u;
  for (int i = 0; i < n; ++i) un.row(i).normalize();
  return {u, un};
}

SparseMatrix<double> build_W(const IndexTree& tree, int k) {
  if (k < 2 || k > tree.depth)
    throw std::invalid_argument("build_W: level out of [2, r]");
  static const OrthogonalBasis u4 = build_U(4);
  std::vector<Eigen::Triplet<double>> t;
  const std::int64_t np = IndexTree::cell_count(k - 1);
  t.reserve(12 * np);
  for (std::int64_t p = 0; p < np; ++p) {
    auto ch = IndexTree::children(k - 1, p);
    for (int row = 0; row < 3; ++row)
      for (int col = 0; col < 4; ++col)
        t.emplace_back(int(3 * p + row), int(ch[col]), u4.u_normalized(row, col));
  }
  return SparseMatrix<double>::from_triplets(3 * np, IndexTree::cell_count(k), t);
}

std::vector<std::int64_t> cell_neighborhood(int k, std::int64_t i, double rho) {
  if (rho < 0.0) throw std::invalid_argument("cell_neighborhood: rho < 0");
  const int n = IndexTree::side(k);
  const int ix = IndexTree::x_of(k, i), iy = IndexTree::y_of(k, i);
  // dist <= rho*H_k means the per-axis cell gaps (gx,gy) satisfy
  // hypot(gx,gy) <= rho; the candidate window is |delta| <= rho+1.
  const int reach = rho >= double(n) ? n : int(std::floor(rho)) + 1;
  std::vector<std::int64_t> out;
  for (int jy = std::max(0, iy - reach); jy <= std::min(n - 1, iy + reach); ++jy)
    for (int jx = std::max(0, ix - reach); jx <= std::min(n - 1, ix + reach); ++jx) {
      int gx = std::max(0, std::abs(jx - ix) - 1);
      int gy = std::max(0, std::abs(jy - iy) - 1);
      if (std::hypot(double(gx), double(gy)) <= rho + 1e-12)
        out.push_back(IndexTree::linear(k, jx, jy));
    }
  std::sort(out.begin(), out.end());
  return out;
}

MultiresBasis::MultiresBasis(int r) : depth(r) {
  IndexTree tree(r);
  for (int k = 1; k <= r - 1; ++k) pi.push_back(build_pi(tree, k));
  for (int k = 2; k <= r; ++k) w.push_back(build_W(tree, k));
}

}  // namespace gamblet
