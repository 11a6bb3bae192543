#pragma once

#include <cstdint>
#include <vector>

#include "gamblet/sparse.hpp"

namespace gamblet {

/// Labels of the dyadic quadtree over the unit square. Cells at level k are
/// squares of side 2^-k indexed by (ix, iy) with linear index iy*2^k + ix;
/// the child ordering inside a parent is row-major.
struct IndexTree {
  int depth = 0;  // r

  explicit IndexTree(int r);

  static std::int64_t cell_count(int k) { return std::int64_t(1) << (2 * k); }
  static int side(int k) { return 1 << k; }

  static std::int64_t linear(int k, int ix, int iy) {
    return std::int64_t(iy) * side(k) + ix;
  }
  static int x_of(int k, std::int64_t idx) { return int(idx % side(k)); }
  static int y_of(int k, std::int64_t idx) { return int(idx / side(k)); }

  /// Truncation map i -> i^(s): the ancestor of a level-k cell at level s.
  static std::int64_t truncate(int k, std::int64_t idx, int s) {
    int shift = k - s;
    return linear(s, x_of(k, idx) >> shift, y_of(k, idx) >> shift);
  }
  static std::int64_t parent(int k, std::int64_t idx) {
    return truncate(k, idx, k - 1);
  }

  /// Children of a level-(k-1) cell, row-major: (2ix+dx, 2iy+dy) for
  /// (dx,dy) = (0,0),(1,0),(0,1),(1,1).
  static std::array<std::int64_t, 4> children(int k_parent, std::int64_t idx);

  /// Tuple label (i_1,...,i_k) of a cell: the child ordinal along the path
  /// from the root partition.
  static std::vector<int> label(int k, std::int64_t idx);
};

/// Geometry of the nested dyadic partition: H = 1/2, H_k = 2^-k.
struct CellHierarchy {
  int depth = 0;

  explicit CellHierarchy(int r);

  static double cell_side(int k) { return 1.0 / double(IndexTree::side(k)); }
  static std::array<double, 2> center(int k, std::int64_t idx) {
    double s = cell_side(k);
    return {(IndexTree::x_of(k, idx) + 0.5) * s,
            (IndexTree::y_of(k, idx) + 0.5) * s};
  }

  /// Euclidean distance between the closed cells i and j at level k
  /// (0 for touching cells).
  static double cell_distance(int k, std::int64_t i, std::int64_t j);
};

std::pair<IndexTree, CellHierarchy> build_hierarchy(int r);

/// Cellular orthonormal aggregation matrix pi^(k,k+1); every nonzero entry
/// equals 1/2 for the dyadic quadtree.
SparseMatrix<double> build_pi(const IndexTree& tree, int k);

/// Recursive U^(n) of the wavelet construction plus its row-normalized form.
struct OrthogonalBasis {
  Dense<double> u;
  Dense<double> u_normalized;
};
OrthogonalBasis build_U(int n);

/// Wavelet matrix W^(k) (J^(k) x I^(k)): per parent, the first n-1 rows of
/// the normalized U^(4) placed on the parent's children. Wavelet j for
/// parent s has linear index 3*s + t, t in {0,1,2}.
SparseMatrix<double> build_W(const IndexTree& tree, int k);

/// i^rho: labels j at level k with dist(tau_j, tau_i) <= rho * H_k,
/// sorted ascending.
std::vector<std::int64_t> cell_neighborhood(int k, std::int64_t i, double rho);

/// pi and W for every level of a depth-r hierarchy, built once and shared.
struct MultiresBasis {
  int depth = 0;
  std::vector<SparseMatrix<double>> pi;  // pi[k] = pi^(k,k+1), k = 1..r-1
  std::vector<SparseMatrix<double>> w;   // w[k] = W^(k), k = 2..r

  explicit MultiresBasis(int r);

  const SparseMatrix<double>& pi_at(int k) const { return pi.at(k - 1); }
  const SparseMatrix<double>& w_at(int k) const { return w.at(k - 2); }
};

}  // namespace gamblet
