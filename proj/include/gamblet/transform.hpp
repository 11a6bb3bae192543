#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "gamblet/fem.hpp"
#include "gamblet/hierarchy.hpp"
#include "gamblet/solver.hpp"
#include "gamblet/sparse.hpp"

namespace gamblet {

inline constexpr double kFullDomain = std::numeric_limits<double>::infinity();

/// Output of the multilevel transform. Levels are 1-based: index k holds the
/// level-k matrices (slots outside each range stay empty).
///   level_stiffness[k]    A^(k)       I^(k) x I^(k),  k = 1..r
///   subband_stiffness[k]  B^(k)       J^(k) x J^(k),  k = 2..r
///   correction[k]         D^(k,k-1)   J^(k) x I^(k-1),k = 2..r
///   restriction[k]        R^(k-1,k)   I^(k-1) x I^(k),k = 2..r
///   basis_coeffs[k]       Psi^(k)     I^(k) x N,      k = 1..r
///   subband_coeffs[k]     X^(k)       J^(k) x N,      k = 2..r
template <class S>
struct GambletHierarchy {
  int depth = 0;
  Tau tau;
  std::vector<double> rho;  // localization radius per level (empty = exact)
  std::shared_ptr<const MultiresBasis> basis;

  std::vector<SparseMatrix<S>> level_stiffness;
  std::vector<SparseMatrix<S>> subband_stiffness;
  std::vector<SparseMatrix<S>> correction;
  std::vector<SparseMatrix<S>> restriction;
  std::vector<SparseMatrix<S>> basis_coeffs;
  std::vector<SparseMatrix<S>> subband_coeffs;

  bool exact() const { return rho.empty(); }
  Eigen::Index fine_size() const { return level_stiffness.at(depth).rows(); }
  const SparseMatrix<S>& fine_operator() const { return level_stiffness.at(depth); }
  static constexpr ScalarField field() { return field_of<S>(); }
};

struct TransformOptions {
  double drop_tol = 0.0;    // entry drop tolerance in triple products
  double block_tol = 1e-12; // relative accuracy of localized block solves
  int max_threads = 1;
};

/// Exact transform: full recursion
///   B = W A W^T, D = -B^{-1} W A pi^T, R = pi + D^T W, A' = R A R^T.
template <class S>
GambletHierarchy<S> exact_transform(const SparseMatrix<S>& fine_operator,
                                    std::shared_ptr<const MultiresBasis> basis,
                                    Tau tau = Tau::of(1.0),
                                    const TransformOptions& opts = {});

template <class S>
GambletHierarchy<S> exact_transform(const OperatorAssembly& asmb,
                                    const CellHierarchy& hier, Tau tau,
                                    const TransformOptions& opts = {}) {
  auto basis = std::make_shared<MultiresBasis>(hier.depth);
  return exact_transform<S>(tau_operator<S>(asmb, tau), std::move(basis), tau, opts);
}

/// One localized correction column: the principal block of B on the active
/// wavelets of a coarse cell's rho-neighborhood and the matching slice of
/// -W A pi^T.
template <class S>
struct LocalizedBlockSystem {
  int level = 0;                      // k of D^(k,k-1)
  std::int64_t coarse_index = 0;      // i in I^(k-1)
  std::vector<std::int64_t> active;   // i^chi, ascending
  Dense<S> block;                     // B^(i,rho)
  Vec<S> rhs;                         // b^(i,rho)
};

/// Solve B^(i,rho) y = b^(i,rho); dense factorization within the dense
/// threshold, CG beyond it. Returns y aligned with sys.active.
template <class S>
Vec<S> localized_block_solve(const LocalizedBlockSystem<S>& sys, double tol);

/// Localized transform: the same recursion with D assembled column-by-column
/// from localized block solves; D entries outside each neighborhood are
/// exactly zero.
template <class S>
GambletHierarchy<S> localized_transform(const SparseMatrix<S>& fine_operator,
                                        std::shared_ptr<const MultiresBasis> basis,
                                        std::vector<double> rho,
                                        Tau tau = Tau::of(1.0),
                                        const TransformOptions& opts = {});

template <class S>
GambletHierarchy<S> localized_transform(const OperatorAssembly& asmb,
                                        const CellHierarchy& hier, Tau tau,
                                        std::vector<double> rho,
                                        const TransformOptions& opts = {}) {
  auto basis = std::make_shared<MultiresBasis>(hier.depth);
  return localized_transform<S>(tau_operator<S>(asmb, tau), std::move(basis),
                                std::move(rho), tau, opts);
}

inline std::vector<double> uniform_layers(int r, double nl) {
  return std::vector<double>(std::size_t(r), nl);
}

/// rho_k schedule of the localization theory: C*((1+1/ln(1/H))*ln(1/H_k)+ln(1/eps)).
std::vector<double> layer_schedule(int r, double eps, double c = 0.5);

/// Energy-mass fraction of psi_i^(k) outside successive cell neighborhoods:
/// (radius n, fraction of |psi|_A^2 carried by fine nodes outside Omega_{i,n}).
std::vector<std::pair<int, double>> decay_profile(
    const GambletHierarchy<double>& gh, int k, std::int64_t i);

}  // namespace gamblet
