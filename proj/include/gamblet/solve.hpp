#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "gamblet/transform.hpp"

namespace gamblet {

/// The multiresolution decomposition of a solution: coarse coefficients over
/// I^(1) plus one subband coefficient vector per level. Recombination is
///   recombined = Psi^(1),T coarse + sum_k X^(k),T subband[k].
template <class S>
struct SubbandSolution {
  int depth = 0;
  Vec<S> coarse;               // U^(1)
  std::vector<Vec<S>> subband; // subband[k] = w^(k), k = 2..r (slots 0,1 empty)
  Vec<S> recombined;
};

/// Multiresolution solver over a fixed hierarchy. Factorizations of A^(1)
/// and every B^(k) are built once and reused across solves; the block solves
/// are independent, so one restriction sweep plus r block solves is the
/// whole algorithm (no cycling).
template <class S>
class MultiresSolver {
 public:
  explicit MultiresSolver(std::shared_ptr<const GambletHierarchy<S>> gh,
                          double tol = 1e-12);

  const GambletHierarchy<S>& hierarchy() const { return *gh_; }
  double tolerance() const { return tol_; }

  SubbandSolution<S> solve(const Vec<S>& g) const;

  /// Decomposition of an arbitrary fine-basis vector: solve with g = A q.
  SubbandSolution<S> subband_components(const Vec<S>& q) const;

 private:
  std::shared_ptr<const GambletHierarchy<S>> gh_;
  double tol_;
  std::unique_ptr<SymmetricSolver<S>> coarse_;           // A^(1)
  std::vector<std::unique_ptr<SymmetricSolver<S>>> subband_;  // B^(k), k=2..r
};

/// One row per basis function: level,label,re,im.
template <class S>
void write_subband_csv(std::ostream& os, const SubbandSolution<S>& sol);

}  // namespace gamblet
