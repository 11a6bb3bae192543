#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "gamblet/sparse.hpp"

namespace gamblet {

struct SolveFailure : std::runtime_error {
  double residual;
  SolveFailure(const std::string& what, double res)
      : std::runtime_error(what + " (residual " + std::to_string(res) + ")"),
        residual(res) {}
};

/// Blocks at or below this size go through a direct factorization; larger
/// real SPD systems use preconditioned CG.
inline constexpr Eigen::Index kDenseThreshold = 1024;

/// Reusable factorization of a symmetric system matrix. Real SPD matrices
/// use sparse Cholesky (or CG above the dense threshold); complex symmetric
/// matrices are neither Hermitian nor definite, so they go through sparse LU.
template <class S>
class SymmetricSolver {
 public:
  explicit SymmetricSolver(const SparseMatrix<S>& a, double tol = 1e-12)
      : a_(a), tol_(tol) {
    if (a.rows() != a.cols())
      throw DimensionMismatch("SymmetricSolver: matrix not square");
    if constexpr (is_complex_v<S>) {
      lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<S>>>();
      lu_->compute(a_.m);
      if (lu_->info() != Eigen::Success)
        throw SolveFailure("complex LU factorization failed", -1.0);
    } else if (a.rows() <= kDenseThreshold) {
      ldlt_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<S>>>();
      ldlt_->compute(a_.m);
      if (ldlt_->info() != Eigen::Success)
        throw SolveFailure("Cholesky factorization failed", -1.0);
    } else {
      cg_ = std::make_unique<
          Eigen::ConjugateGradient<Eigen::SparseMatrix<S>, Eigen::Lower | Eigen::Upper>>();
      cg_->setTolerance(tol);
      cg_->setMaxIterations(10 * a.rows());
      cg_->compute(a_.m);
    }
  }

  Vec<S> solve(const Vec<S>& b) const {
    if (b.size() != a_.rows())
      throw DimensionMismatch("SymmetricSolver::solve: rhs size mismatch");
    Vec<S> x;
    if constexpr (is_complex_v<S>) {
      x = lu_->solve(b);
    } else if (ldlt_) {
      x = ldlt_->solve(b);
    } else {
      x = cg_->solve(b);
      if (cg_->info() != Eigen::Success)
        throw SolveFailure("CG did not converge", cg_->error());
    }
    double bn = b.norm();
    if (bn > 0.0) {
      double res = (a_.m * x - b).norm() / bn;
      if (!(res <= std::max(tol_ * 100.0, 1e-8)))
        throw SolveFailure("symmetric solve residual too large", res);
    }
    return x;
  }

  Eigen::Index size() const { return a_.rows(); }

 private:
  SparseMatrix<S> a_;
  double tol_;
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<S>>> ldlt_;
  std::unique_ptr<Eigen::ConjugateGradient<Eigen::SparseMatrix<S>,
                                           Eigen::Lower | Eigen::Upper>>
      cg_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<S>>> lu_;
};

template <class S>
Vec<S> solve_symmetric(const SparseMatrix<S>& m, const Vec<S>& b,
                       double tol = 1e-12) {
  return SymmetricSolver<S>(m, tol).solve(b);
}

namespace detail {

/// Lanczos with full reorthogonalization; returns the extreme Ritz value of
/// the operator (largest by signed value).
template <class Op>
double lanczos_extreme(const Op& op, Eigen::Index n, bool want_max,
                       int max_iter, double tol) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] += 1e-3 * std::sin(double(i + 1));
  v.normalize();
  std::vector<Eigen::VectorXd> basis;
  std::vector<double> alpha, beta;
  double prev = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd w;
  for (int j = 0; j < max_iter; ++j) {
    basis.push_back(v);
    w = op(v);
    double a = v.dot(w);
    alpha.push_back(a);
    w -= a * v;
    if (j > 0) w -= beta.back() * basis[j - 1];
    for (const auto& q : basis) w -= q.dot(w) * q;  // full reorthogonalization
    double bnorm = w.norm();
    // Ritz values of the tridiagonal section
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(j + 1, j + 1);
    for (int i = 0; i <= j; ++i) t(i, i) = alpha[i];
    for (int i = 0; i + 1 <= j; ++i) t(i, i + 1) = t(i + 1, i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t,
                                                      Eigen::EigenvaluesOnly);
    double ritz = want_max ? es.eigenvalues().maxCoeff()
                           : es.eigenvalues().minCoeff();
    if (j > 4 && std::abs(ritz - prev) <= tol * std::max(1.0, std::abs(ritz)))
      return ritz;
    prev = ritz;
    if (bnorm < 1e-14) return ritz;  // invariant subspace found
    beta.push_back(bnorm);
    v = w / bnorm;
  }
  return prev;
}

}  // namespace detail

/// Extreme eigenvalues of a symmetric real matrix to ~1e-6 relative accuracy.
/// Small matrices use a dense eigensolve; large ones use Lanczos for the top
/// and Lanczos on the Cholesky-inverted operator for the bottom.
inline std::pair<double, double> extreme_eigenvalues(
    const SparseMatrix<double>& m) {
  if (m.rows() != m.cols())
    throw DimensionMismatch("extreme_eigenvalues: matrix not square");
  const Eigen::Index n = m.rows();
  if (n <= 2048) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.dense(),
                                                      Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw SolveFailure("dense eigensolver failed", -1.0);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
  }
  double lmax = detail::lanczos_extreme(
      [&m](const Eigen::VectorXd& v) -> Eigen::VectorXd { return m.m * v; }, n,
      true, 400, 1e-8);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(m.m);
  if (ldlt.info() != Eigen::Success)
    throw SolveFailure("extreme_eigenvalues: factorization failed", -1.0);
  double inv_max = detail::lanczos_extreme(
      [&ldlt](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return ldlt.solve(v);
      },
      n, true, 400, 1e-8);
  if (inv_max <= 0.0)
    throw SolveFailure("extreme_eigenvalues: matrix not positive definite",
                       inv_max);
  return {1.0 / inv_max, lmax};
}

/// Extreme generalized eigenvalues of the pencil (A, B) with B SPD.
inline std::pair<double, double> generalized_extreme_eigenvalues(
    const SparseMatrix<double>& a, const SparseMatrix<double>& b) {
  const Eigen::Index n = a.rows();
  if (n != a.cols() || n != b.rows() || n != b.cols())
    throw DimensionMismatch("generalized_extreme_eigenvalues: dimensions");
  if (n <= 2048) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
        a.dense(), b.dense(), Eigen::EigenvaluesOnly);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> bf(b.m);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> af(a.m);
  if (bf.info() != Eigen::Success || af.info() != Eigen::Success)
    throw SolveFailure("generalized eigensolve: factorization failed", -1.0);
  // B^{-1}A and A^{-1}B share eigenvectors with the pencil; the operators are
  // non-symmetric but power iteration with the Rayleigh quotient of the
  // pencil converges to the extreme generalized eigenvalues.
  auto rayleigh = [&](const Eigen::VectorXd& v) {
    return v.dot(a.m * v) / v.dot(b.m * v);
  };
  auto power = [&](auto&& apply, int iters) {
    Eigen::VectorXd v = Eigen::VectorXd::Random(n).normalized();
    double r = rayleigh(v), rp = r;
    for (int i = 0; i < iters; ++i) {
      v = apply(v);
      v.normalize();
      r = rayleigh(v);
      if (i > 8 && std::abs(r - rp) <= 1e-8 * std::abs(r)) break;
      rp = r;
    }
    return r;
  };
  double top = power(
      [&](const Eigen::VectorXd& v) { return bf.solve(a.m * v).eval(); }, 3000);
  double bottom = power(
      [&](const Eigen::VectorXd& v) { return af.solve(b.m * v).eval(); }, 3000);
  return {1.0 / bottom, top};
}

/// Condition number per Cond(M) = sqrt(lmax(M^T M) / lmin(M^T M)).
inline double condition_number(const SparseMatrix<double>& m) {
  auto [lmin, lmax] = extreme_eigenvalues(m);
  // symmetric case: singular values are |eigenvalues|
  double smin = std::min(std::abs(lmin), std::abs(lmax));
  double smax = std::max(std::abs(lmin), std::abs(lmax));
  if (lmin < 0.0 && lmax > 0.0) {
    // indefinite symmetric matrices are outside the intended use; fall back
    // to the dense SVD to stay faithful to the definition
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.dense());
    smin = svd.singularValues().minCoeff();
    smax = svd.singularValues().maxCoeff();
  }
  return smax / smin;
}

/// Singular-value condition number for complex symmetric blocks.
inline double condition_number(const SparseMatrix<cplx>& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m.dense());
  return svd.singularValues().maxCoeff() / svd.singularValues().minCoeff();
}

}  // namespace gamblet
