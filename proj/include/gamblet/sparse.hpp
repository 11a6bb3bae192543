#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gamblet {

template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using Dense = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using cplx = std::complex<double>;

template <class S>
inline constexpr bool is_complex_v = false;
template <class T>
inline constexpr bool is_complex_v<std::complex<T>> = true;

enum class ScalarField { real, complex };

template <class S>
constexpr ScalarField field_of() {
  return is_complex_v<S> ? ScalarField::complex : ScalarField::real;
}

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Compressed sparse matrix over a real or complex scalar field.
/// `symmetric` is a promise (entry(i,j)==entry(j,i) exactly), not enforced
/// on every mutation; assembly routines set it when they know it holds.
template <class S>
struct SparseMatrix {
  Eigen::SparseMatrix<S> m;
  bool symmetric = false;

  SparseMatrix() = default;
  explicit SparseMatrix(Eigen::SparseMatrix<S> mm, bool sym = false)
      : m(std::move(mm)), symmetric(sym) {
    m.makeCompressed();
  }

  Eigen::Index rows() const { return m.rows(); }
  Eigen::Index cols() const { return m.cols(); }
  Eigen::Index nnz() const { return m.nonZeros(); }

  static SparseMatrix identity(Eigen::Index n) {
    Eigen::SparseMatrix<S> id(n, n);
    id.setIdentity();
    return SparseMatrix(std::move(id), true);
  }

  static SparseMatrix zero(Eigen::Index r, Eigen::Index c) {
    return SparseMatrix(Eigen::SparseMatrix<S>(r, c));
  }

  static SparseMatrix from_triplets(Eigen::Index r, Eigen::Index c,
                                    const std::vector<Eigen::Triplet<S>>& t,
                                    bool sym = false) {
    Eigen::SparseMatrix<S> mm(r, c);
    mm.setFromTriplets(t.begin(), t.end());
    return SparseMatrix(std::move(mm), sym);
  }

  /// Plain transpose, never conjugation: the complex gamblet algebra uses
  /// the bilinear (not sesquilinear) pairing throughout.
  SparseMatrix transpose() const {
    return SparseMatrix(Eigen::SparseMatrix<S>(m.transpose()), symmetric);
  }

  Dense<S> dense() const { return Dense<S>(m); }

  void prune(double tol) {
    if (tol <= 0.0) return;
    m.prune([tol](Eigen::Index, Eigen::Index, const S& v) {
      return std::abs(v) > tol;
    });
    m.makeCompressed();
  }
};

template <class S>
Vec<S> spmv(const SparseMatrix<S>& a, const Vec<S>& v) {
  if (a.cols() != v.size())
    throw DimensionMismatch("spmv: " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " times vector of size " +
                            std::to_string(v.size()));
  return a.m * v;
}

/// l * a * r with entries of magnitude <= drop_tol removed (drop_tol = 0
/// keeps the exact product sparsity).
template <class S>
SparseMatrix<S> triple_product(const SparseMatrix<S>& l, const SparseMatrix<S>& a,
                               const SparseMatrix<S>& r, double drop_tol = 0.0) {
  if (l.cols() != a.rows() || a.cols() != r.rows())
    throw DimensionMismatch("triple_product: nonconforming dimensions");
  Eigen::SparseMatrix<S> la = l.m * a.m;
  SparseMatrix<S> out{Eigen::SparseMatrix<S>(la * r.m)};
  out.prune(drop_tol);
  return out;
}

template <class S>
SparseMatrix<S> multiply(const SparseMatrix<S>& a, const SparseMatrix<S>& b,
                         double drop_tol = 0.0) {
  if (a.cols() != b.rows())
    throw DimensionMismatch("multiply: nonconforming dimensions");
  SparseMatrix<S> out{Eigen::SparseMatrix<S>(a.m * b.m)};
  out.prune(drop_tol);
  return out;
}

template <class S>
SparseMatrix<S> add(const SparseMatrix<S>& a, const SparseMatrix<S>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("add: nonconforming dimensions");
  return SparseMatrix<S>{Eigen::SparseMatrix<S>(a.m + b.m),
                         a.symmetric && b.symmetric};
}

template <class S>
SparseMatrix<S> scale(const SparseMatrix<S>& a, S c) {
  return SparseMatrix<S>{Eigen::SparseMatrix<S>(c * a.m), a.symmetric};
}

/// Real sparse matrix promoted to a (possibly complex) scalar field.
template <class S>
SparseMatrix<S> promote(const SparseMatrix<double>& a) {
  if constexpr (is_complex_v<S>) {
    return SparseMatrix<S>{a.m.template cast<S>(), a.symmetric};
  } else {
    return a;
  }
}

}  // namespace gamblet
