#include "gamblet/transform.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace gamblet {

namespace {

template <class S>
SparseMatrix<S> symmetrize(const SparseMatrix<S>& a) {
  SparseMatrix<S> out{Eigen::SparseMatrix<S>(S(0.5) * (a.m + Eigen::SparseMatrix<S>(a.m.transpose())))};
  out.symmetric = true;
  return out;
}

template <class S>
struct DirectFactor;

template <>
struct DirectFactor<double> {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> f;
  explicit DirectFactor(const Eigen::SparseMatrix<double>& m) { f.compute(m); }
  bool ok() const { return f.info() == Eigen::Success; }
  Dense<double> solve(const Dense<double>& b) { return f.solve(b); }
};

template <>
struct DirectFactor<cplx> {
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> f;
  explicit DirectFactor(const Eigen::SparseMatrix<cplx>& m) { f.compute(m); }
  bool ok() const { return f.info() == Eigen::Success; }
  Dense<cplx> solve(const Dense<cplx>& b) { return f.solve(b); }
};

/// Keep only B entries whose level-(k-1) parent cells are within
/// trunc_rho layers of each other.
template <class S>
void truncate_subband_block(SparseMatrix<S>& b, int parent_level,
                            double trunc_rho) {
  if (!(trunc_rho < kFullDomain)) return;
  b.m.prune([parent_level, trunc_rho](Eigen::Index row, Eigen::Index col, const S&) {
    double d = CellHierarchy::cell_distance(parent_level, row / 3, col / 3);
    return d <= trunc_rho * CellHierarchy::cell_side(parent_level) + 1e-12;
  });
  b.m.makeCompressed();
}

template <class S>
void init_hierarchy(GambletHierarchy<S>& gh, const SparseMatrix<S>& fine,
                    std::shared_ptr<const MultiresBasis> basis, Tau tau) {
  const int r = basis->depth;
  gh.depth = r;
  gh.tau = tau;
  gh.basis = std::move(basis);
  gh.level_stiffness.resize(r + 1);
  gh.subband_stiffness.resize(r + 1);
  gh.correction.resize(r + 1);
  gh.restriction.resize(r + 1);
  gh.basis_coeffs.resize(r + 1);
  gh.subband_coeffs.resize(r + 1);
  if (fine.rows() != IndexTree::cell_count(r))
    throw DimensionMismatch("transform: operator size != 4^r");
  gh.level_stiffness[r] = fine;
  gh.level_stiffness[r].symmetric = true;
  gh.basis_coeffs[r] = SparseMatrix<S>::identity(fine.rows());
}

template <class S>
void finish_level(GambletHierarchy<S>& gh, int k, const SparseMatrix<S>& w,
                  const SparseMatrix<S>& p, const SparseMatrix<S>& b,
                  SparseMatrix<S> d, double drop_tol) {
  SparseMatrix<S> rest = add(p, multiply(d.transpose(), w));
  gh.level_stiffness[k - 1] = symmetrize(
      triple_product(rest, gh.level_stiffness[k], rest.transpose(), drop_tol));
  gh.subband_stiffness[k] = b;
  gh.correction[k] = std::move(d);
  gh.restriction[k] = rest;
  gh.subband_coeffs[k] = multiply(w, gh.basis_coeffs[k]);
  gh.basis_coeffs[k - 1] = multiply(rest, gh.basis_coeffs[k]);
}

}  // namespace

template <class S>
GambletHierarchy<S> exact_transform(const SparseMatrix<S>& fine_operator,
                                    std::shared_ptr<const MultiresBasis> basis,
                                    Tau tau, const TransformOptions& opts) {
  GambletHierarchy<S> gh;
  init_hierarchy<S>(gh, fine_operator, basis, tau);
  for (int k = gh.depth; k >= 2; --k) {
    const SparseMatrix<S> w = promote<S>(gh.basis->w_at(k));
    const SparseMatrix<S> p = promote<S>(gh.basis->pi_at(k - 1));
    const auto& a = gh.level_stiffness[k];
    SparseMatrix<S> b =
        symmetrize(triple_product(w, a, w.transpose(), opts.drop_tol));
    SparseMatrix<S> wap = multiply(multiply(w, a), p.transpose());
    DirectFactor<S> factor(b.m);
    if (!factor.ok())
      throw SolveFailure("transform: singular B at level " + std::to_string(k),
                         -1.0);
    Dense<S> d_dense = -factor.solve(wap.dense());
    SparseMatrix<S> d{Eigen::SparseMatrix<S>(d_dense.sparseView())};
    finish_level(gh, k, w, p, b, std::move(d), opts.drop_tol);
  }
  return gh;
}

template <class S>
Vec<S> localized_block_solve(const LocalizedBlockSystem<S>& sys, double tol) {
  const Eigen::Index n = sys.rhs.size();
  if (n == 0)
    throw std::invalid_argument("localized_block_solve: empty active set");
  if constexpr (is_complex_v<S>) {
    Eigen::PartialPivLU<Dense<S>> lu(sys.block);
    Vec<S> y = lu.solve(sys.rhs);
    double res = (sys.block * y - sys.rhs).norm();
    if (!(res <= std::max(1e-8, tol) * std::max(1.0, double(sys.rhs.norm()))))
      throw SolveFailure("localized block solve failed at level " +
                             std::to_string(sys.level) + ", cell " +
                             std::to_string(sys.coarse_index),
                         res);
    return y;
  } else {
    if (n <= kDenseThreshold) {
      // The block is a principal submatrix of the SPD subband operator, so
      // Cholesky applies; fall back to LDLT if roundoff spoils positivity.
      Eigen::LLT<Dense<S>> llt(sys.block);
      if (llt.info() == Eigen::Success) return llt.solve(sys.rhs);
      Eigen::LDLT<Dense<S>> ldlt(sys.block);
      if (ldlt.info() != Eigen::Success)
        throw SolveFailure("localized block factorization failed at level " +
                               std::to_string(sys.level) + ", cell " +
                               std::to_string(sys.coarse_index),
                           -1.0);
      return ldlt.solve(sys.rhs);
    }
    Eigen::ConjugateGradient<Dense<S>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(tol);
    cg.compute(sys.block);
    Vec<S> y = cg.solve(sys.rhs);
    if (cg.info() != Eigen::Success)
      throw SolveFailure("localized block CG did not converge at level " +
                             std::to_string(sys.level) + ", cell " +
                             std::to_string(sys.coarse_index),
                         cg.error());
    return y;
  }
}

template <class S>
GambletHierarchy<S> localized_transform(const SparseMatrix<S>& fine_operator,
                                        std::shared_ptr<const MultiresBasis> basis,
                                        std::vector<double> rho, Tau tau,
                                        const TransformOptions& opts) {
  const int r = basis->depth;
  if (int(rho.size()) != r)
    throw std::invalid_argument("localized_transform: need one rho per level");
  for (double v : rho)
    if (v < 0.0) throw std::invalid_argument("localized_transform: rho < 0");
  GambletHierarchy<S> gh;
  init_hierarchy<S>(gh, fine_operator, basis, tau);
  gh.rho = rho;
  const double trunc_rho = *std::max_element(rho.begin(), rho.end());

  for (int k = r; k >= 2; --k) {
    const SparseMatrix<S> w = promote<S>(gh.basis->w_at(k));
    const SparseMatrix<S> p = promote<S>(gh.basis->pi_at(k - 1));
    const auto& a = gh.level_stiffness[k];
    SparseMatrix<S> b =
        symmetrize(triple_product(w, a, w.transpose(), opts.drop_tol));
    truncate_subband_block(b, k - 1, trunc_rho);
    SparseMatrix<S> wap = multiply(multiply(w, a), p.transpose());

    const std::int64_t n_coarse = IndexTree::cell_count(k - 1);
    const double level_rho = rho[std::size_t(k - 1) - 1];
    std::vector<std::vector<std::int64_t>> actives(n_coarse);
    std::vector<Vec<S>> columns(n_coarse);

    const Eigen::Index n_subband = b.rows();
    auto solve_column = [&](std::int64_t i, std::vector<Eigen::Index>& local) {
      auto nb = cell_neighborhood(k - 1, i, level_rho);
      LocalizedBlockSystem<S> sys;
      sys.level = k;
      sys.coarse_index = i;
      sys.active.reserve(nb.size() * 3);
      for (auto c : nb)
        for (int t = 0; t < 3; ++t) sys.active.push_back(3 * c + t);
      for (std::size_t t = 0; t < sys.active.size(); ++t)
        local[std::size_t(sys.active[t])] = Eigen::Index(t);
      const Eigen::Index na = Eigen::Index(sys.active.size());
      sys.block = Dense<S>::Zero(na, na);
      for (Eigen::Index t = 0; t < na; ++t) {
        auto col = Eigen::Index(sys.active[std::size_t(t)]);
        for (typename Eigen::SparseMatrix<S>::InnerIterator it(b.m, col); it;
             ++it) {
          Eigen::Index row = local[std::size_t(it.row())];
          if (row >= 0) sys.block(row, t) = it.value();
        }
      }
      sys.rhs = Vec<S>::Zero(na);
      for (typename Eigen::SparseMatrix<S>::InnerIterator it(wap.m, Eigen::Index(i));
           it; ++it) {
        Eigen::Index row = local[std::size_t(it.row())];
        if (row >= 0) sys.rhs[row] = -it.value();
      }
      for (auto idx : sys.active) local[std::size_t(idx)] = -1;
      columns[i] = localized_block_solve(sys, opts.block_tol);
      actives[i] = std::move(sys.active);
    };

    const int nthreads = std::max(1, opts.max_threads);
    if (nthreads == 1 || n_coarse < 64) {
      std::vector<Eigen::Index> local(std::size_t(n_subband), -1);
      for (std::int64_t i = 0; i < n_coarse; ++i) solve_column(i, local);
    } else {
      std::vector<std::thread> pool;
      std::atomic<std::int64_t> next{0};
      for (int t = 0; t < nthreads; ++t)
        pool.emplace_back([&] {
          std::vector<Eigen::Index> local(std::size_t(n_subband), -1);
          for (std::int64_t i = next.fetch_add(1); i < n_coarse;
               i = next.fetch_add(1))
            solve_column(i, local);
        });
      for (auto& th : pool) th.join();
    }

    std::vector<Eigen::Triplet<S>> trip;
    for (std::int64_t i = 0; i < n_coarse; ++i)
      for (std::size_t t = 0; t < actives[i].size(); ++t)
        trip.emplace_back(int(actives[i][t]), int(i), columns[i][Eigen::Index(t)]);
    SparseMatrix<S> d = SparseMatrix<S>::from_triplets(
        IndexTree::cell_count(k) * 3 / 4, n_coarse, trip);
    finish_level(gh, k, w, p, b, std::move(d), opts.drop_tol);
  }
  return gh;
}

std::vector<double> layer_schedule(int r, double eps, double c) {
  std::vector<double> rho(static_cast<std::size_t>(r));
  const double ln2 = std::log(2.0);
  for (int k = 1; k <= r; ++k)
    rho[std::size_t(k) - 1] =
        c * ((1.0 + 1.0 / ln2) * k * ln2 + std::log(1.0 / eps));
  return rho;
}

std::vector<std::pair<int, double>> decay_profile(
    const GambletHierarchy<double>& gh, int k, std::int64_t i) {
  if (k < 1 || k > gh.depth) throw std::invalid_argument("decay_profile: level");
  const auto& a = gh.fine_operator();
  const Eigen::Index n = a.rows();
  Vec<double> psi = Vec<double>(gh.basis_coeffs[std::size_t(k)].m.row(i).transpose());
  const double total = psi.dot(a.m * psi);
  std::vector<std::pair<int, double>> profile;
  const int max_n = int(std::ceil(std::hypot(double(IndexTree::side(k)),
                                             double(IndexTree::side(k)))));
  for (int radius = 0; radius <= max_n; ++radius) {
    auto region = cell_neighborhood(k, i, double(radius));
    std::unordered_set<std::int64_t> inside(region.begin(), region.end());
    Vec<double> outside = psi;
    bool any_outside = false;
    for (Eigen::Index node = 0; node < n; ++node) {
      if (inside.count(IndexTree::truncate(gh.depth, node, k)))
        outside[node] = 0.0;
      else if (outside[node] != 0.0)
        any_outside = true;
    }
    double frac =
        total > 0.0 ? std::max(0.0, outside.dot(a.m * outside) / total) : 0.0;
    profile.emplace_back(radius, frac);
    if (!any_outside) break;
  }
  return profile;
}

template GambletHierarchy<double> exact_transform<double>(
    const SparseMatrix<double>&, std::shared_ptr<const MultiresBasis>, Tau,
    const TransformOptions&);
template GambletHierarchy<cplx> exact_transform<cplx>(
    const SparseMatrix<cplx>&, std::shared_ptr<const MultiresBasis>, Tau,
    const TransformOptions&);
template GambletHierarchy<double> localized_transform<double>(
    const SparseMatrix<double>&, std::shared_ptr<const MultiresBasis>,
    std::vector<double>, Tau, const TransformOptions&);
template GambletHierarchy<cplx> localized_transform<cplx>(
    const SparseMatrix<cplx>&, std::shared_ptr<const MultiresBasis>,
    std::vector<double>, Tau, const TransformOptions&);
template Vec<double> localized_block_solve<double>(
    const LocalizedBlockSystem<double>&, double);
template Vec<cplx> localized_block_solve<cplx>(const LocalizedBlockSystem<cplx>&,
                                               double);

}  // namespace gamblet
