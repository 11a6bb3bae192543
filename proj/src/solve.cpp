#include "gamblet/solve.hpp"

#include <ostream>

namespace gamblet {

template <class S>
MultiresSolver<S>::MultiresSolver(std::shared_ptr<const GambletHierarchy<S>> gh,
                                  double tol)
    : gh_(std::move(gh)), tol_(tol) {
  if (!gh_ || gh_->depth < 1)
    throw std::invalid_argument("MultiresSolver: empty hierarchy");
  const double block_tol = tol_ / (2.0 * gh_->depth);
  subband_.resize(static_cast<std::size_t>(gh_->depth) + 1);
  try {
    coarse_ = std::make_unique<SymmetricSolver<S>>(gh_->level_stiffness[1],
                                                   block_tol);
  } catch (const SolveFailure& e) {
    throw SolveFailure(std::string("level 1: ") + e.what(), e.residual);
  }
  for (int k = 2; k <= gh_->depth; ++k) {
    try {
      subband_[std::size_t(k)] = std::make_unique<SymmetricSolver<S>>(
          gh_->subband_stiffness[std::size_t(k)], block_tol);
    } catch (const SolveFailure& e) {
      throw SolveFailure("level " + std::to_string(k) + ": " + e.what(),
                         e.residual);
    }
  }
}

template <class S>
SubbandSolution<S> MultiresSolver<S>::solve(const Vec<S>& g) const {
  const int r = gh_->depth;
  if (g.size() != gh_->fine_size())
    throw DimensionMismatch("MultiresSolver::solve: load vector size mismatch");
  SubbandSolution<S> sol;
  sol.depth = r;
  sol.subband.resize(std::size_t(r) + 1);

  Vec<S> gk = g;
  std::vector<Vec<S>> restricted(std::size_t(r) + 1);
  restricted[std::size_t(r)] = gk;
  for (int k = r; k >= 2; --k) {
    gk = spmv(gh_->restriction[std::size_t(k)], gk);
    restricted[std::size_t(k) - 1] = gk;
  }
  for (int k = 2; k <= r; ++k) {
    Vec<S> wg = spmv(promote<S>(gh_->basis->w_at(k)), restricted[std::size_t(k)]);
    try {
      sol.subband[std::size_t(k)] = subband_[std::size_t(k)]->solve(wg);
    } catch (const SolveFailure& e) {
      throw SolveFailure("subband solve at level " + std::to_string(k) + ": " +
                             e.what(),
                         e.residual);
    }
  }
  try {
    sol.coarse = coarse_->solve(restricted[1]);
  } catch (const SolveFailure& e) {
    throw SolveFailure(std::string("coarse solve: ") + e.what(), e.residual);
  }

  sol.recombined = Vec<S>(gh_->basis_coeffs[1].m.transpose() * sol.coarse);
  for (int k = 2; k <= r; ++k)
    sol.recombined +=
        gh_->subband_coeffs[std::size_t(k)].m.transpose() * sol.subband[std::size_t(k)];
  return sol;
}

template <class S>
SubbandSolution<S> MultiresSolver<S>::subband_components(const Vec<S>& q) const {
  return solve(spmv(gh_->fine_operator(), q));
}

template <class S>
void write_subband_csv(std::ostream& os, const SubbandSolution<S>& sol) {
  os << "level,label,re,im\n";
  auto row = [&os](int level, Eigen::Index label, const S& v) {
    if constexpr (is_complex_v<S>)
      os << level << ',' << label << ',' << v.real() << ',' << v.imag() << '\n';
    else
      os << level << ',' << label << ',' << v << ',' << 0.0 << '\n';
  };
  for (Eigen::Index i = 0; i < sol.coarse.size(); ++i) row(1, i, sol.coarse[i]);
  for (int k = 2; k <= sol.depth; ++k) {
    const auto& w = sol.subband[std::size_t(k)];
    for (Eigen::Index j = 0; j < w.size(); ++j) row(k, j, w[j]);
  }
}

template class MultiresSolver<double>;
template class MultiresSolver<cplx>;
template void write_subband_csv<double>(std::ostream&,
                                        const SubbandSolution<double>&);
template void write_subband_csv<cplx>(std::ostream&, const SubbandSolution<cplx>&);

}  // namespace gamblet
