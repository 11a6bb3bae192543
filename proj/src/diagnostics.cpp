#include "gamblet/diagnostics.hpp"

#include <cmath>
#include <ostream>

#include <Eigen/SVD>

namespace gamblet {

namespace {

LevelReport report_block(int level, const SparseMatrix<double>& b) {
  LevelReport rep;
  rep.level = level;
  rep.block_size = b.rows();
  rep.nnz = b.nnz();
  auto [lmin, lmax] = extreme_eigenvalues(b);
  rep.lambda_min = lmin;
  rep.lambda_max = lmax;
  rep.cond = lmax / lmin;
  return rep;
}

LevelReport report_block(int level, const SparseMatrix<cplx>& b) {
  LevelReport rep;
  rep.level = level;
  rep.block_size = b.rows();
  rep.nnz = b.nnz();
  Eigen::JacobiSVD<Dense<cplx>> svd(b.dense());
  rep.lambda_min = svd.singularValues().minCoeff();
  rep.lambda_max = svd.singularValues().maxCoeff();
  rep.cond = rep.lambda_max / rep.lambda_min;
  return rep;
}

template <class S>
std::vector<LevelReport> report_all(const GambletHierarchy<S>& gh) {
  std::vector<LevelReport> out;
  out.push_back(report_block(1, gh.level_stiffness[1]));
  for (int k = 2; k <= gh.depth; ++k)
    out.push_back(report_block(k, gh.subband_stiffness[std::size_t(k)]));
  return out;
}

}  // namespace

std::vector<LevelReport> condition_report(const GambletHierarchy<double>& gh) {
  return report_all(gh);
}

std::vector<LevelReport> condition_report(const GambletHierarchy<cplx>& gh) {
  return report_all(gh);
}

double condition_slope(const std::vector<LevelReport>& reports) {
  if (reports.size() < 2) return 0.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = double(reports.size());
  for (const auto& rep : reports) {
    double x = rep.level, y = std::log(rep.cond);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<EigenRange> subband_eigen_ranges(const GambletHierarchy<double>& gh,
                                             const SparseMatrix<double>& stiffness,
                                             const SparseMatrix<double>& unit_mass) {
  std::vector<EigenRange> out;
  auto range_of = [&](int level, const SparseMatrix<double>& coeffs) {
    SparseMatrix<double> num =
        triple_product(coeffs, stiffness, coeffs.transpose());
    num.symmetric = true;
    SparseMatrix<double> den =
        triple_product(coeffs, unit_mass, coeffs.transpose());
    den.symmetric = true;
    auto [lo, hi] = generalized_extreme_eigenvalues(num, den);
    out.push_back({level, lo, hi});
  };
  range_of(1, gh.basis_coeffs[1]);
  for (int k = 2; k <= gh.depth; ++k)
    range_of(k, gh.subband_coeffs[std::size_t(k)]);
  return out;
}

ErrorReport error_norms(const Vec<double>& q, const Vec<double>& q_ref,
                        const OperatorAssembly& asmb) {
  if (q.size() != q_ref.size() || q.size() != asmb.stiffness.rows())
    throw DimensionMismatch("error_norms: size mismatch");
  SparseMatrix<double> mbar = unit_mass_matrix(asmb.grid);
  Vec<double> d = q - q_ref;
  ErrorReport rep;
  rep.h1 = std::sqrt(std::max(0.0, d.dot(asmb.stiffness.m * d)));
  rep.l2 = std::sqrt(std::max(0.0, d.dot(mbar.m * d)));
  rep.energy = std::sqrt(std::max(0.0, rep.h1 * rep.h1 + rep.l2 * rep.l2));
  double ref = std::sqrt(std::max(
      0.0, q_ref.dot(asmb.stiffness.m * q_ref) + q_ref.dot(mbar.m * q_ref)));
  rep.rel_energy = ref > 0.0 ? rep.energy / ref : rep.energy;
  return rep;
}

void write_condition_csv(std::ostream& os, const std::string& figure_id,
                         const std::vector<LevelReport>& reports) {
  os << "figure,level,metric,value\n";
  for (const auto& rep : reports) {
    os << figure_id << ',' << rep.level << ",lambda_min," << rep.lambda_min << '\n';
    os << figure_id << ',' << rep.level << ",lambda_max," << rep.lambda_max << '\n';
    os << figure_id << ',' << rep.level << ",cond," << rep.cond << '\n';
    os << figure_id << ',' << rep.level << ",nnz," << rep.nnz << '\n';
  }
}

void write_ranges_csv(std::ostream& os, const std::string& figure_id,
                      const std::vector<EigenRange>& ranges) {
  os << "figure,level,metric,value\n";
  for (const auto& rg : ranges) {
    os << figure_id << ',' << rg.level << ",rayleigh_min," << rg.min << '\n';
    os << figure_id << ',' << rg.level << ",rayleigh_max," << rg.max << '\n';
  }
}

}  // namespace gamblet
