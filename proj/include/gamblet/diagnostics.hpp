#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gamblet/transform.hpp"

namespace gamblet {

/// Conditioning of one hierarchy block: A^(1) for level 1, B^(k) above.
struct LevelReport {
  int level = 0;
  Eigen::Index block_size = 0;
  Eigen::Index nnz = 0;
  double lambda_min = 0.0;  // singular values for complex blocks
  double lambda_max = 0.0;
  double cond = 0.0;
};

std::vector<LevelReport> condition_report(const GambletHierarchy<double>& gh);
std::vector<LevelReport> condition_report(const GambletHierarchy<cplx>& gh);

/// Least-squares slope of log(cond) against level, the growth-trend statistic.
double condition_slope(const std::vector<LevelReport>& reports);

/// Extreme generalized Rayleigh quotients |psi|_a^2 / |psi|_{L2}^2 per level:
/// the pencil (C K C^T, C Mbar C^T) with C = Psi^(1) at level 1 and X^(k)
/// above, Mbar the unit-coefficient mass matrix.
struct EigenRange {
  int level = 0;
  double min = 0.0;
  double max = 0.0;
};

std::vector<EigenRange> subband_eigen_ranges(const GambletHierarchy<double>& gh,
                                             const SparseMatrix<double>& stiffness,
                                             const SparseMatrix<double>& unit_mass);

struct ErrorReport {
  double h1 = 0.0;          // K-seminorm of the difference
  double l2 = 0.0;          // unit-coefficient mass norm
  double energy = 0.0;      // full (K + Mbar)-norm
  double rel_energy = 0.0;  // energy relative to the reference's energy norm
};

ErrorReport error_norms(const Vec<double>& q, const Vec<double>& q_ref,
                        const OperatorAssembly& asmb);

/// (figure-id, level/step, metric, value) rows.
void write_condition_csv(std::ostream& os, const std::string& figure_id,
                         const std::vector<LevelReport>& reports);
void write_ranges_csv(std::ostream& os, const std::string& figure_id,
                      const std::vector<EigenRange>& ranges);

}  // namespace gamblet
