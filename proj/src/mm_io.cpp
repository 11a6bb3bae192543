#include "gamblet/mm_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace gamblet {

template <class S>
void write_matrix_market(std::ostream& os, const SparseMatrix<S>& m) {
  const bool sym = m.symmetric && m.rows() == m.cols();
  os << "%%MatrixMarket matrix coordinate "
     << (is_complex_v<S> ? "complex" : "real") << ' '
     << (sym ? "symmetric" : "general") << '\n';
  std::vector<Eigen::Triplet<S>> entries;
  for (Eigen::Index outer = 0; outer < m.m.outerSize(); ++outer)
    for (typename Eigen::SparseMatrix<S>::InnerIterator it(m.m, outer); it; ++it) {
      if (sym && it.row() < it.col()) continue;
      entries.emplace_back(int(it.row()), int(it.col()), it.value());
    }
  os << m.rows() << ' ' << m.cols() << ' ' << entries.size() << '\n';
  os << std::setprecision(17);
  for (const auto& e : entries) {
    os << e.row() + 1 << ' ' << e.col() + 1 << ' ';
    if constexpr (is_complex_v<S>)
      os << e.value().real() << ' ' << e.value().imag() << '\n';
    else
      os << e.value() << '\n';
  }
}

template <class S>
SparseMatrix<S> read_matrix_market(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("%%MatrixMarket", 0) != 0)
    throw std::runtime_error("matrix market: missing header");
  std::istringstream header(line);
  std::string tag, object, format, field, symmetry;
  header >> tag >> object >> format >> field >> symmetry;
  if (object != "matrix" || format != "coordinate")
    throw std::runtime_error("matrix market: unsupported layout " + line);
  if (field == "complex" && !is_complex_v<S>)
    throw std::runtime_error("matrix market: complex data into a real matrix");
  const bool sym = symmetry == "symmetric";
  if (!sym && symmetry != "general")
    throw std::runtime_error("matrix market: unsupported symmetry " + symmetry);

  while (std::getline(is, line))
    if (!line.empty() && line[0] != '%') break;
  Eigen::Index rows = 0, cols = 0;
  std::size_t count = 0;
  {
    std::istringstream sizes(line);
    if (!(sizes >> rows >> cols >> count))
      throw std::runtime_error("matrix market: bad size line");
  }
  std::vector<Eigen::Triplet<S>> entries;
  entries.reserve(sym ? 2 * count : count);
  for (std::size_t n = 0; n < count; ++n) {
    Eigen::Index r = 0, c = 0;
    double re = 0.0, im = 0.0;
    if (!(is >> r >> c >> re)) throw std::runtime_error("matrix market: truncated");
    if (field == "complex" && !(is >> im))
      throw std::runtime_error("matrix market: truncated complex entry");
    S v;
    if constexpr (is_complex_v<S>)
      v = S(re, im);
    else
      v = re;
    entries.emplace_back(int(r - 1), int(c - 1), v);
    if (sym && r != c) entries.emplace_back(int(c - 1), int(r - 1), v);
  }
  return SparseMatrix<S>::from_triplets(rows, cols, entries, sym);
}

template <class S>
void write_matrix_market_file(const std::filesystem::path& path,
                              const SparseMatrix<S>& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_matrix_market(os, m);
}

template <class S>
SparseMatrix<S> read_matrix_market_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return read_matrix_market<S>(is);
}

template <class S>
void write_hierarchy(const std::filesystem::path& dir,
                     const GambletHierarchy<S>& gh) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["depth"] = gh.depth;
  manifest["field"] = is_complex_v<S> ? "complex" : "real";
  manifest["tau_infinite"] = gh.tau.infinite;
  if (!gh.tau.infinite) {
    manifest["tau_re"] = gh.tau.value.real();
    manifest["tau_im"] = gh.tau.value.imag();
  }
  manifest["rho"] = gh.rho;

  auto dump = [&](const std::string& stem, int k, const SparseMatrix<S>& m) {
    std::string name = stem + "_" + std::to_string(k) + ".mtx";
    write_matrix_market_file<S>(dir / name, m);
    manifest["files"][stem].push_back(name);
  };
  for (int k = 1; k <= gh.depth; ++k) {
    dump("level_stiffness", k, gh.level_stiffness[std::size_t(k)]);
    dump("basis_coeffs", k, gh.basis_coeffs[std::size_t(k)]);
  }
  for (int k = 2; k <= gh.depth; ++k) {
    dump("subband_stiffness", k, gh.subband_stiffness[std::size_t(k)]);
    dump("correction", k, gh.correction[std::size_t(k)]);
    dump("restriction", k, gh.restriction[std::size_t(k)]);
    dump("subband_coeffs", k, gh.subband_coeffs[std::size_t(k)]);
  }
  std::ofstream os(dir / "manifest.json");
  os << manifest.dump(2) << '\n';
}

template void write_matrix_market<double>(std::ostream&, const SparseMatrix<double>&);
template void write_matrix_market<cplx>(std::ostream&, const SparseMatrix<cplx>&);
template SparseMatrix<double> read_matrix_market<double>(std::istream&);
template SparseMatrix<cplx> read_matrix_market<cplx>(std::istream&);
template void write_matrix_market_file<double>(const std::filesystem::path&,
                                               const SparseMatrix<double>&);
template void write_matrix_market_file<cplx>(const std::filesystem::path&,
                                             const SparseMatrix<cplx>&);
template SparseMatrix<double> read_matrix_market_file<double>(
    const std::filesystem::path&);
template SparseMatrix<cplx> read_matrix_market_file<cplx>(
    const std::filesystem::path&);
template void write_hierarchy<double>(const std::filesystem::path&,
                                      const GambletHierarchy<double>&);
template void write_hierarchy<cplx>(const std::filesystem::path&,
                                    const GambletHierarchy<cplx>&);

}  // namespace gamblet
