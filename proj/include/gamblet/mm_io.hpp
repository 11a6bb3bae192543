#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "gamblet/transform.hpp"

namespace gamblet {

/// Matrix Market coordinate format; symmetric-flagged matrices are written
/// with the symmetric qualifier (lower triangle only).
template <class S>
void write_matrix_market(std::ostream& os, const SparseMatrix<S>& m);

template <class S>
SparseMatrix<S> read_matrix_market(std::istream& is);

template <class S>
void write_matrix_market_file(const std::filesystem::path& path,
                              const SparseMatrix<S>& m);
template <class S>
SparseMatrix<S> read_matrix_market_file(const std::filesystem::path& path);

/// Hierarchy as a directory of .mtx files plus a manifest.json naming them.
template <class S>
void write_hierarchy(const std::filesystem::path& dir,
                     const GambletHierarchy<S>& gh);

}  // namespace gamblet
