#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace phplate {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

inline SparseMatrix from_triplets(int rows, int cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

/// Rows and columns picked by index lists (in the given order).
inline SparseMatrix submatrix(const SparseMatrix& a, const std::vector<int>& rows,
                              const std::vector<int>& cols) {
  std::vector<int> row_map(a.rows(), -1), col_map(a.cols(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) row_map[rows[i]] = static_cast<int>(i);
  for (std::size_t j = 0; j < cols.size(); ++j) col_map[cols[j]] = static_cast<int>(j);
  Triplets t;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      const int r = row_map[it.row()], c = col_map[it.col()];
      if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
    }
  return from_triplets(static_cast<int>(rows.size()), static_cast<int>(cols.size()), t);
}

inline std::vector<int> iota_range(int begin, int end) {
  std::vector<int> out;
  for (int i = begin; i < end; ++i) out.push_back(i);
  return out;
}

inline double max_abs(const SparseMatrix& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

/// max |A + A^T| without tolerance; zero means exactly skew-symmetric.
inline double skew_defect(const SparseMatrix& a) {
  const SparseMatrix at = a.transpose();
  return max_abs(SparseMatrix(a + at));
}

/// max |A - A^T|.
inline double symmetry_defect(const SparseMatrix& a) {
  const SparseMatrix at = a.transpose();
  return max_abs(SparseMatrix(a - at));
}

/// Sparse block placed at (row0, col0) of a triplet list.
inline void append_block(Triplets& t, const SparseMatrix& block, int row0, int col0,
                         double scale = 1.0) {
  for (int k = 0; k < block.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(block, k); it; ++it)
      t.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
}

}  // namespace phplate
