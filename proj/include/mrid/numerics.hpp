#ifndef MRID_NUMERICS_HPP
#define MRID_NUMERICS_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "mrid/error.hpp"

namespace mrid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative rank tolerance used wherever a caller does not pass one.
inline constexpr double kDefaultRankTol = 1e-9;

inline void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::NonFinite, what + " contains NaN or Inf");
  }
}

inline void require_square(const Matrix& m, const std::string& what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::NonSquare, what + " is " + std::to_string(m.rows()) + "x" +
                                          std::to_string(m.cols()));
  }
}

inline Vector singular_values(const Matrix& m) {
  if (m.size() == 0) return Vector();
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues();
}

/// Number of singular values strictly above tol * sigma_max. Zero matrix -> 0.
inline int rank_with_tol(const Matrix& m, double tol = kDefaultRankTol) {
  if (tol < 0.0) throw Error(ErrorKind::InvalidArgument, "rank tolerance must be >= 0");
  const Vector s = singular_values(m);
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cutoff = tol * s(0);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) ++r;
  }
  return r;
}

inline Matrix mat_pow(const Matrix& m, int k) {
  require_square(m, "mat_pow argument");
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "mat_pow exponent must be >= 0");
  Matrix result = Matrix::Identity(m.rows(), m.cols());
  Matrix base = m;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return result;
}

/// Inverse through an LU solve, after a rank check at `tol`.
inline Matrix invert(const Matrix& m, double tol = kDefaultRankTol) {
  require_square(m, "invert argument");
  const int r = rank_with_tol(m, tol);
  if (r < m.rows()) {
    throw Error(ErrorKind::Singular, "matrix of dimension " + std::to_string(m.rows()) +
                                         " has numerical rank " + std::to_string(r));
  }
  return m.partialPivLu().solve(Matrix::Identity(m.rows(), m.cols()));
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline Matrix block_diagonal(const std::vector<Matrix>& blocks) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Matrix out = Matrix::Zero(rows, cols);
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

/// blockdiag(block, ..., block) with `copies` repetitions.
inline Matrix repeat_block_diagonal(const Matrix& block, int copies) {
  return block_diagonal(std::vector<Matrix>(static_cast<std::size_t>(copies), block));
}

}  // namespace mrid

#endif  // MRID_NUMERICS_HPP
