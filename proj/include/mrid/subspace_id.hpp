#ifndef MRID_SUBSPACE_ID_HPP
#define MRID_SUBSPACE_ID_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mrid/cyclic.hpp"

namespace mrid {

struct IdConfig {
  int block_rows = 0;  // Hankel depth s; 0 selects default_block_rows
  int order = 0;       // forced model order (Mn)
  double sv_gap_tol = 0.1;
};

/// Model returned by subspace identification on cycled data, plus realization diagnostics.
struct IdentifiedModel {
  Matrix A;  // order x order
  Matrix B;  // order x Mm
  Matrix C;  // Ml x order
  Matrix D;  // Ml x Mm
  int n = 0;
  int m = 0;
  int l = 0;
  int M = 1;

  int block_rows = 0;
  Vector singular_values;      // of the projected output Hankel block
  double order_gap = 0.0;      // sigma_{order+1} / sigma_order
  bool order_exposed = true;   // order_gap <= sv_gap_tol
  int input_hankel_rank = 0;

  int order() const { return static_cast<int>(A.rows()); }
};

/// max(ceil(2Mn / Ml), 2n + 2, Mn + 1). The depth must exceed the observability index
/// of the cycled system, which reaches Mn when a single sensor reports once per period.
inline int default_block_rows(int n, int l, int M) {
  const int Mn = M * n;
  const int Ml = M * l;
  const int spread = (2 * Mn + Ml - 1) / Ml;
  return std::max({spread, 2 * n + 2, Mn + 1});
}

/// (q*rows) x cols matrix whose block (i, j) is signal(start + i + j).
inline Matrix build_block_hankel(const Matrix& signal, int rows, int cols, int start) {
  if (rows < 1 || cols < 1 || start < 0) {
    throw Error(ErrorKind::InvalidArgument, "Hankel rows and cols must be >= 1 and start >= 0");
  }
  if (static_cast<Eigen::Index>(start) + rows + cols - 1 > signal.cols()) {
    throw Error(ErrorKind::InsufficientData,
                "Hankel needs " + std::to_string(start + rows + cols - 1) + " samples, signal has " +
                    std::to_string(signal.cols()));
  }
  const Eigen::Index q = signal.rows();
  Matrix H(q * rows, cols);
  for (int i = 0; i < rows; ++i) {
    H.middleRows(i * q, q) = signal.middleCols(start + i, cols);
  }
  return H;
}

namespace detail {

/// Streaming least squares: keeps the triangular factor of [Phi | y] so the full
/// regression matrix never has to be materialized.
class StreamingLeastSquares {
 public:
  explicit StreamingLeastSquares(Eigen::Index unknowns)
      : unknowns_(unknowns), R_(Matrix::Zero(0, unknowns + 1)) {}

  void add(const Matrix& phi, const Vector& y) {
    Matrix stacked(R_.rows() + phi.rows(), unknowns_ + 1);
    stacked.topRows(R_.rows()) = R_;
    stacked.bottomRows(phi.rows()) << phi, y;
    Eigen::HouseholderQR<Matrix> qr(stacked);
    const Eigen::Index keep = std::min<Eigen::Index>(stacked.rows(), unknowns_ + 1);
    R_ = qr.matrixQR().topRows(keep).triangularView<Eigen::Upper>();
  }

  Vector solve() const {
    const Eigen::Index k = std::min(R_.rows(), unknowns_);
    const Matrix R = R_.topLeftCorner(k, unknowns_);
    const Vector rhs = R_.col(unknowns_).head(k);
    return R.completeOrthogonalDecomposition().solve(rhs);
  }

 private:
  Eigen::Index unknowns_;
  Matrix R_;
};

}  // namespace detail

/// Deterministic PO-MOESP on cycled signals:
///  1. block Hankels U_p, U_f, Y_p, Y_f with depth s;
///  2. LQ of [U_f; U_p; Y_p; Y_f]; the Y_f x W_p block holds the projection of the
///     future outputs on past data with the future inputs removed;
///  3. SVD of that block, leading `order` directions give the extended observability matrix;
///  4. C from its first block row, A by shift invariance (least squares);
///  5. B, D (and the initial state) by linear least squares on the output equation.
inline IdentifiedModel subspace_identify(const CycledSignal& u, const CycledSignal& y, const IdConfig& cfg) {
  if (u.M != y.M) throw Error(ErrorKind::DimensionMismatch, "input and output signals use different periods");
  if (u.N() != y.N()) {
    throw Error(ErrorKind::DimensionMismatch, "input has " + std::to_string(u.N()) +
                                                  " samples, output has " + std::to_string(y.N()));
  }
  const int M = u.M;
  const int order = cfg.order;
  if (order < 1 || order % M != 0) {
    throw Error(ErrorKind::InvalidArgument, "model order must be a positive multiple of M");
  }
  const int n = order / M;
  const int p = u.q * M;  // cycled input width
  const int r = y.q * M;  // cycled output width
  const int s = cfg.block_rows > 0 ? cfg.block_rows : default_block_rows(n, y.q, M);
  if (s * r < order + 1 || s < 2) {
    throw Error(ErrorKind::InvalidArgument, "block_rows = " + std::to_string(s) +
                                                " cannot expose order " + std::to_string(order));
  }
  const int N = u.N();
  const long long needed = 2LL * s * (p + r) + order;
  if (N < needed) {
    throw Error(ErrorKind::InsufficientData, "need at least " + std::to_string(needed) +
                                                 " samples for block_rows " + std::to_string(s) +
                                                 " and order " + std::to_string(order) + ", got " +
                                                 std::to_string(N));
  }
  const int cols = N - 2 * s + 1;

  const Matrix Up = build_block_hankel(u.samples, s, cols, 0);
  const Matrix Uf = build_block_hankel(u.samples, s, cols, s);
  const Matrix Yp = build_block_hankel(y.samples, s, cols, 0);
  const Matrix Yf = build_block_hankel(y.samples, s, cols, s);

  IdentifiedModel model;
  model.n = n;
  model.m = u.q;
  model.l = y.q;
  model.M = M;
  model.block_rows = s;

  {
    Matrix U(2 * s * p, cols);
    U << Up, Uf;
    model.input_hankel_rank = rank_with_tol(U);
    if (model.input_hankel_rank < 2 * s * p) {
      throw Error(ErrorKind::ExcitationDeficient,
                  "input Hankel rank " + std::to_string(model.input_hankel_rank) + " < " +
                      std::to_string(2 * s * p));
    }
  }

  const Eigen::Index rows_uf = static_cast<Eigen::Index>(s) * p;
  const Eigen::Index rows_wp = static_cast<Eigen::Index>(s) * (p + r);
  const Eigen::Index rows_yf = static_cast<Eigen::Index>(s) * r;
  Matrix stackedT(cols, rows_uf + rows_wp + rows_yf);
  stackedT << Uf.transpose(), Up.transpose(), Yp.transpose(), Yf.transpose();
  Eigen::HouseholderQR<Matrix> lq(stackedT);
  const Matrix L = lq.matrixQR()
                       .topRows(rows_uf + rows_wp + rows_yf)
                       .triangularView<Eigen::Upper>()
                       .toDenseMatrix()
                       .transpose();
  const Matrix L32 = L.block(rows_uf + rows_wp, rows_uf, rows_yf, rows_wp);

  Eigen::BDCSVD<Matrix> svd(L32, Eigen::ComputeThinU);
  model.singular_values = svd.singularValues();
  const Vector& sv = model.singular_values;
  if (sv.size() <= order || sv(order - 1) <= 0.0) {
    model.order_gap = 1.0;
  } else {
    model.order_gap = sv(order) / sv(order - 1);
  }
  model.order_exposed = model.order_gap <= cfg.sv_gap_tol;

  const Matrix gamma =
      svd.matrixU().leftCols(order) * sv.head(order).cwiseSqrt().asDiagonal();
  model.C = gamma.topRows(r);
  const Matrix upper = gamma.topRows(static_cast<Eigen::Index>(s - 1) * r);
  const Matrix lower = gamma.bottomRows(static_cast<Eigen::Index>(s - 1) * r);
  model.A = upper.completeOrthogonalDecomposition().solve(lower);

  // y(k) = C A^k x0 + sum_{t<k} C A^{k-1-t} B u(t) + D u(k), linear in (x0, vec B, vec D).
  const Eigen::Index nx = order;
  const Eigen::Index unknowns = nx + nx * p + static_cast<Eigen::Index>(r) * p;
  detail::StreamingLeastSquares ls(unknowns);
  const Eigen::Index chunk_steps = std::max<Eigen::Index>(1, 2048 / r);
  Matrix CAk = model.C;
  Matrix Z = Matrix::Zero(nx, nx * p);  // column a + b*nx is the state driven by u_b into x_a
  const Matrix Ir = Matrix::Identity(r, r);
  const Matrix In = Matrix::Identity(nx, nx);
  for (Eigen::Index k0 = 0; k0 < N; k0 += chunk_steps) {
    const Eigen::Index steps = std::min<Eigen::Index>(chunk_steps, N - k0);
    Matrix phi = Matrix::Zero(steps * r, unknowns);
    Vector rhs(steps * r);
    for (Eigen::Index t = 0; t < steps; ++t) {
      const Eigen::Index k = k0 + t;
      auto rows = phi.middleRows(t * r, r);
      rows.leftCols(nx) = CAk;
      rows.middleCols(nx, nx * p) = model.C * Z;
      for (int b = 0; b < p; ++b) {
        rows.block(0, nx + nx * p + static_cast<Eigen::Index>(b) * r, r, r) = u.samples(b, k) * Ir;
      }
      rhs.segment(t * r, r) = y.samples.col(k);

      CAk = CAk * model.A;
      Matrix next = model.A * Z;
      for (int b = 0; b < p; ++b) {
        const double ub = u.samples(b, k);
        if (ub != 0.0) next.middleCols(static_cast<Eigen::Index>(b) * nx, nx) += ub * In;
      }
      Z = std::move(next);
    }
    ls.add(phi, rhs);
  }
  const Vector theta = ls.solve();
  model.B = Eigen::Map<const Matrix>(theta.data() + nx, nx, p);
  model.D = Eigen::Map<const Matrix>(theta.data() + nx + nx * p, r, p);
  return model;
}

struct MarkovMatch {
  bool passed = true;
  double worst_error = 0.0;
  int worst_index = 0;
};

/// Worst Frobenius distance between H_true(i) and H_id(i) for i = 0..depth.
inline MarkovMatch markov_match(const std::vector<Matrix>& H_true, const std::vector<Matrix>& H_id, int depth,
                                double tol) {
  if (static_cast<int>(H_true.size()) <= depth || static_cast<int>(H_id.size()) <= depth) {
    throw Error(ErrorKind::InvalidArgument, "Markov sequences do not cover depth " + std::to_string(depth));
  }
  MarkovMatch out;
  for (int i = 0; i <= depth; ++i) {
    const auto& a = H_true[static_cast<std::size_t>(i)];
    const auto& b = H_id[static_cast<std::size_t>(i)];
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      throw Error(ErrorKind::DimensionMismatch, "Markov parameter " + std::to_string(i) + " shapes differ");
    }
    const double e = (a - b).norm();
    if (e > out.worst_error) {
      out.worst_error = e;
      out.worst_index = i;
    }
  }
  out.passed = out.worst_error <= tol;
  return out;
}

}  // namespace mrid

#endif  // MRID_SUBSPACE_ID_HPP
