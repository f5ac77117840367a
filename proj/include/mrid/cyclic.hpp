#ifndef MRID_CYCLIC_HPP
#define MRID_CYCLIC_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mrid/multirate.hpp"

namespace mrid {

/// Structural tolerance for identified models.
inline constexpr double kStructureTolIdentified = 1e-6;
/// Structural tolerance for analytically constructed matrices.
inline constexpr double kStructureTolExact = 1e-12;

/// M-fold cyclic reformulation. A and B are cyclic, C and D block diagonal.
struct CycledSystem {
  Matrix A;  // Mn x Mn
  Matrix B;  // Mn x Mm
  Matrix C;  // Ml x Mn
  Matrix D;  // Ml x Mm
  int n = 0;
  int m = 0;
  int l = 0;
  int M = 1;
};

/// Sample k carries the raw sample in block k mod M and zeros elsewhere.
struct CycledSignal {
  int q = 0;
  int M = 1;
  Matrix samples;  // Mq x N

  int N() const { return static_cast<int>(samples.cols()); }
};

enum class StructureKind { BlockDiagonal, Cyclic };

struct StructureReport {
  StructureKind kind = StructureKind::BlockDiagonal;
  double max_offpattern = 0.0;
  bool passed = true;
  double tol = 0.0;
};

/// Mq x Mq matrix with I_q in blocks (p, p+1 mod M).
inline Matrix shift_matrix(int q, int M) {
  if (q < 1 || M < 1) throw Error(ErrorKind::InvalidArgument, "shift_matrix needs q >= 1 and M >= 1");
  Matrix S = Matrix::Zero(static_cast<Eigen::Index>(M) * q, static_cast<Eigen::Index>(M) * q);
  for (int p = 0; p < M; ++p) {
    S.block(p * q, ((p + 1) % M) * q, q, q).setIdentity();
  }
  return S;
}

/// shift_matrix(q, M)^e, built directly with e reduced mod M (negative e allowed).
inline Matrix shift_power(int q, int M, long long e) {
  if (q < 1 || M < 1) throw Error(ErrorKind::InvalidArgument, "shift_power needs q >= 1 and M >= 1");
  const int r = static_cast<int>(((e % M) + M) % M);
  Matrix S = Matrix::Zero(static_cast<Eigen::Index>(M) * q, static_cast<Eigen::Index>(M) * q);
  for (int p = 0; p < M; ++p) {
    S.block(p * q, ((p + r) % M) * q, q, q).setIdentity();
  }
  return S;
}

inline CycledSignal cycle_signal(const Matrix& raw, int M) {
  if (M < 1) throw Error(ErrorKind::InvalidArgument, "period M must be >= 1");
  CycledSignal c;
  c.q = static_cast<int>(raw.rows());
  c.M = M;
  c.samples = Matrix::Zero(raw.rows() * M, raw.cols());
  for (Eigen::Index k = 0; k < raw.cols(); ++k) {
    c.samples.block((k % M) * raw.rows(), k, raw.rows(), 1) = raw.col(k);
  }
  return c;
}

/// Inverse of cycle_signal. Rejects samples with mass outside block k mod M.
inline Matrix uncycle_signal(const CycledSignal& c, double tol = 1e-12) {
  if (c.samples.rows() != static_cast<Eigen::Index>(c.q) * c.M) {
    throw Error(ErrorKind::MalformedCycledSignal, "sample length " + std::to_string(c.samples.rows()) +
                                                      " is not M*q = " + std::to_string(c.q * c.M));
  }
  Matrix raw(c.q, c.samples.cols());
  for (Eigen::Index k = 0; k < c.samples.cols(); ++k) {
    const Eigen::Index home = k % c.M;
    for (Eigen::Index b = 0; b < c.M; ++b) {
      const auto blk = c.samples.block(b * c.q, k, c.q, 1);
      if (b == home) {
        raw.col(k) = blk;
      } else if (c.q > 0 && blk.cwiseAbs().maxCoeff() > tol) {
        throw Error(ErrorKind::MalformedCycledSignal,
                    "sample " + std::to_string(k) + " has a nonzero block at position " +
                        std::to_string(b) + " (expected only " + std::to_string(home) + ")");
      }
    }
  }
  return raw;
}

namespace detail {

/// Places `block` in positions (p+1 mod M, p) for every p.
inline Matrix cyclic_from_blocks(const std::vector<Matrix>& blocks) {
  const int M = static_cast<int>(blocks.size());
  const Eigen::Index r = blocks.front().rows();
  const Eigen::Index c = blocks.front().cols();
  Matrix out = Matrix::Zero(r * M, c * M);
  for (int p = 0; p < M; ++p) {
    out.block(((p + 1) % M) * r, p * c, r, c) = blocks[static_cast<std::size_t>(p)];
  }
  return out;
}

}  // namespace detail

inline CycledSystem cyclic_reformulate(const StateSpace& ss, const MultirateSpec& spec) {
  detail::check_rates_match(ss, spec);
  const auto Mz = static_cast<std::size_t>(spec.M);
  std::vector<Matrix> VC;
  std::vector<Matrix> VD;
  VC.reserve(Mz);
  VD.reserve(Mz);
  for (const Matrix& V : spec.masks) {
    VC.push_back(V * ss.C);
    VD.push_back(V * ss.D);
  }
  CycledSystem cs;
  cs.A = detail::cyclic_from_blocks(std::vector<Matrix>(Mz, ss.A));
  cs.B = detail::cyclic_from_blocks(std::vector<Matrix>(Mz, ss.B));
  cs.C = block_diagonal(VC);
  cs.D = block_diagonal(VD);
  cs.n = ss.n();
  cs.m = ss.m();
  cs.l = ss.l();
  cs.M = spec.M;
  return cs;
}

inline Vector cycled_initial_state(const Vector& x0, int M) {
  Vector out = Vector::Zero(x0.size() * M);
  out.head(x0.size()) = x0;
  return out;
}

namespace detail {

inline void check_block_dims(const Matrix& mat, int block_rows, int block_cols, int M) {
  if (block_rows < 1 || block_cols < 1 || M < 1 ||
      mat.rows() != static_cast<Eigen::Index>(block_rows) * M ||
      mat.cols() != static_cast<Eigen::Index>(block_cols) * M) {
    throw Error(ErrorKind::DimensionMismatch,
                "matrix is " + dims(mat) + ", expected " + std::to_string(block_rows * M) + "x" +
                    std::to_string(block_cols * M) + " (" + std::to_string(M) + " blocks of " +
                    std::to_string(block_rows) + "x" + std::to_string(block_cols) + ")");
  }
}

template <typename AllowedBlock>
StructureReport scan_blocks(const Matrix& mat, int br, int bc, int M, double tol, StructureKind kind,
                            AllowedBlock allowed) {
  check_block_dims(mat, br, bc, M);
  double worst = 0.0;
  for (int p = 0; p < M; ++p) {
    for (int q = 0; q < M; ++q) {
      if (allowed(p, q)) continue;
      worst = std::max(worst, max_abs(mat.block(p * br, q * bc, br, bc)));
    }
  }
  return StructureReport{kind, worst, worst <= tol, tol};
}

}  // namespace detail

inline StructureReport is_block_diagonal(const Matrix& mat, int block_rows, int block_cols, int M,
                                         double tol) {
  return detail::scan_blocks(mat, block_rows, block_cols, M, tol, StructureKind::BlockDiagonal,
                             [](int p, int q) { return p == q; });
}

/// Allowed blocks: (p+1, p) and the corner (0, M-1).
inline StructureReport is_cyclic_matrix(const Matrix& mat, int block_rows, int block_cols, int M,
                                        double tol) {
  return detail::scan_blocks(mat, block_rows, block_cols, M, tol, StructureKind::Cyclic,
                             [M](int p, int q) { return p == (q + 1) % M; });
}

struct MarkovStructureEntry {
  int i = 0;
  int j = 0;
  StructureReport block_diagonal;        // S_l^i H(i+j) S_m^j
  std::optional<StructureReport> cyclic;  // S_l^i H(i+j) S_m^{j-1}, or S_l^{i-1} H(i) when j = 0
};

struct MarkovStructureReport {
  std::vector<MarkovStructureEntry> entries;
  bool passed = true;
  double worst = 0.0;
  int worst_i = 0;
  int worst_j = 0;
};

inline int default_markov_depth(int M, int n) { return 2 * M * n; }

/// Checks the shifted Markov-parameter structure for every i, j >= 0 with i + j <= maxdepth.
inline MarkovStructureReport verify_markov_structure(const std::vector<Matrix>& H, int l, int m, int M,
                                                     double tol, int maxdepth) {
  if (static_cast<int>(H.size()) <= maxdepth) {
    throw Error(ErrorKind::InvalidArgument, "need H(0.." + std::to_string(maxdepth) + "), got " +
                                                std::to_string(H.size()) + " matrices");
  }
  std::vector<Matrix> Sl;
  std::vector<Matrix> Sm;
  for (int e = 0; e < M; ++e) {
    Sl.push_back(shift_power(l, M, e));
    Sm.push_back(shift_power(m, M, e));
  }
  const auto Sl_pow = [&](long long e) -> const Matrix& { return Sl[static_cast<std::size_t>(((e % M) + M) % M)]; };
  const auto Sm_pow = [&](long long e) -> const Matrix& { return Sm[static_cast<std::size_t>(((e % M) + M) % M)]; };

  MarkovStructureReport report;
  const auto note = [&](const StructureReport& r, int i, int j) {
    if (!r.passed) report.passed = false;
    if (r.max_offpattern > report.worst) {
      report.worst = r.max_offpattern;
      report.worst_i = i;
      report.worst_j = j;
    }
  };
  for (int i = 0; i <= maxdepth; ++i) {
    for (int j = 0; i + j <= maxdepth; ++j) {
      const Matrix& Hk = H[static_cast<std::size_t>(i + j)];
      MarkovStructureEntry e;
      e.i = i;
      e.j = j;
      e.block_diagonal = is_block_diagonal(Sl_pow(i) * Hk * Sm_pow(j), l, m, M, tol);
      note(e.block_diagonal, i, j);
      if (j >= 1) {
        e.cyclic = is_cyclic_matrix(Sl_pow(i) * Hk * Sm_pow(j - 1), l, m, M, tol);
      } else if (i >= 1) {
        e.cyclic = is_cyclic_matrix(Sl_pow(i - 1) * Hk, l, m, M, tol);
      }
      if (e.cyclic) note(*e.cyclic, i, j);
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

/// Ranks of the controllability and observability matrices with horizon Mn.
template <LinearSystem S>
std::pair<int, int> cycled_ranks(const S& cs, double tol = kDefaultRankTol) {
  return {rank_with_tol(ctrb(cs), tol), rank_with_tol(obsv(cs), tol)};
}

}  // namespace mrid

#endif  // MRID_CYCLIC_HPP
