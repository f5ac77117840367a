#ifndef MRID_TRANSFORM_HPP
#define MRID_TRANSFORM_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mrid/subspace_id.hpp"

namespace mrid {

/// Block sizes of a cyclic model: n states, m inputs, l outputs, period M.
struct CycleDims {
  int n = 0;
  int m = 0;
  int l = 0;
  int M = 1;

  friend bool operator==(const CycleDims&, const CycleDims&) = default;
};

inline CycleDims dims_of(const CycledSystem& cs) { return {cs.n, cs.m, cs.l, cs.M}; }
inline CycleDims dims_of(const IdentifiedModel& id) { return {id.n, id.m, id.l, id.M}; }

/// F = [F_0 ... F_{n-1}], each n x l, with rank F = n.
struct SelectorF {
  std::vector<Matrix> blocks;
};

/// G_0 .. G_{n-1}, each m x n, with rank [G_0; ...; G_{n-1}] = n.
struct SelectorG {
  std::vector<Matrix> blocks;
};

inline SelectorF make_selector_F(std::vector<Matrix> blocks) {
  if (blocks.empty()) throw Error(ErrorKind::RankConditionFailed, "F has no blocks");
  const Eigen::Index n = static_cast<Eigen::Index>(blocks.size());
  const Eigen::Index l = blocks.front().cols();
  Matrix F(n, n * l);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Matrix& b = blocks[static_cast<std::size_t>(j)];
    if (b.rows() != n || b.cols() != l) {
      throw Error(ErrorKind::DimensionMismatch, "F_" + std::to_string(j) + " must be " +
                                                    std::to_string(n) + "x" + std::to_string(l));
    }
    F.middleCols(j * l, l) = b;
  }
  if (const int r = rank_with_tol(F); r != n) {
    throw Error(ErrorKind::RankConditionFailed, "rank [F_0 ... F_{n-1}] = " + std::to_string(r) +
                                                    ", expected " + std::to_string(n));
  }
  return SelectorF{std::move(blocks)};
}

inline SelectorG make_selector_G(std::vector<Matrix> blocks) {
  if (blocks.empty()) throw Error(ErrorKind::RankConditionFailed, "G has no blocks");
  const Eigen::Index n = static_cast<Eigen::Index>(blocks.size());
  const Eigen::Index m = blocks.front().rows();
  Matrix G(n * m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Matrix& b = blocks[static_cast<std::size_t>(j)];
    if (b.rows() != m || b.cols() != n) {
      throw Error(ErrorKind::DimensionMismatch, "G_" + std::to_string(j) + " must be " +
                                                    std::to_string(m) + "x" + std::to_string(n));
    }
    G.middleRows(j * m, m) = b;
  }
  if (const int r = rank_with_tol(G); r != n) {
    throw Error(ErrorKind::RankConditionFailed, "rank [G_0; ...; G_{n-1}] = " + std::to_string(r) +
                                                    ", expected " + std::to_string(n));
  }
  return SelectorG{std::move(blocks)};
}

/// F_j has a single 1 at (j, 0). For l = 1 this is F = I_n.
inline SelectorF default_selector_F(int n, int l) {
  std::vector<Matrix> blocks;
  for (int j = 0; j < n; ++j) {
    Matrix b = Matrix::Zero(n, l);
    b(j, 0) = 1.0;
    blocks.push_back(std::move(b));
  }
  return make_selector_F(std::move(blocks));
}

/// G_j has a single 1 at (0, j). For m = 1 the stacked G is I_n.
inline SelectorG default_selector_G(int n, int m) {
  std::vector<Matrix> blocks;
  for (int j = 0; j < n; ++j) {
    Matrix b = Matrix::Zero(m, n);
    b(0, j) = 1.0;
    blocks.push_back(std::move(b));
  }
  return make_selector_G(std::move(blocks));
}

/// blockdiag(block, ..., block), M copies.
inline Matrix lift_selector(const Matrix& block, int M) { return repeat_block_diagonal(block, M); }

/// Which selector block multiplies the A^{Mi+j} term.
///   General: G_{(Mi+j) mod n}
///   Example: G_i
enum class SelectorConvention { General, Example };

inline std::string_view to_string(SelectorConvention c) {
  return c == SelectorConvention::General ? "general" : "example";
}

inline int selector_index(SelectorConvention c, int i, int j, int M, int n) {
  return c == SelectorConvention::General ? (M * i + j) % n : i;
}

namespace detail {

template <LinearSystem S>
CycleDims infer_dims(const S& sys, int M) {
  if (M < 1 || sys.A.rows() % M != 0 || sys.B.cols() % M != 0 || sys.C.rows() % M != 0) {
    throw Error(ErrorKind::DimensionMismatch, "system dimensions are not multiples of M = " + std::to_string(M));
  }
  return {static_cast<int>(sys.A.rows() / M), static_cast<int>(sys.B.cols() / M),
          static_cast<int>(sys.C.rows() / M), M};
}

inline std::vector<Matrix> lifted(const std::vector<Matrix>& blocks, int M) {
  std::vector<Matrix> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back(lift_selector(b, M));
  return out;
}

inline void check_selector_F(const SelectorF& F, const CycleDims& d) {
  if (static_cast<int>(F.blocks.size()) != d.n || F.blocks.front().rows() != d.n ||
      F.blocks.front().cols() != d.l) {
    throw Error(ErrorKind::DimensionMismatch, "selector F does not match n = " + std::to_string(d.n) +
                                                  ", l = " + std::to_string(d.l));
  }
}

inline void check_selector_G(const SelectorG& G, const CycleDims& d) {
  if (static_cast<int>(G.blocks.size()) != d.n || G.blocks.front().rows() != d.m ||
      G.blocks.front().cols() != d.n) {
    throw Error(ErrorKind::DimensionMismatch, "selector G does not match n = " + std::to_string(d.n) +
                                                  ", m = " + std::to_string(d.m));
  }
}

}  // namespace detail

/// X = sum_{i<n} sum_{j<M} F_i^lift S_l^j C A^{Mi+j}.
///
/// F_i is paired with the A^{Mi} power, so block p of X is sum_j X_{p+j} A^j with
/// X_q = sum_i F_i V_q C A^{Mi}.
template <LinearSystem S>
Matrix build_X_check(const S& sys, const SelectorF& F, int M) {
  const CycleDims d = detail::infer_dims(sys, M);
  detail::check_selector_F(F, d);
  const auto Fl = detail::lifted(F.blocks, M);
  Matrix X = Matrix::Zero(sys.A.rows(), sys.A.cols());
  Matrix CAk = sys.C;
  for (int i = 0; i < d.n; ++i) {
    for (int j = 0; j < M; ++j) {
      X += Fl[static_cast<std::size_t>(i)] * (shift_power(d.l, M, j) * CAk);
      CAk = CAk * sys.A;
    }
  }
  return X;
}

/// Y = sum_{i<n} sum_{j<M} A^{Mi+j} B S_m^{j+1} G_idx^lift, idx chosen by `convention`.
/// Evaluated on an identified model this is the coordinate transform T.
template <LinearSystem S>
Matrix build_Y_check(const S& sys, const SelectorG& G, int M,
                     SelectorConvention convention = SelectorConvention::Example) {
  const CycleDims d = detail::infer_dims(sys, M);
  detail::check_selector_G(G, d);
  const auto Gl = detail::lifted(G.blocks, M);
  Matrix Y = Matrix::Zero(sys.A.rows(), sys.A.rows());
  Matrix AkB = sys.B;
  for (int i = 0; i < d.n; ++i) {
    for (int j = 0; j < M; ++j) {
      const int idx = selector_index(convention, i, j, M, d.n);
      Y += (AkB * shift_power(d.m, M, j + 1)) * Gl[static_cast<std::size_t>(idx)];
      AkB = sys.A * AkB;
    }
  }
  return Y;
}

struct TransformMatrix {
  Matrix T;
  int rank = 0;
  SelectorConvention convention = SelectorConvention::Example;
};

inline TransformMatrix build_transform(const IdentifiedModel& idm, const SelectorG& G, SelectorConvention convention,
                                       double rank_tol = kDefaultRankTol) {
  TransformMatrix out;
  out.T = build_Y_check(idm, G, idm.M, convention);
  out.rank = rank_with_tol(out.T, rank_tol);
  out.convention = convention;
  return out;
}

/// Four cycled-size matrices after the state transformation.
struct CycledModel {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D;
};

/// (T^{-1} A T, T^{-1} B, C T, D).
template <LinearSystem S>
CycledModel apply_transform(const S& sys, const Matrix& T, double rank_tol = kDefaultRankTol) {
  if (T.rows() != sys.A.rows() || T.cols() != sys.A.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "transform is " + detail::dims(T) + ", system order is " +
                                                  std::to_string(sys.A.rows()));
  }
  const Matrix Tinv = invert(T, rank_tol);
  return CycledModel{Tinv * sys.A * T, Tinv * sys.B, sys.C * T, sys.D};
}

/// Pre-transform quantities needed for the appendix diagnostics (X*, Z).
struct AppendixInputs {
  const IdentifiedModel* model = nullptr;
  const Matrix* T = nullptr;
  const SelectorF* F = nullptr;
  const SelectorG* G = nullptr;
};

struct Theorem1Report {
  StructureReport A_cyclic;
  StructureReport B_cyclic;
  StructureReport C_block_diagonal;
  StructureReport D_block_diagonal;
  // Appendix diagnostics; structure margins are relative to the matrix's largest entry.
  std::optional<StructureReport> X_star_block_diagonal;
  std::optional<int> X_star_rank;
  std::optional<StructureReport> Z_cyclic;

  bool passed() const {
    return A_cyclic.passed && B_cyclic.passed && C_block_diagonal.passed && D_block_diagonal.passed;
  }
  bool appendix_passed() const {
    return (!X_star_block_diagonal || X_star_block_diagonal->passed) && (!Z_cyclic || Z_cyclic->passed);
  }
  double worst() const {
    return std::max({A_cyclic.max_offpattern, B_cyclic.max_offpattern, C_block_diagonal.max_offpattern,
                     D_block_diagonal.max_offpattern});
  }
};

namespace detail {

inline Matrix normalized(const Matrix& m) {
  const double s = max_abs(m);
  return s > 0.0 ? Matrix(m / s) : m;
}

/// X* = X(C*, A*) T, with F_i paired to A*^{Mi} as in build_X_check.
inline Matrix appendix_X_star(const IdentifiedModel& idm, const Matrix& T, const SelectorF& F) {
  return build_X_check(idm, F, idm.M) * T;
}

/// Z = (sum_{k<Mn} F_{k mod n} S_l^k C* A*^k T) (T^{-1} A* T) T^{-1} (sum_{k<Mn} A*^k B* S_m^{k+1} G_{k mod n}).
inline Matrix appendix_Z(const IdentifiedModel& idm, const Matrix& T, const SelectorF& F, const SelectorG& G) {
  const int M = idm.M;
  const int n = idm.n;
  const int Mn = M * n;
  const auto Fl = lifted(F.blocks, M);
  const auto Gl = lifted(G.blocks, M);
  Matrix left = Matrix::Zero(Mn, Mn);
  Matrix right = Matrix::Zero(Mn, Mn);
  Matrix CAk = idm.C;
  Matrix AkB = idm.B;
  for (int k = 0; k < Mn; ++k) {
    const auto idx = static_cast<std::size_t>(k % n);
    left += Fl[idx] * shift_power(idm.l, M, k) * CAk;
    right += AkB * shift_power(idm.m, M, k + 1) * Gl[idx];
    CAk = CAk * idm.A;
    AkB = idm.A * AkB;
  }
  const Matrix Tinv = invert(T);
  return (left * T) * (Tinv * idm.A * T) * (Tinv * right);
}

}  // namespace detail

/// Structure checks of the transformed model: A_m and B_m cyclic, C_m and D_m block diagonal.
inline Theorem1Report verify_theorem1(const CycledModel& tm, const CycleDims& d, double tol,
                                      const AppendixInputs& appendix = {}) {
  Theorem1Report r;
  r.A_cyclic = is_cyclic_matrix(tm.A, d.n, d.n, d.M, tol);
  r.B_cyclic = is_cyclic_matrix(tm.B, d.n, d.m, d.M, tol);
  r.C_block_diagonal = is_block_diagonal(tm.C, d.l, d.n, d.M, tol);
  r.D_block_diagonal = is_block_diagonal(tm.D, d.l, d.m, d.M, tol);
  if (appendix.model && appendix.T && appendix.F) {
    const Matrix Xs = detail::appendix_X_star(*appendix.model, *appendix.T, *appendix.F);
    r.X_star_block_diagonal = is_block_diagonal(detail::normalized(Xs), d.n, d.n, d.M, tol);
    r.X_star_rank = rank_with_tol(Xs);
    if (appendix.G) {
      const Matrix Z = detail::appendix_Z(*appendix.model, *appendix.T, *appendix.F, *appendix.G);
      r.Z_cyclic = is_cyclic_matrix(detail::normalized(Z), d.n, d.n, d.M, tol);
    }
  }
  return r;
}

/// Per-phase components A_mi, B_mi, C_mi, D_mi of a model with cyclic structure.
struct CyclicModel {
  CycleDims dims;
  std::vector<Matrix> A_m;  // n x n, from block (i+1 mod M, i)
  std::vector<Matrix> B_m;  // n x m, from block (i+1 mod M, i)
  std::vector<Matrix> C_m;  // l x n, diagonal block i
  std::vector<Matrix> D_m;  // l x m, diagonal block i
  Matrix T;
  CycledModel transformed;  // raw T-transformed matrices, off-pattern mass included
  Theorem1Report theorem1;
};

inline CyclicModel extract_components(const CycledModel& tm, const CycleDims& d, double tol, Matrix T = Matrix(),
                                      const AppendixInputs& appendix = {}) {
  CyclicModel cm;
  cm.dims = d;
  cm.theorem1 = verify_theorem1(tm, d, tol, appendix);
  if (!cm.theorem1.passed()) {
    throw Error(ErrorKind::StructureViolation,
                "transformed model is not in cyclic form (worst off-pattern magnitude " +
                    std::to_string(cm.theorem1.worst()) + " > " + std::to_string(tol) + ")");
  }
  for (int i = 0; i < d.M; ++i) {
    const int next = (i + 1) % d.M;
    cm.A_m.push_back(tm.A.block(next * d.n, i * d.n, d.n, d.n));
    cm.B_m.push_back(tm.B.block(next * d.n, i * d.m, d.n, d.m));
    cm.C_m.push_back(tm.C.block(i * d.l, i * d.n, d.l, d.n));
    cm.D_m.push_back(tm.D.block(i * d.l, i * d.m, d.l, d.m));
  }
  cm.T = std::move(T);
  cm.transformed = tm;
  return cm;
}

/// Cyclic-form matrices rebuilt from the components alone (off-pattern entries exactly zero).
inline CycledModel reassemble(const CyclicModel& cm) {
  return CycledModel{detail::cyclic_from_blocks(cm.A_m), detail::cyclic_from_blocks(cm.B_m),
                     block_diagonal(cm.C_m), block_diagonal(cm.D_m)};
}

struct ComponentSpread {
  double A = 0.0;
  double B = 0.0;
};

/// Largest pairwise max-abs deviation among {A_mi} and among {B_mi}.
inline ComponentSpread component_spread(const CyclicModel& cm) {
  ComponentSpread s;
  for (std::size_t a = 0; a < cm.A_m.size(); ++a) {
    for (std::size_t b = a + 1; b < cm.A_m.size(); ++b) {
      s.A = std::max(s.A, max_abs(cm.A_m[a] - cm.A_m[b]));
      s.B = std::max(s.B, max_abs(cm.B_m[a] - cm.B_m[b]));
    }
  }
  return s;
}

/// LTI system made of one phase's components.
inline StateSpace phase_system(const CyclicModel& cm, int phase) {
  const auto p = static_cast<std::size_t>(phase);
  return StateSpace{cm.A_m[p], cm.B_m[p], cm.C_m[p], cm.D_m[p]};
}

struct TransferCheck {
  bool passed = true;
  std::vector<double> distances;  // per output, worst over inputs
  std::vector<int> phases;        // phase whose components were used for each output
};

/// Compares per-output transfer functions of the recovered components with a reference plant.
/// Output i is read from the first phase that observes it (phase 0 when no spec is given).
inline TransferCheck model_transfer_check(const CyclicModel& cm, const StateSpace& reference, double tol,
                                          const MultirateSpec* spec = nullptr) {
  if (reference.n() != cm.dims.n || reference.m() != cm.dims.m || reference.l() != cm.dims.l) {
    throw Error(ErrorKind::DimensionMismatch, "reference plant dimensions differ from the model");
  }
  const auto ref_tf = transfer_functions(reference);
  TransferCheck out;
  for (int i = 0; i < cm.dims.l; ++i) {
    int phase = 0;
    if (spec) {
      while (phase < spec->M && !spec->observes(i, phase)) ++phase;
      if (phase == spec->M) phase = 0;
    }
    const auto model_tf = transfer_functions(phase_system(cm, phase));
    double worst = 0.0;
    for (int j = 0; j < cm.dims.m; ++j) {
      worst = std::max(worst, tf_distance(model_tf[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                                          ref_tf[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
    }
    out.distances.push_back(worst);
    out.phases.push_back(phase);
    if (!(worst <= tol)) out.passed = false;
  }
  return out;
}

}  // namespace mrid

#endif  // MRID_TRANSFORM_HPP
