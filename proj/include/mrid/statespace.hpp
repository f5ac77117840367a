#ifndef MRID_STATESPACE_HPP
#define MRID_STATESPACE_HPP

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdio>
#include <string>
#include <vector>

#include "mrid/numerics.hpp"

namespace mrid {

/// Anything exposing the four dense matrices of x(k+1) = A x + B u, y = C x + D u.
/// StateSpace, CycledSystem, IdentifiedModel and the transformed model all qualify.
template <typename S>
concept LinearSystem = requires(const S& s) {
  { s.A } -> std::convertible_to<const Matrix&>;
  { s.B } -> std::convertible_to<const Matrix&>;
  { s.C } -> std::convertible_to<const Matrix&>;
  { s.D } -> std::convertible_to<const Matrix&>;
};

struct StateSpace {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int l() const { return static_cast<int>(C.rows()); }
};

using ObservationMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Input/output record. Column k of each matrix is sample k.
struct SignalLog {
  Matrix u;                  // m x N
  Matrix y;                  // l x N
  Vector x0;                 // n
  Matrix x;                  // n x N, states x(0..N-1); empty when loaded from file
  ObservationMask observed;  // l x N, false where the sample was masked out

  int N() const { return static_cast<int>(u.cols()); }
};

namespace detail {

inline std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void check_system_dims(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D) {
  if (A.rows() != A.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "A must be square, got " + dims(A));
  }
  if (B.rows() != A.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "(A, B): A is " + dims(A) + " but B is " + dims(B));
  }
  if (C.cols() != A.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "(A, C): A is " + dims(A) + " but C is " + dims(C));
  }
  if (D.rows() != C.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "(C, D): C is " + dims(C) + " but D is " + dims(D));
  }
  if (D.cols() != B.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "(B, D): B is " + dims(B) + " but D is " + dims(D));
  }
}

}  // namespace detail

inline StateSpace make_state_space(Matrix A, Matrix B, Matrix C, Matrix D) {
  detail::check_system_dims(A, B, C, D);
  if (A.rows() < 1 || B.cols() < 1 || C.rows() < 1) {
    throw Error(ErrorKind::DimensionMismatch, "n, m and l must all be at least 1");
  }
  require_finite(A, "A");
  require_finite(B, "B");
  require_finite(C, "C");
  require_finite(D, "D");
  return StateSpace{std::move(A), std::move(B), std::move(C), std::move(D)};
}

/// Runs the recursion from x0 over every column of u. States are kept in the log.
template <LinearSystem S>
SignalLog simulate(const S& sys, const Matrix& u, const Vector& x0) {
  const Matrix& A = sys.A;
  const Matrix& B = sys.B;
  const Matrix& C = sys.C;
  const Matrix& D = sys.D;
  if (u.cols() < 1) throw Error(ErrorKind::InvalidArgument, "input sequence is empty");
  if (u.rows() != B.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "input has " + std::to_string(u.rows()) +
                                                  " channels, system expects " +
                                                  std::to_string(B.cols()));
  }
  if (x0.size() != A.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "x0 has length " + std::to_string(x0.size()) +
                                                  ", system order is " + std::to_string(A.rows()));
  }
  require_finite(u, "input sequence");
  require_finite(x0, "x0");

  const Eigen::Index N = u.cols();
  SignalLog log;
  log.u = u;
  log.x0 = x0;
  log.x.resize(A.rows(), N);
  log.y.resize(C.rows(), N);
  log.observed = ObservationMask::Constant(C.rows(), N, true);
  Vector x = x0;
  for (Eigen::Index k = 0; k < N; ++k) {
    log.x.col(k) = x;
    log.y.col(k) = C * x + D * u.col(k);
    x = A * x + B * u.col(k);
  }
  return log;
}

template <LinearSystem S>
SignalLog simulate(const S& sys, const Matrix& u) {
  return simulate(sys, u, Vector::Zero(sys.A.rows()));
}

/// H(0) = D, H(i) = C A^{i-1} B.
template <LinearSystem S>
std::vector<Matrix> markov(const S& sys, int count) {
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "markov count must be >= 1");
  std::vector<Matrix> h;
  h.reserve(static_cast<std::size_t>(count));
  h.push_back(sys.D);
  Matrix AkB = sys.B;
  for (int i = 1; i < count; ++i) {
    h.push_back(sys.C * AkB);
    AkB = sys.A * AkB;
  }
  return h;
}

/// [B, AB, ..., A^{h-1} B]
inline Matrix controllability_matrix(const Matrix& A, const Matrix& B, int horizon) {
  Matrix out(B.rows(), B.cols() * horizon);
  Matrix AkB = B;
  for (int k = 0; k < horizon; ++k) {
    out.middleCols(k * B.cols(), B.cols()) = AkB;
    AkB = A * AkB;
  }
  return out;
}

/// [C; CA; ...; C A^{h-1}]
inline Matrix observability_matrix(const Matrix& C, const Matrix& A, int horizon) {
  Matrix out(C.rows() * horizon, C.cols());
  Matrix CAk = C;
  for (int k = 0; k < horizon; ++k) {
    out.middleRows(k * C.rows(), C.rows()) = CAk;
    CAk = CAk * A;
  }
  return out;
}

/// Horizon equals the state dimension (Mn for a cycled system).
template <LinearSystem S>
Matrix ctrb(const S& sys) {
  return controllability_matrix(sys.A, sys.B, static_cast<int>(sys.A.rows()));
}

template <LinearSystem S>
Matrix obsv(const S& sys) {
  return observability_matrix(sys.C, sys.A, static_cast<int>(sys.A.rows()));
}

/// Coefficients in z, highest degree first. Denominators are monic.
struct TransferFunction {
  std::vector<double> num;
  std::vector<double> den;

  friend bool operator==(const TransferFunction&, const TransferFunction&) = default;
};

/// One SISO transfer function per (output i, input j) of C (zI - A)^{-1} B + D.
///
/// Leverrier-Faddeev: with N_1 = I, a_k = -tr(A N_k) / k and N_{k+1} = A N_k + a_k I,
/// det(zI - A) = z^n + a_1 z^{n-1} + ... + a_n and adj(zI - A) = sum_k N_k z^{n-k}.
/// Leading coefficients that are exactly zero (D = 0) are dropped; near-cancelling
/// factors are kept.
template <LinearSystem S>
std::vector<std::vector<TransferFunction>> transfer_functions(const S& sys) {
  const Matrix& A = sys.A;
  const Eigen::Index n = A.rows();
  const Eigen::Index m = sys.B.cols();
  const Eigen::Index l = sys.C.rows();

  std::vector<double> den(static_cast<std::size_t>(n + 1), 0.0);
  den[0] = 1.0;
  // adj_terms[k-1] = C N_k B, an l x m matrix, coefficient of z^{n-k}
  std::vector<Matrix> adj_terms;
  adj_terms.reserve(static_cast<std::size_t>(n));
  Matrix Nk = Matrix::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    adj_terms.push_back(sys.C * Nk * sys.B);
    const Matrix ANk = A * Nk;
    const double ak = -ANk.trace() / static_cast<double>(k);
    den[static_cast<std::size_t>(k)] = ak;
    Nk = ANk;
    Nk.diagonal().array() += ak;
  }

  std::vector<std::vector<TransferFunction>> grid(static_cast<std::size_t>(l));
  for (Eigen::Index i = 0; i < l; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double d = sys.D(i, j);
      std::vector<double> num(static_cast<std::size_t>(n + 1));
      num[0] = d;
      for (Eigen::Index k = 1; k <= n; ++k) {
        num[static_cast<std::size_t>(k)] =
            adj_terms[static_cast<std::size_t>(k - 1)](i, j) + d * den[static_cast<std::size_t>(k)];
      }
      auto first = std::find_if(num.begin(), num.end(), [](double c) { return c != 0.0; });
      if (first == num.end()) first = num.end() - 1;
      grid[static_cast<std::size_t>(i)].push_back(
          TransferFunction{std::vector<double>(first, num.end()), den});
    }
  }
  return grid;
}

namespace detail {

/// Pads at the high-degree end (front) to `len`.
inline std::vector<double> pad_front(const std::vector<double>& p, std::size_t len) {
  std::vector<double> out(len - p.size(), 0.0);
  out.insert(out.end(), p.begin(), p.end());
  return out;
}

inline std::vector<double> scaled(std::vector<double> p, double s) {
  for (double& c : p) c *= s;
  return p;
}

}  // namespace detail

/// Max absolute coefficient difference after making both denominators monic and
/// aligning degrees.
inline double tf_distance(const TransferFunction& p, const TransferFunction& q) {
  if (p.den.empty() || q.den.empty() || p.den.front() == 0.0 || q.den.front() == 0.0) {
    throw Error(ErrorKind::InvalidArgument, "transfer function denominator has zero leading coefficient");
  }
  const double sp = 1.0 / p.den.front();
  const double sq = 1.0 / q.den.front();
  const auto compare = [](const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t len = std::max(a.size(), b.size());
    const auto pa = detail::pad_front(a, len);
    const auto pb = detail::pad_front(b, len);
    double worst = 0.0;
    for (std::size_t k = 0; k < len; ++k) worst = std::max(worst, std::abs(pa[k] - pb[k]));
    return worst;
  };
  return std::max(compare(detail::scaled(p.num, sp), detail::scaled(q.num, sq)),
                  compare(detail::scaled(p.den, sp), detail::scaled(q.den, sq)));
}

/// Human-readable polynomial in z; coefficients below `drop` in magnitude are omitted.
inline std::string polynomial_to_string(const std::vector<double>& p, double drop = 1e-9) {
  std::string out;
  const std::size_t deg = p.empty() ? 0 : p.size() - 1;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double c = p[k];
    if (std::abs(c) <= drop) continue;
    const std::size_t power = deg - k;
    char buf[64];
    const double mag = std::abs(c);
    const bool unit = std::abs(mag - 1.0) < 1e-12 && power > 0;
    if (out.empty()) {
      if (c < 0) out += "-";
    } else {
      out += c < 0 ? " - " : " + ";
    }
    if (!unit) {
      std::snprintf(buf, sizeof(buf), "%.6g", mag);
      out += buf;
    }
    if (power >= 1) out += "z";
    if (power >= 2) out += "^" + std::to_string(power);
  }
  return out.empty() ? "0" : out;
}

inline std::string to_string(const TransferFunction& tf, double drop = 1e-9) {
  return "(" + polynomial_to_string(tf.num, drop) + ") / (" + polynomial_to_string(tf.den, drop) + ")";
}

}  // namespace mrid

#endif  // MRID_STATESPACE_HPP
