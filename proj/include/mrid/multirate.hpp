#ifndef MRID_MULTIRATE_HPP
#define MRID_MULTIRATE_HPP

#include <numeric>
#include <string>
#include <vector>

#include "mrid/statespace.hpp"

namespace mrid {

/// Output sampling pattern. Sensor i reports when (k - offsets[i]) mod rates[i] == 0.
struct MultirateSpec {
  std::vector<int> rates;
  std::vector<int> offsets;
  int M = 1;                  // lcm of rates
  std::vector<Matrix> masks;  // V_0 .. V_{M-1}, l x l diagonal 0/1

  int l() const { return static_cast<int>(rates.size()); }
  const Matrix& mask(long long k) const { return masks[static_cast<std::size_t>(k % M)]; }
  bool observes(int output, long long k) const { return mask(k)(output, output) != 0.0; }
};

inline MultirateSpec build_masks(const std::vector<int>& rates, std::vector<int> offsets = {}) {
  if (rates.empty()) throw Error(ErrorKind::InvalidRate, "at least one output rate is required");
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (rates[i] < 1) {
      throw Error(ErrorKind::InvalidRate, "rate of output " + std::to_string(i + 1) + " is " +
                                              std::to_string(rates[i]) + ", must be >= 1");
    }
  }
  if (offsets.empty()) offsets.assign(rates.size(), 0);
  if (offsets.size() != rates.size()) {
    throw Error(ErrorKind::DimensionMismatch, "one phase offset per output rate is required");
  }

  MultirateSpec spec;
  spec.rates = rates;
  spec.M = 1;
  for (int r : rates) spec.M = std::lcm(spec.M, r);
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const int r = rates[i];
    offsets[i] = ((offsets[i] % r) + r) % r;
  }
  spec.offsets = std::move(offsets);

  const auto l = static_cast<Eigen::Index>(rates.size());
  spec.masks.reserve(static_cast<std::size_t>(spec.M));
  for (int k = 0; k < spec.M; ++k) {
    Matrix V = Matrix::Zero(l, l);
    for (Eigen::Index i = 0; i < l; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      if ((k - spec.offsets[idx]) % rates[idx] == 0) V(i, i) = 1.0;
    }
    spec.masks.push_back(std::move(V));
  }
  return spec;
}

namespace detail {

inline void check_rates_match(const StateSpace& ss, const MultirateSpec& spec) {
  if (spec.l() != ss.l()) {
    throw Error(ErrorKind::DimensionMismatch, "plant has " + std::to_string(ss.l()) +
                                                  " outputs but " + std::to_string(spec.l()) +
                                                  " rates were given");
  }
}

}  // namespace detail

/// Plant recursion with y(k) = V_k (C x + D u). Unobserved entries are stored as exact 0
/// and flagged false in `observed`.
inline SignalLog simulate_multirate(const StateSpace& ss, const MultirateSpec& spec, const Matrix& u,
                                    const Vector& x0) {
  detail::check_rates_match(ss, spec);
  SignalLog log = simulate(ss, u, x0);
  for (Eigen::Index k = 0; k < log.y.cols(); ++k) {
    const Matrix& V = spec.mask(k);
    for (Eigen::Index i = 0; i < log.y.rows(); ++i) {
      const bool seen = V(i, i) != 0.0;
      log.observed(i, k) = seen;
      if (!seen) log.y(i, k) = 0.0;
    }
  }
  return log;
}

inline SignalLog simulate_multirate(const StateSpace& ss, const MultirateSpec& spec, const Matrix& u) {
  return simulate_multirate(ss, spec, u, Vector::Zero(ss.n()));
}

/// Phases j for which (V_j C, A^M) has an observability matrix of rank n.
/// An empty result means the plant cannot be identified under this sampling pattern.
inline std::vector<int> check_observability_assumption(const StateSpace& ss, const MultirateSpec& spec,
                                                       double tol = kDefaultRankTol) {
  detail::check_rates_match(ss, spec);
  const int n = ss.n();
  const int rank_a = rank_with_tol(ss.A, tol);
  if (rank_a < n) {
    throw Error(ErrorKind::RankDeficientA,
                "rank(A) = " + std::to_string(rank_a) + " < n = " + std::to_string(n));
  }
  const Matrix AM = mat_pow(ss.A, spec.M);
  std::vector<int> phases;
  for (int j = 0; j < spec.M; ++j) {
    const Matrix VC = spec.masks[static_cast<std::size_t>(j)] * ss.C;
    if (rank_with_tol(observability_matrix(VC, AM, n), tol) == n) phases.push_back(j);
  }
  return phases;
}

}  // namespace mrid

#endif  // MRID_MULTIRATE_HPP
