#ifndef MRID_BENCHMARK_HPP
#define MRID_BENCHMARK_HPP

#include <vector>

#include "mrid/statespace.hpp"

namespace mrid::benchmark {

/// Third-order, single-input, two-output reference plant.
inline StateSpace plant() {
  Matrix A(3, 3);
  A << 0, 0, 0.8, 1, 0, 0.5, 0, 1, -0.4;
  Matrix B(3, 1);
  B << 1, 0, 0;
  Matrix C(2, 3);
  C << 1, 0.5, 0.3, 0.1, 0.3, 0.7;
  return make_state_space(A, B, C, Matrix::Zero(2, 1));
}

/// Fast sensor every step, slow sensor every third step (M = 3).
inline std::vector<int> rates_fast_slow() { return {1, 3}; }

/// Sensors every second and every third step (M = 6).
inline std::vector<int> rates_two_three() { return {2, 3}; }

/// Expected per-output transfer functions of plant(), highest power first.
inline std::vector<TransferFunction> expected_transfer_functions() {
  const std::vector<double> den{1, 0.4, -0.5, -0.8};
  return {TransferFunction{{1, 0.9, 0}, den}, TransferFunction{{0.1, 0.34, 0.77}, den}};
}

/// Block-diagonal values of H(i) S_1^i (i = 1..4) for plant() under rates_fast_slow():
/// phase-0 block carries C A^{i-1} B, phases 1 and 2 carry only its first entry.
/// The second entry of the i = 4 block is -0.05 (0.1*0.8 + 0.3*0.5 + 0.7*(-0.4)).
inline std::vector<Matrix> shifted_markov_fast_slow() {
  const double first[4] = {1.0, 0.5, 0.3, 0.93};
  const double second[4] = {0.1, 0.3, 0.7, -0.05};
  std::vector<Matrix> out;
  for (int i = 0; i < 4; ++i) {
    Matrix H = Matrix::Zero(6, 3);
    H(0, 0) = first[i];
    H(1, 0) = second[i];
    H(2, 1) = first[i];
    H(4, 2) = first[i];
    out.push_back(H);
  }
  return out;
}

}  // namespace mrid::benchmark

#endif  // MRID_BENCHMARK_HPP
