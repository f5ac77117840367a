#include <gtest/gtest.h>

#include <complex>
#include <random>

#include "mrid/benchmark.hpp"
#include "oracles.hpp"
#include "support.hpp"

using mrid::ErrorKind;
using mrid::Matrix;
using mrid::StateSpace;
using mrid::Vector;
using support::kind_of;

namespace {

StateSpace scalar_lag() {
  return mrid::make_state_space(Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                                Matrix::Zero(1, 1));
}

StateSpace random_system(std::mt19937_64& rng, int n, int m, int l) {
  std::normal_distribution<double> N01;
  const auto fill = [&](int r, int c) {
    Matrix x(r, c);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = N01(rng);
    return x;
  };
  Matrix A = fill(n, n);
  A *= 0.8 / std::max(1.0, A.operatorNorm());
  return mrid::make_state_space(A, fill(n, m), fill(l, n), fill(l, m));
}

}  // namespace

TEST(MakeStateSpace, BenchmarkPlantDimensions) {
  const StateSpace ss = mrid::benchmark::plant();
  EXPECT_EQ(ss.n(), 3);
  EXPECT_EQ(ss.m(), 1);
  EXPECT_EQ(ss.l(), 2);
}

TEST(MakeStateSpace, MismatchedRowsRejected) {
  EXPECT_EQ(kind_of([] {
              mrid::make_state_space(Matrix::Zero(2, 2), Matrix::Zero(3, 1), Matrix::Zero(1, 2), Matrix::Zero(1, 1));
            }),
            ErrorKind::DimensionMismatch);
}

TEST(MakeStateSpace, MessageNamesOffendingPair) {
  try {
    mrid::make_state_space(Matrix::Zero(2, 2), Matrix::Zero(3, 1), Matrix::Zero(1, 2), Matrix::Zero(1, 1));
    FAIL();
  } catch (const mrid::Error& e) {
    EXPECT_NE(std::string(e.what()).find("(A, B)"), std::string::npos);
  }
}

TEST(MakeStateSpace, ScalarSystem) {
  const StateSpace ss = scalar_lag();
  EXPECT_EQ(ss.n(), 1);
  EXPECT_EQ(ss.m(), 1);
  EXPECT_EQ(ss.l(), 1);
}

TEST(MakeStateSpace, RejectsNonFinite) {
  Matrix A = Matrix::Zero(1, 1);
  A(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_EQ(kind_of([&] { mrid::make_state_space(A, Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1)); }),
            ErrorKind::NonFinite);
}

TEST(Simulate, ScalarImpulseIsGeometric) {
  Matrix u = Matrix::Zero(1, 8);
  u(0, 0) = 1.0;
  const auto log = mrid::simulate(scalar_lag(), u);
  EXPECT_EQ(log.y(0, 0), 0.0);
  double expected = 1.0;
  for (int k = 1; k < 8; ++k) {
    EXPECT_DOUBLE_EQ(log.y(0, k), expected);
    expected *= 0.5;
  }
}

TEST(Simulate, ZeroInputZeroStateGivesZeroOutput) {
  const auto log = mrid::simulate(mrid::benchmark::plant(), Matrix::Zero(1, 25));
  EXPECT_EQ(mrid::max_abs(log.y), 0.0);
  EXPECT_EQ(mrid::max_abs(log.x), 0.0);
}

TEST(Simulate, BenchmarkImpulseFirstSampleIsCB) {
  Matrix u = Matrix::Zero(1, 3);
  u(0, 0) = 1.0;
  const auto log = mrid::simulate(mrid::benchmark::plant(), u);
  EXPECT_DOUBLE_EQ(log.y(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(log.y(1, 1), 0.1);
}

TEST(Simulate, WrongVectorLengthsRejected) {
  const StateSpace ss = mrid::benchmark::plant();
  EXPECT_EQ(kind_of([&] { mrid::simulate(ss, Matrix::Zero(2, 5)); }), ErrorKind::DimensionMismatch);
  EXPECT_EQ(kind_of([&] { mrid::simulate(ss, Matrix::Zero(1, 5), Vector::Zero(2)); }), ErrorKind::DimensionMismatch);
}

TEST(Simulate, HonorsInitialState) {
  const StateSpace ss = mrid::benchmark::plant();
  Vector x0(3);
  x0 << 1, 2, 3;
  const auto log = mrid::simulate(ss, Matrix::Zero(1, 4), x0);
  EXPECT_LE(mrid::max_abs(log.x.col(3) - oracle::naive_pow(ss.A, 3) * x0), 1e-14);
  EXPECT_LE(mrid::max_abs(log.y.col(0) - ss.C * x0), 1e-15);
}

TEST(Markov, ZeroFeedthroughGivesZeroFirstParameter) {
  const auto H = mrid::markov(mrid::benchmark::plant(), 3);
  EXPECT_EQ(H[0], Matrix::Zero(2, 1));
}

TEST(Markov, ScalarLagIsGeometric) {
  const auto H = mrid::markov(scalar_lag(), 10);
  EXPECT_EQ(H[0](0, 0), 0.0);
  for (int i = 1; i < 10; ++i) EXPECT_DOUBLE_EQ(H[static_cast<std::size_t>(i)](0, 0), std::pow(0.5, i - 1));
}

TEST(Markov, ImpulseResponseEquivalenceOnRandomSystems) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 25; ++trial) {
    const StateSpace ss = random_system(rng, 1 + trial % 4, 1 + trial % 2, 1 + trial % 3);
    const int count = 30;
    const auto H = mrid::markov(ss, count);
    const auto ref = oracle::impulse_markov(ss, count);
    for (int i = 0; i < count; ++i) {
      EXPECT_LE(mrid::max_abs(H[static_cast<std::size_t>(i)] - ref[static_cast<std::size_t>(i)]), 1e-12);
    }
    // library simulate agrees with the same oracle, one input channel at a time
    for (int j = 0; j < ss.m(); ++j) {
      Matrix u = Matrix::Zero(ss.m(), count);
      u(j, 0) = 1.0;
      const auto log = mrid::simulate(ss, u);
      for (int k = 0; k < count; ++k) {
        EXPECT_LE(mrid::max_abs(log.y.col(k) - ref[static_cast<std::size_t>(k)].col(j)), 1e-12);
      }
    }
  }
}

TEST(Markov, SimilarityInvariance) {
  std::mt19937_64 rng(202);
  std::normal_distribution<double> N01;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 4;
    const StateSpace ss = random_system(rng, n, 1, 2);
    Matrix P(n, n);
    for (int i = 0; i < P.size(); ++i) P.data()[i] = N01(rng);
    P += 3.0 * Matrix::Identity(n, n);
    const Matrix Pi = P.inverse();
    const StateSpace sim{Pi * ss.A * P, Pi * ss.B, ss.C * P, ss.D};
    const auto H1 = mrid::markov(ss, 12);
    const auto H2 = mrid::markov(sim, 12);
    for (std::size_t i = 0; i < H1.size(); ++i) EXPECT_LE(mrid::max_abs(H1[i] - H2[i]), 1e-10);
  }
}

TEST(Ranks, BenchmarkPlantIsControllableAndObservable) {
  const StateSpace ss = mrid::benchmark::plant();
  EXPECT_EQ(mrid::rank_with_tol(mrid::ctrb(ss)), 3);
  EXPECT_EQ(mrid::rank_with_tol(mrid::obsv(ss)), 3);
}

TEST(Ranks, ZeroInputMatrixHasZeroControllabilityRank) {
  const StateSpace ss =
      mrid::make_state_space(Matrix::Constant(1, 1, 0.5), Matrix::Zero(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1));
  EXPECT_EQ(mrid::rank_with_tol(mrid::ctrb(ss)), 0);
}

TEST(TransferFunctions, BenchmarkOutputsMatchExpectedCoefficients) {
  const auto tf = mrid::transfer_functions(mrid::benchmark::plant());
  const auto expected = mrid::benchmark::expected_transfer_functions();
  ASSERT_EQ(tf.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& got = tf[i][0];
    const auto& want = expected[i];
    ASSERT_EQ(got.den.size(), want.den.size());
    for (std::size_t k = 0; k < want.den.size(); ++k) EXPECT_NEAR(got.den[k], want.den[k], 1e-15);
    ASSERT_EQ(got.num.size(), want.num.size()) << "output " << i;
    for (std::size_t k = 0; k < want.num.size(); ++k) EXPECT_NEAR(got.num[k], want.num[k], 1e-15);
  }
}

TEST(TransferFunctions, FirstOrderLag) {
  const auto tf = mrid::transfer_functions(scalar_lag())[0][0];
  EXPECT_EQ(tf.num, std::vector<double>({1.0}));
  EXPECT_EQ(tf.den, std::vector<double>({1.0, -0.5}));
}

TEST(TransferFunctions, PrintedForm) {
  const auto tf = mrid::transfer_functions(mrid::benchmark::plant());
  EXPECT_EQ(mrid::to_string(tf[0][0]), "(z^2 + 0.9z) / (z^3 + 0.4z^2 - 0.5z - 0.8)");
  EXPECT_EQ(mrid::to_string(tf[1][0]), "(0.1z^2 + 0.34z + 0.77) / (z^3 + 0.4z^2 - 0.5z - 0.8)");
}

TEST(TransferFunctions, AgreeWithFrequencyResponseOracle) {
  std::mt19937_64 rng(303);
  const std::complex<double> points[] = {{1.3, 0.2}, {-0.7, 1.1}, {2.0, -0.5}, {0.1, 1.7}};
  for (int trial = 0; trial < 20; ++trial) {
    const StateSpace ss = random_system(rng, 1 + trial % 4, 1 + trial % 2, 1 + (trial / 2) % 2);
    const auto tf = mrid::transfer_functions(ss);
    for (const auto z : points) {
      const auto G = oracle::frequency_response(ss.A, ss.B, ss.C, ss.D, z);
      for (int i = 0; i < ss.l(); ++i) {
        for (int j = 0; j < ss.m(); ++j) {
          const auto v = oracle::tf_eval(tf[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], z);
          EXPECT_LE(std::abs(v - G(i, j)), 1e-10 * (1.0 + std::abs(G(i, j))));
        }
      }
    }
  }
}

TEST(TransferFunctions, SimilarityInvariance) {
  std::mt19937_64 rng(404);
  std::normal_distribution<double> N01;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 4;
    const StateSpace ss = random_system(rng, n, 1, 2);
    Matrix P(n, n);
    for (int i = 0; i < P.size(); ++i) P.data()[i] = N01(rng);
    P += 3.0 * Matrix::Identity(n, n);
    const Matrix Pi = P.inverse();
    const auto a = mrid::transfer_functions(ss);
    const auto b = mrid::transfer_functions(StateSpace{Pi * ss.A * P, Pi * ss.B, ss.C * P, ss.D});
    for (int i = 0; i < 2; ++i) {
      EXPECT_LE(mrid::tf_distance(a[static_cast<std::size_t>(i)][0], b[static_cast<std::size_t>(i)][0]), 1e-8);
    }
  }
}

TEST(TfDistance, IdenticalIsZero) {
  const auto tf = mrid::benchmark::expected_transfer_functions()[0];
  EXPECT_EQ(mrid::tf_distance(tf, tf), 0.0);
}

TEST(TfDistance, ResidualCubicCoefficient) {
  const auto ref = mrid::benchmark::expected_transfer_functions()[0];
  const mrid::TransferFunction with_residual{{1, 0.9, 1.29e-15}, ref.den};
  EXPECT_LE(mrid::tf_distance(with_residual, ref), 2e-15);
}

TEST(TfDistance, SingleCoefficientDelta) {
  const mrid::TransferFunction p{{1}, {1, -0.5}};
  const mrid::TransferFunction q{{1}, {1, -0.6}};
  EXPECT_NEAR(mrid::tf_distance(p, q), 0.1, 1e-15);
}

TEST(TfDistance, NormalizesDenominatorsAndAlignsDegrees) {
  const mrid::TransferFunction p{{2, 1.8, 0}, {2, 0.8, -1, -1.6}};
  const auto ref = mrid::benchmark::expected_transfer_functions()[0];
  EXPECT_LE(mrid::tf_distance(p, ref), 1e-15);
  const mrid::TransferFunction padded{{0, 1, 0.9, 0}, ref.den};
  EXPECT_EQ(mrid::tf_distance(padded, ref), 0.0);
}
