#include <gtest/gtest.h>

#include <random>

#include "mrid/benchmark.hpp"
#include "mrid/multirate.hpp"
#include "oracles.hpp"
#include "support.hpp"

using mrid::ErrorKind;
using mrid::Matrix;
using mrid::MultirateSpec;
using support::kind_of;

namespace {

Matrix diag(std::initializer_list<double> d) {
  Matrix V = Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) {
    V(i, i) = x;
    ++i;
  }
  return V;
}

}  // namespace

TEST(BuildMasks, FastAndSlowSensors) {
  const MultirateSpec spec = mrid::build_masks({1, 3});
  ASSERT_EQ(spec.M, 3);
  EXPECT_EQ(spec.masks[0], diag({1, 1}));
  EXPECT_EQ(spec.masks[1], diag({1, 0}));
  EXPECT_EQ(spec.masks[2], diag({1, 0}));
}

TEST(BuildMasks, RatesTwoAndThree) {
  const MultirateSpec spec = mrid::build_masks({2, 3});
  ASSERT_EQ(spec.M, 6);
  const std::vector<Matrix> expected = {diag({1, 1}), diag({0, 0}), diag({1, 0}),
                                        diag({0, 1}), diag({1, 0}), diag({0, 0})};
  for (int p = 0; p < 6; ++p) EXPECT_EQ(spec.masks[static_cast<std::size_t>(p)], expected[static_cast<std::size_t>(p)]);
}

TEST(BuildMasks, SingleRateReducesToIdentity) {
  const MultirateSpec spec = mrid::build_masks({1});
  ASSERT_EQ(spec.M, 1);
  EXPECT_EQ(spec.masks[0], diag({1}));
}

TEST(BuildMasks, RejectsNonPositiveRate) {
  EXPECT_EQ(kind_of([] { mrid::build_masks({0, 2}); }), ErrorKind::InvalidRate);
  EXPECT_EQ(kind_of([] { mrid::build_masks({-1}); }), ErrorKind::InvalidRate);
  EXPECT_EQ(kind_of([] { mrid::build_masks({}); }), ErrorKind::InvalidRate);
}

TEST(BuildMasks, OffsetsShiftThePattern) {
  const MultirateSpec spec = mrid::build_masks({3}, {1});
  EXPECT_EQ(spec.masks[0], diag({0}));
  EXPECT_EQ(spec.masks[1], diag({1}));
  EXPECT_EQ(spec.masks[2], diag({0}));
  EXPECT_EQ(kind_of([] { mrid::build_masks({2, 3}, {0}); }), ErrorKind::DimensionMismatch);
}

TEST(BuildMasks, PeriodIsLcmAndEachSensorReportsMOverRateTimes) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> rate(1, 6);
  for (int trial = 0; trial < 50; ++trial) {
    const int l = 1 + trial % 4;
    std::vector<int> rates;
    std::vector<int> offsets;
    for (int i = 0; i < l; ++i) {
      rates.push_back(rate(rng));
      offsets.push_back(rate(rng) - 3);
    }
    const MultirateSpec spec = mrid::build_masks(rates, offsets);
    EXPECT_EQ(spec.M, oracle::lcm_of(rates));
    for (int i = 0; i < l; ++i) {
      double count = 0.0;
      for (const Matrix& V : spec.masks) count += V(i, i);
      EXPECT_EQ(count, spec.M / rates[static_cast<std::size_t>(i)]);
    }
    for (const Matrix& V : spec.masks) {
      EXPECT_EQ(V * V, V);
      EXPECT_EQ(V, Matrix(V.diagonal().asDiagonal()));
    }
  }
}

TEST(BuildMasks, RepeatedRatesGiveIdenticalRows) {
  const MultirateSpec spec = mrid::build_masks({2, 2, 4});
  EXPECT_EQ(spec.M, 4);
  for (const Matrix& V : spec.masks) EXPECT_EQ(V(0, 0), V(1, 1));
}

TEST(SimulateMultirate, MaskedOutputsEqualMaskTimesFullOutputs) {
  const auto ss = mrid::benchmark::plant();
  const auto spec = mrid::build_masks(mrid::benchmark::rates_two_three());
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-1, 1);
  Matrix u(1, 60);
  for (int k = 0; k < 60; ++k) u(0, k) = U(rng);
  const auto full = mrid::simulate(ss, u);
  const auto masked = mrid::simulate_multirate(ss, spec, u);
  for (int k = 0; k < 60; ++k) {
    const Matrix expected = spec.mask(k) * full.y.col(k);
    EXPECT_EQ(Matrix(masked.y.col(k)), expected) << "k = " << k;
    for (int i = 0; i < 2; ++i) EXPECT_EQ(masked.observed(i, k), spec.observes(i, k));
  }
}

TEST(SimulateMultirate, NothingObservedAtPhaseOne) {
  const auto spec = mrid::build_masks(mrid::benchmark::rates_two_three());
  Matrix u = Matrix::Zero(1, 4);
  u(0, 0) = 1.0;
  const auto log = mrid::simulate_multirate(mrid::benchmark::plant(), spec, u);
  EXPECT_EQ(log.y(0, 1), 0.0);
  EXPECT_EQ(log.y(1, 1), 0.0);
  EXPECT_FALSE(log.observed(0, 1));
  EXPECT_FALSE(log.observed(1, 1));
}

TEST(SimulateMultirate, RateCountMustMatchOutputs) {
  const auto spec = mrid::build_masks({1});
  EXPECT_EQ(kind_of([&] { mrid::simulate_multirate(mrid::benchmark::plant(), spec, Matrix::Zero(1, 3)); }),
            ErrorKind::DimensionMismatch);
}

TEST(ObservabilityAssumption, BenchmarkHoldsAtPhaseZero) {
  const auto phases = mrid::check_observability_assumption(mrid::benchmark::plant(),
                                                           mrid::build_masks(mrid::benchmark::rates_two_three()));
  ASSERT_FALSE(phases.empty());
  EXPECT_EQ(phases.front(), 0);
}

TEST(ObservabilityAssumption, ZeroOutputMatrixHasNoPhase) {
  auto ss = mrid::benchmark::plant();
  ss.C.setZero();
  EXPECT_TRUE(mrid::check_observability_assumption(ss, mrid::build_masks({2, 3})).empty());
}

TEST(ObservabilityAssumption, SingleRateGivesPhaseZero) {
  const auto ss = mrid::make_state_space(Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                                         Matrix::Zero(1, 1));
  EXPECT_EQ(mrid::check_observability_assumption(ss, mrid::build_masks({1})), std::vector<int>{0});
}

TEST(ObservabilityAssumption, SingularAIsRejected) {
  auto ss = mrid::benchmark::plant();
  ss.A.row(2) = ss.A.row(0) + ss.A.row(1);
  EXPECT_EQ(kind_of([&] { mrid::check_observability_assumption(ss, mrid::build_masks({2, 3})); }),
            ErrorKind::RankDeficientA);
}

TEST(ObservabilityAssumption, PhasesMatchDirectRankOracle) {
  const auto ss = mrid::benchmark::plant();
  const auto spec = mrid::build_masks({2, 3});
  const Matrix AM = oracle::naive_pow(ss.A, spec.M);
  std::vector<int> expected;
  for (int j = 0; j < spec.M; ++j) {
    const Matrix VC = spec.masks[static_cast<std::size_t>(j)] * ss.C;
    Matrix O(3 * VC.rows(), 3);
    Matrix P = Matrix::Identity(3, 3);
    for (int k = 0; k < 3; ++k) {
      O.middleRows(k * VC.rows(), VC.rows()) = VC * P;
      P = P * AM;
    }
    if (oracle::lu_rank(O) == 3) expected.push_back(j);
  }
  EXPECT_EQ(mrid::check_observability_assumption(ss, spec), expected);
}
