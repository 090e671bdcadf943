#include "setatom/cone.hpp"

#include "setatom/baseline.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

namespace setatom {
namespace {

constexpr double pi = std::numbers::pi;

TEST(CapHalfAngle, MatchesChord) {
  EXPECT_DOUBLE_EQ(cap_half_angle(0.0), 0.0);
  EXPECT_NEAR(cap_half_angle(2.0 * std::sin(pi / 8.0)), pi / 4.0, 1e-15);
}

TEST(CapMaxCorrelation, OutsideCapRotatesTowardsResidual) {
  const Eigen::Vector2d d(1.0, 0.0);
  const Eigen::Vector2d r(0.0, 2.0);
  const auto q = cap_max_correlation(d, 2.0 * std::sin(pi / 8.0), r);
  EXPECT_NEAR(q.psi, pi / 2.0, 1e-15);
  EXPECT_NEAR(q.phi, pi / 4.0, 1e-15);
  EXPECT_NEAR(q.best_corr, std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(q.best_atom[0], std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(q.best_atom[1], std::sqrt(0.5), 1e-15);
}

TEST(CapMaxCorrelation, InsideCapReachesResidualDirection) {
  const Eigen::Vector3d d(1.0, 0.0, 0.0);
  const Eigen::Vector3d r = 3.0 * Eigen::Vector3d(1.0, 0.05, 0.0).normalized();
  const auto q = cap_max_correlation(d, 0.2, r);
  EXPECT_NEAR(q.best_corr, 3.0, 1e-14);
  EXPECT_LT((q.best_atom - r / 3.0).norm(), 1e-14);
}

TEST(CapMaxCorrelation, NegativeSideUsesMinusResidual) {
  const Eigen::Vector2d d(1.0, 0.0);
  const Eigen::Vector2d r(-1.0, 0.3);
  const auto q = cap_max_correlation(d, 0.1, r);
  EXPECT_NEAR(q.best_corr, oracle::cap_arc_max_2d(d, 0.1, r, 200000), 1e-9);
  EXPECT_LT(q.best_atom.dot(r), 0.0);
}

TEST(CapMaxCorrelation, ZeroRadiusIsPlainCorrelation) {
  const Eigen::Vector3d d = Eigen::Vector3d(1, 2, 2) / 3.0;
  const Eigen::Vector3d r(-0.3, 0.7, 0.1);
  const auto q = cap_max_correlation(d, 0.0, r);
  EXPECT_EQ(q.best_corr, std::abs(d.dot(r)));
  EXPECT_EQ(q.best_atom, d);
}

TEST(CapMaxCorrelation, MatchesArcGridIn2D) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> rad(0.0, 1.9);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Vector2d d = oracle::random_unit(2, rng);
    const Eigen::Vector2d r = oracle::random_unit(2, rng) * 1.7;
    const double rho = rad(rng);
    const auto q = cap_max_correlation(d, rho, r);
    EXPECT_NEAR(q.best_corr, oracle::cap_arc_max_2d(d, rho, r, 20000), 1e-6);
    EXPECT_NEAR(std::abs(q.best_atom.dot(r)), q.best_corr, 1e-12);
    EXPECT_LE((q.best_atom - d).norm(), rho + 1e-12);
  }
}

TEST(CapMaxCorrelation, NoSampleOfTheCapDoesBetter) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> rad(0.01, 1.5);
  for (int trial = 0; trial < 60; ++trial) {
    const Index m = trial % 2 == 0 ? 3 : 8;
    const Eigen::VectorXd d = oracle::random_unit(m, rng);
    const Eigen::VectorXd r = oracle::random_unit(m, rng) * 2.0;
    const double rho = rad(rng);
    const auto q = cap_max_correlation(d, rho, r);
    EXPECT_NEAR(q.best_atom.norm(), 1.0, 1e-12);
    EXPECT_LE((q.best_atom - d).norm(), rho + 1e-12);
    EXPECT_GE(q.best_corr + 1e-12, oracle::cap_grid_max(d, rho, r, 5000, rng));
  }
}

TEST(CapMaxCorrelation, RejectsBadInput) {
  const Eigen::Vector2d d(1, 0);
  EXPECT_THROW(cap_max_correlation(d, 2.0, Eigen::Vector2d(0, 1)), std::invalid_argument);
  EXPECT_THROW(cap_max_correlation(d, -0.1, Eigen::Vector2d(0, 1)), std::invalid_argument);
  EXPECT_THROW(cap_max_correlation(d, 0.1, Eigen::Vector2d(0, 0)), std::invalid_argument);
}

TEST(ConeOmp, ZeroRadiiIdenticalToOmp) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Dictionary<double> d(oracle::random_unit_columns(8, 16, rng));
    const Eigen::VectorXd y = oracle::random_unit(8, rng) * 1.5;
    ConeParams p;
    p.s = 3;
    const auto a = cone_omp(y, d, p);
    const auto b = omp(y, d, 3);
    EXPECT_EQ(a.support, b.support);
    EXPECT_EQ(a.coeffs, b.coeffs);
    EXPECT_EQ(a.residual_norm, b.residual_norm);
  }
}

TEST(ConeOmp, SignalInsideConeIsExact) {
  std::mt19937_64 rng(4);
  Dictionary<double> d(oracle::random_unit_columns(5, 6, rng));
  d.radii.setConstant(0.1);
  const auto c = cone_omp(Eigen::VectorXd(2.0 * d.atoms.col(2)), d, ConeParams{});
  EXPECT_LT(c.residual_norm, 1e-12);
}

TEST(ConeOmp, NeverWorseThanCentralOmpOnOneStep) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    Dictionary<double> d(oracle::random_unit_columns(6, 10, rng));
    const Eigen::VectorXd y = oracle::random_unit(6, rng);
    Dictionary<double> wide = d;
    wide.radii.setConstant(0.15);
    ConeParams p;
    p.s = 1;
    EXPECT_LE(cone_omp(y, wide, p).residual_norm, omp(y, d, 1).residual_norm + 1e-12);
  }
}

TEST(ConeOmp, ActualAtomsLieInTheirCones) {
  std::mt19937_64 rng(6);
  Dictionary<double> d(oracle::random_unit_columns(6, 10, rng));
  for (Index j = 0; j < d.size(); ++j) d.radii[j] = 0.02 * static_cast<double>(j + 1);
  ConeParams p;
  p.s = 3;
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = cone_omp(oracle::random_unit(6, rng), d, p);
    for (Index t = 0; t < c.nnz(); ++t) {
      const Index j = c.support[static_cast<std::size_t>(t)];
      EXPECT_LE((c.actual_atoms.col(t) - d.atoms.col(j)).norm(), d.radii[j] + 1e-12);
    }
  }
}

TEST(ConeOverlap, WorkedExample) {
  const Eigen::Vector2d d1(1, 0);
  const Eigen::Vector2d d2(std::cos(0.1), std::sin(0.1));
  const auto o = cone_overlap(d1, d2, 0.1, 0.1, 0.01);
  EXPECT_NEAR(o.delta_min, 0.2 * std::sqrt(1.0 - 0.0025) + 0.01, 1e-15);
  EXPECT_NEAR(o.delta_min, 0.2097, 1e-4);
  EXPECT_TRUE(o.overlaps);
  EXPECT_FALSE(cone_overlap(d1, Eigen::Vector2d(0, 1), 0.1, 0.1, 0.01).overlaps);
}

TEST(SeparatePair, WorkedExample) {
  const Eigen::Vector2d d1(1, 0);
  const Eigen::Vector2d d2(0.995, std::sqrt(1.0 - 0.995 * 0.995));
  const double delta = (d1 - d2).norm();
  const double theta = separation_angle(delta, 0.2);
  EXPECT_NEAR(theta, 0.05015, 1e-5);
  std::mt19937_64 rng(0);
  const auto [a, b] = separate_pair<double>(d1, d2, 0.2, RotationMode::symmetric, 0.1, 0.1, rng);
  EXPECT_NEAR((a - b).norm(), 0.2, 1e-12);
  EXPECT_NEAR(std::acos(a.dot(d1)), theta, 1e-9);
  EXPECT_NEAR(std::acos(b.dot(d2)), theta, 1e-9);
}

TEST(SeparatePair, HitsTargetDistanceInBothModes) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const Index m = std::array<Index, 4>{2, 3, 8, 32}[static_cast<std::size_t>(trial % 4)];
    const Eigen::VectorXd d1 = oracle::random_unit(m, rng);
    Eigen::VectorXd d2 = d1 + 0.2 * u(rng) * oracle::random_unit(m, rng);
    d2.normalize();
    const double target = (d1 - d2).norm() + 0.01 + 0.3 * u(rng);
    const double r1 = 0.01 + 0.2 * u(rng);
    const double r2 = 0.01 + 0.2 * u(rng);
    for (RotationMode mode : {RotationMode::symmetric, RotationMode::radius_weighted}) {
      const auto [a, b] = separate_pair<double>(d1, d2, target, mode, r1, r2, rng);
      EXPECT_NEAR((a - b).norm(), target, 1e-8);
      EXPECT_NEAR(a.norm(), 1.0, 1e-12);
      if (mode == RotationMode::radius_weighted) {
        // each centre turns in proportion to 1/rho
        const double t1 = std::acos(std::clamp(a.dot(d1), -1.0, 1.0));
        const double t2 = std::acos(std::clamp(b.dot(d2), -1.0, 1.0));
        if (t1 + t2 > 1e-4) EXPECT_NEAR(t1 / (t1 + t2), (1.0 / r1) / (1.0 / r1 + 1.0 / r2), 1e-5);
      }
    }
  }
}

TEST(SeparatePair, LeavesSeparatedPairAlone) {
  std::mt19937_64 rng(0);
  const Eigen::Vector2d d1(1, 0);
  const Eigen::Vector2d d2(0, 1);
  const auto [a, b] = separate_pair<double>(d1, d2, 0.5, RotationMode::symmetric, 0.1, 0.1, rng);
  EXPECT_EQ(a, Eigen::VectorXd(d1));
  EXPECT_EQ(b, Eigen::VectorXd(d2));
}

TEST(SeparatePair, CollinearFallback) {
  std::mt19937_64 rng(9);
  const Eigen::VectorXd d = oracle::random_unit(5, rng);
  const auto [a, b] = separate_pair<double>(d, d, 0.3, RotationMode::symmetric, 0.1, 0.1, rng);
  EXPECT_NEAR((a - b).norm(), 0.3, 1e-12);
  EXPECT_NEAR((a - d).norm(), (b - d).norm(), 1e-12);
}

TEST(SeparatePair, RejectsImpossibleTarget) {
  std::mt19937_64 rng(0);
  const Eigen::VectorXd d = Eigen::Vector2d(1, 0);
  EXPECT_THROW(separate_pair<double>(d, d, 2.0, RotationMode::symmetric, 0.1, 0.1, rng), std::invalid_argument);
}

TEST(Decorrelate, SeparatesAllPairs) {
  std::mt19937_64 rng(10);
  Eigen::MatrixXd atoms(3, 4);
  const Eigen::VectorXd base = oracle::random_unit(3, rng);
  for (Index j = 0; j < 4; ++j) atoms.col(j) = (base + 0.02 * oracle::random_unit(3, rng)).normalized();
  Dictionary<double> d(atoms);
  d.radii.setConstant(0.1);
  const auto out = decorrelate(d, ConeParams{}, 1);
  EXPECT_TRUE(out.converged);
  EXPECT_GT(out.separations, 0);
  for (Index i = 0; i < 4; ++i)
    for (Index j = i + 1; j < 4; ++j)
      EXPECT_FALSE(cone_overlap(out.dict.atoms.col(i), out.dict.atoms.col(j), 0.1, 0.1, 0.01).overlaps);
}

TEST(Decorrelate, NoOverlapNoChange) {
  Dictionary<double> d(Eigen::MatrixXd::Identity(3, 3));
  d.radii.setConstant(0.1);
  const auto out = decorrelate(d, ConeParams{}, 1);
  EXPECT_TRUE(out.converged);
  EXPECT_EQ(out.passes, 1);
  EXPECT_EQ(out.dict.atoms, d.atoms);
}

TEST(Decorrelate, ReportsFailureWhenPackingIsImpossible) {
  // Six cones of radius 1.2 cannot fit on the circle.
  Eigen::MatrixXd atoms(2, 6);
  for (Index j = 0; j < 6; ++j) atoms.col(j) << std::cos(j * pi / 3.0), std::sin(j * pi / 3.0);
  Dictionary<double> d(atoms);
  d.radii.setConstant(1.2);
  ConeParams p;
  p.max_separation_passes = 5;
  const auto out = decorrelate(d, p, 1);
  EXPECT_FALSE(out.converged);
  EXPECT_EQ(out.passes, 5);
}

Eigen::MatrixXd cone_signals(std::uint64_t seed, int m, int N) {
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd basis = oracle::random_unit_columns(m, 2 * m, rng);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> pick(0, 2 * m - 1);
  Eigen::MatrixXd y(m, N);
  for (int l = 0; l < N; ++l) y.col(l) = normal(rng) * basis.col(pick(rng)) + normal(rng) * basis.col(pick(rng));
  return y;
}

TEST(ConeDl, TrainsAndKeepsRadii) {
  const Eigen::MatrixXd y = cone_signals(1, 6, 300);
  auto d0 = init_dictionary(y, 12, InitMethod::random_gaussian, 2);
  d0.radii.setConstant(0.05);
  TrainStats stats;
  const auto d = cone_dl(y, d0, ConeParams{}, 15, &stats);
  EXPECT_LT(stats.train_error.back(), stats.train_error.front());
  EXPECT_EQ(d.radii, d0.radii);
  EXPECT_NO_THROW(validate(d));
}

TEST(DlcAdapt, EndsSeparatedOnTargetRadii) {
  const Eigen::MatrixXd y = cone_signals(2, 6, 300);
  const auto d0 = init_dictionary(y, 12, InitMethod::random_gaussian, 3);
  const Eigen::VectorXd target = make_radii<double>({0.04, 0.12, RadiiDistribution::linear}, 12);
  ConeParams p;
  TrainStats stats;
  const auto d = dlc_adapt(y, d0, target, p, 20, 5, UseNorm::zero, 7, &stats);
  EXPECT_EQ(stats.decorrelation_runs, 4);
  Eigen::VectorXd sorted = d.radii;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  EXPECT_LT((sorted - target).cwiseAbs().maxCoeff(), 1e-15);
  if (stats.decorrelation_failures == 0) {
    for (Index i = 0; i < d.size(); ++i)
      for (Index j = i + 1; j < d.size(); ++j)
        EXPECT_FALSE(cone_overlap(d.atoms.col(i), d.atoms.col(j), d.radii[i], d.radii[j], p.delta0).overlaps);
  }
  const auto again = dlc_adapt(y, d0, target, p, 20, 5, UseNorm::zero, 7);
  EXPECT_EQ(again.atoms, d.atoms);
}

}  // namespace
}  // namespace setatom
