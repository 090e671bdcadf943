#include "setatom/baseline.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <set>

namespace setatom {
namespace {

TEST(InitDictionary, NormalizesDataColumns) {
  Eigen::MatrixXd y(2, 1);
  y << 3, 4;
  const auto d = init_dictionary(y, 1, InitMethod::data_columns, 0);
  EXPECT_NEAR(d.atoms(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(d.atoms(1, 0), 0.8, 1e-15);
  EXPECT_EQ(d.radii, Eigen::VectorXd::Zero(1));
  EXPECT_EQ(d.perm, std::vector<Index>{0});
}

TEST(InitDictionary, DistinctColumnsAndUnitNorm) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd y = oracle::random_unit_columns(5, 30, rng) * 3.0;
  const auto d = init_dictionary(y, 10, InitMethod::data_columns, 2);
  EXPECT_NO_THROW(validate(d));
  std::set<std::vector<double>> seen;
  for (Index j = 0; j < 10; ++j) seen.insert({d.atoms.col(j).data(), d.atoms.col(j).data() + 5});
  EXPECT_EQ(seen.size(), 10u);
  const auto g = init_dictionary(y, 10, InitMethod::random_gaussian, 2);
  EXPECT_NO_THROW(validate(g));
  EXPECT_EQ(init_dictionary(y, 10, InitMethod::random_gaussian, 2).atoms, g.atoms);
}

TEST(Omp, PicksBestAtomAndProjects) {
  Dictionary<double> d(Eigen::MatrixXd::Identity(3, 3));
  const Eigen::Vector3d y(0.5, -2.0, 1.0);
  const auto c1 = omp(y, d, 1);
  ASSERT_EQ(c1.support, std::vector<Index>{1});
  EXPECT_DOUBLE_EQ(c1.coeffs[0], -2.0);
  EXPECT_NEAR(c1.residual_norm, std::sqrt(1.25), 1e-15);
  const auto c3 = omp(y, d, 3);
  EXPECT_LT(c3.residual_norm, 1e-14);
}

TEST(Omp, ExactRecoveryOfSparseSignal) {
  std::mt19937_64 rng(4);
  Dictionary<double> d(oracle::random_unit_columns(10, 20, rng));
  const Eigen::VectorXd y = 2.0 * d.atoms.col(3) - 1.5 * d.atoms.col(11);
  const auto c = omp(y, d, 2);
  EXPECT_LT(c.residual_norm, 1e-10);
}

TEST(Omp, ResidualOrthogonalAndNoRepeats) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    Dictionary<double> d(oracle::random_unit_columns(8, 16, rng));
    const Eigen::VectorXd y = oracle::random_unit(8, rng) * 2.0;
    const auto c = omp(y, d, 4);
    const Eigen::VectorXd r = residual(y, c);
    for (Index t = 0; t < c.nnz(); ++t)
      EXPECT_LT(std::abs(d.atoms.col(c.support[static_cast<std::size_t>(t)]).dot(r)), 1e-10);
    std::set<Index> unique(c.support.begin(), c.support.end());
    EXPECT_EQ(unique.size(), c.support.size());
    EXPECT_NEAR(r.norm(), c.residual_norm, 1e-12);
  }
}

TEST(Omp, StopsOnZeroSignal) {
  Dictionary<double> d(Eigen::MatrixXd::Identity(3, 3));
  const auto c = omp(Eigen::Vector3d::Zero(), d, 2);
  EXPECT_EQ(c.nnz(), 0);
  EXPECT_EQ(c.residual_norm, 0.0);
}

TEST(Omp, RejectsBadSparsity) {
  Dictionary<double> d(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_THROW(omp(Eigen::Vector3d::Ones(), d, 0), std::invalid_argument);
  EXPECT_THROW(omp(Eigen::Vector3d::Ones(), d, 4), std::invalid_argument);
  EXPECT_THROW(omp(Eigen::Vector2d::Ones(), d, 1), std::invalid_argument);
}

struct Planted {
  Eigen::MatrixXd truth;
  Eigen::MatrixXd signals;
};

Planted planted_orthonormal(std::uint64_t seed, int N) {
  std::mt19937_64 rng(seed);
  Planted p;
  p.truth = oracle::random_orthonormal(8, rng);
  p.signals.resize(8, N);
  std::uniform_int_distribution<int> pick(0, 7);
  std::normal_distribution<double> normal;
  for (int l = 0; l < N; ++l) {
    const int a = pick(rng);
    int b = pick(rng);
    while (b == a) b = pick(rng);
    p.signals.col(l) = normal(rng) * p.truth.col(a) + normal(rng) * p.truth.col(b);
  }
  return p;
}

TEST(AksvdTrain, RecoversPlantedOrthonormalDictionary) {
  const Planted p = planted_orthonormal(21, 500);
  const auto d = aksvd_train(p.signals, 8, 2, 50, 3);
  EXPECT_GE(oracle::matched_atoms(d.atoms, p.truth, 0.99), 6);
}

TEST(AksvdTrain, TrainErrorNeverIncreases) {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd y = oracle::random_unit_columns(6, 200, rng);
  std::vector<double> history;
  const auto d = aksvd_train(y, 12, 2, 30, 1, &history);
  ASSERT_EQ(history.size(), 30u);
  for (std::size_t k = 1; k < history.size(); ++k) EXPECT_LE(history[k], history[k - 1] + 1e-9);
  EXPECT_NO_THROW(validate(d));
}

TEST(AksvdTrain, RejectsZeroIterations) {
  const Eigen::MatrixXd y = Eigen::MatrixXd::Identity(3, 5);
  EXPECT_THROW(aksvd_train(y, 3, 1, 0, 0), std::invalid_argument);
}

TEST(AksvdTrain, ReplacesUnusedAtoms) {
  // Two copies of one atom: the duplicate is never selected and must move.
  Eigen::MatrixXd atoms(2, 2);
  atoms << 1, 1, 0, 0;
  Eigen::MatrixXd y(2, 4);
  y << 1, 2, 0, 0, 0, 0, 1, 3;
  const auto d = aksvd_train(y, Dictionary<double>(atoms), 1, 1);
  EXPECT_NEAR(std::abs(d.atoms.col(0).dot(d.atoms.col(1))), 0.0, 1e-12);
}

TEST(MeanPerElementError, Definition) {
  std::vector<SparseCode<double>> codes(2);
  codes[0].residual_norm = 2.0;
  codes[1].residual_norm = 4.0;
  EXPECT_DOUBLE_EQ(mean_per_element_error(codes, 4), 0.75);
}

TEST(Omp, FloatInstantiation) {
  Dictionary<float> d(Eigen::MatrixXf::Identity(3, 3));
  const auto c = omp(Eigen::Vector3f(0.0f, 1.0f, 0.5f), d, 1);
  EXPECT_EQ(c.support, std::vector<Index>{1});
}

}  // namespace
}  // namespace setatom
