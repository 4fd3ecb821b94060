#include "honeycomb/relativistic.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <random>

using namespace honeycomb;

namespace {
const std::complex<double> I{0, 1};
constexpr double kPi = 3.14159265358979323846;
}

TEST(Gamma, AnticommutatorsExact) {
  const auto g = euclidean_gammas();
  const auto t = anticommutator_table(g);
  for (int m = 0; m < 3; ++m)
    for (int n = 0; n < 3; ++n) EXPECT_EQ(t[m][n].cwiseAbs().maxCoeff(), 0.0) << m << n;
  const Mat4c a00 = g.g[0] * g.g[0] + g.g[0] * g.g[0];
  EXPECT_EQ((a00 + 2.0 * Mat4c::Identity()).norm(), 0.0);
  EXPECT_EQ((g.g[0] * g.g[1] + g.g[1] * g.g[0]).norm(), 0.0);
}

TEST(Gamma, SimilarityInvariance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  const auto g = euclidean_gammas();
  for (int t = 0; t < 20; ++t) {
    Mat4c S;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) S(i, j) = {n(rng), n(rng)};
    S += 3.0 * Mat4c::Identity();
    EXPECT_LT(anticommutator_defect(similarity_transform(g, S)), 1e-12);
  }
}

TEST(Rotation, ClosedFormMatchesMatrixExponential) {
  const auto g = euclidean_gammas();
  const Mat4c comm = g.g[0] * g.g[1] - g.g[1] * g.g[0];
  for (double th : {0.3, 1.0, 2.7, -4.0}) {
    const Mat4c e = (th / 4 * comm).exp();
    EXPECT_LT((e - spinor_rotation(th, g)).norm(), 1e-13);
  }
}

TEST(Rotation, ConjugationIdentity) {
  const auto g = euclidean_gammas();
  for (double th : {0.0, 0.4, kPi / 2, 2.0, kPi, 2 * kPi})
    EXPECT_LT(max_difference(rotation_conjugation(th, g), rotated_reference(th, g)), 1e-12);
  EXPECT_EQ(max_difference(rotation_conjugation(0.0, g), g), 0.0);
  EXPECT_LT(max_difference(rotation_conjugation(2 * kPi, g), g), 1e-12);
}

TEST(Rotation, QuarterTurnBlocks) {
  const auto g = euclidean_gammas();
  const auto s = pauli();
  const Eigen::Matrix2cd expected = (s[0] + I * s[2]) / std::sqrt(2.0);
  const Mat4c R = spinor_rotation(kPi / 2, g);
  // block diagonal in the (omega = +, omega = -) split
  EXPECT_LT(R.topRightCorner(2, 2).norm() + R.bottomLeftCorner(2, 2).norm(), 1e-15);
  for (int w : {+1, -1}) EXPECT_LT((sublattice_block(R, w) - expected).norm(), 1e-15);
}

TEST(Rotation, KslashInvariant) {
  // R^{-1} (gamma . R_theta q) R = gamma . q, i.e. psibar kslash psi is invariant.
  const auto g = euclidean_gammas();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2, 2);
  auto slash = [&](const Eigen::Vector3d& k) { return Mat4c(k(0) * g.g[0] + k(1) * g.g[1] + k(2) * g.g[2]); };
  for (int t = 0; t < 20; ++t) {
    const double th = u(rng) * kPi;
    const Eigen::Vector3d q(u(rng), u(rng), u(rng));
    const Eigen::Vector3d p(q(0) * std::cos(th) - q(1) * std::sin(th), q(1) * std::cos(th) + q(0) * std::sin(th), q(2));
    const Mat4c lhs = spinor_rotation(-th, g) * slash(p) * spinor_rotation(th, g);
    EXPECT_LT((lhs - slash(q)).norm(), 1e-12);
  }
}

TEST(Spinor, DiracBlocksMatchSublatticeForm) {
  const auto g = euclidean_gammas();
  const Eigen::Vector3d k(0.4, -0.3, 0.9);
  for (int w : {+1, -1}) {
    Eigen::Matrix2cd expected;
    expected << -I * k(0), I * k(1) - double(w) * k(2), -I * k(1) - double(w) * k(2), -I * k(0);
    EXPECT_LT((sublattice_block(dirac_form(k, g), w) - expected).norm(), 1e-15);
  }
  const Mat4c D = dirac_form(k, g);
  EXPECT_EQ(D.topRightCorner(2, 2).norm() + D.bottomLeftCorner(2, 2).norm(), 0.0);
}
