#include "honeycomb/free_theory.hpp"
#include "real_space_oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace honeycomb;

namespace {
const cplx I{0, 1};
}

TEST(FreePropagator, FermiPointIsDiagonal) {
  for (int w : {1, -1}) {
    const Mat2c g = propagator_momentum({0.37, fermi_point(w).p});
    EXPECT_LT((g - (I / 0.37) * Mat2c::Identity()).norm(), 1e-12);
  }
}

TEST(FreePropagator, InverseAndConjugation) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int t = 0; t < 200; ++t) {
    const MomentumPoint k{u(rng), Vec2d(u(rng), u(rng))};
    const Mat2c g = propagator_momentum(k);
    EXPECT_LT((g * free_quadratic_form(k) - Mat2c::Identity()).norm(), 1e-12);
    const Mat2c gm = propagator_momentum({-k.k0, -k.k});
    EXPECT_LT((gm - g.conjugate()).norm(), 1e-12);
  }
}

TEST(FreePropagator, SingularPointThrows) {
  EXPECT_THROW(propagator_momentum({0.0, fermi_point(1).p}), SingularPropagator);
}

TEST(FreePropagator, BandsResolveHopping) {
  const Vec2d k(0.3, 1.7);
  const auto b = bands(k);
  const Mat2c H = b.energy[0] * b.projector[0] + b.energy[1] * b.projector[1];
  EXPECT_LT((H - hopping_matrix(k)).norm(), 1e-13);
  EXPECT_LT((b.projector[0] * b.projector[1]).norm(), 1e-13);
}

TEST(FreePosition, MatchesRealSpaceDiagonalization) {
  const int L = 3;
  const double beta = 5.0;
  const auto spec = LatticeSpec::honeycomb(L);
  const oracle::RealSpaceFree rs(L, beta);
  for (double x0 : {0.7, 2.5, -1.3, 4.9})
    for (int n1 = 0; n1 < L; ++n1)
      for (int n2 = 0; n2 < L; ++n2) {
        const Mat2c S = propagator_position({x0, n1, n2}, beta, spec);
        for (int r = 0; r < 2; ++r)
          for (int q = 0; q < 2; ++q)
            EXPECT_NEAR(std::abs(S(r, q) - rs.G(rs.site(r, n1, n2), rs.site(q, 0, 0), x0)), 0.0, 1e-12);
      }
}

TEST(FreePosition, Antiperiodic) {
  const auto spec = LatticeSpec::honeycomb(6);
  const double beta = 8.0;
  for (double x0 : {-7.5, -0.3, 0.1, 3.3, 7.9})
    for (auto [n1, n2] : {std::pair{0, 0}, {1, 2}, {5, 3}}) {
      const Mat2c a = propagator_position({x0, n1, n2}, beta, spec);
      const Mat2c b = propagator_position({x0 + beta, n1, n2}, beta, spec);
      EXPECT_LT((a + b).norm(), 1e-13);
    }
}

TEST(FreePosition, EqualTimeHalfFilling) {
  const auto spec = LatticeSpec::honeycomb(6);
  const Mat2c S = propagator_position({0.0, 0, 0, TimeSide::left}, 8.0, spec);
  EXPECT_EQ(S(0, 0).real(), -0.5);
  EXPECT_EQ(S(1, 1).real(), -0.5);
  EXPECT_NEAR(S(0, 0).imag(), 0.0, 1e-15);
}

TEST(FreePosition, JumpAcrossBetaMultiples) {
  const auto spec = LatticeSpec::honeycomb(6);
  const double beta = 8.0;
  for (int n = -1; n <= 2; ++n) {
    const double x0 = n * beta;
    const Mat2c R = propagator_position({x0, 0, 0, TimeSide::right}, beta, spec);
    const Mat2c Lf = propagator_position({x0, 0, 0, TimeSide::left}, beta, spec);
    const double s = (n % 2 == 0) ? 1.0 : -1.0;
    EXPECT_LT((R - Lf - s * Mat2c::Identity()).norm(), 1e-13);
    const Mat2c A = propagator_position({x0, 0, 0}, beta, spec);
    EXPECT_LT((A - 0.5 * (R + Lf)).norm(), 1e-15);
  }
}

TEST(Matsubara, TailSubtractedConvergence) {
  const auto spec = LatticeSpec::honeycomb(6);
  const double beta = 8.0;
  const SpaceTimePoint x{beta / 4, 0, 0};
  const Mat2c exact = propagator_position(x, beta, spec);
  double prev = 1e300;
  for (int M : {256, 512, 1024, 2048, 4096}) {
    const double err = (matsubara_truncated(x, beta, spec, M, TailTreatment::subtract_leading) - exact).norm();
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-6);
}

TEST(Matsubara, PlainSumConvergesSlowly) {
  const auto spec = LatticeSpec::honeycomb(6);
  const double beta = 8.0;
  const SpaceTimePoint x{beta / 4, 0, 0};
  const Mat2c exact = propagator_position(x, beta, spec);
  const double e1 = (matsubara_truncated(x, beta, spec, 512) - exact).norm();
  const double e2 = (matsubara_truncated(x, beta, spec, 1024) - exact).norm();
  // First-order tail: the error halves when M doubles.
  EXPECT_NEAR(e1 / e2, 2.0, 0.05);
}

TEST(Matsubara, BoundaryGivesAverage) {
  const auto spec = LatticeSpec::honeycomb(6);
  const double beta = 4.0;
  for (auto [n1, n2] : {std::pair{1, 0}, {2, 3}}) {
    const SpaceTimePoint x{0.0, n1, n2};
    const Mat2c avg = propagator_position(x, beta, spec);
    EXPECT_LT((matsubara_truncated(x, beta, spec, 2048) - avg).norm(), 1e-4);
    EXPECT_LT((matsubara_truncated(x, beta, spec, 2048, TailTreatment::subtract_leading) - avg).norm(), 1e-7);
  }
}

TEST(Wick, TwoPointReducesToPropagator) {
  const auto spec = LatticeSpec::honeycomb(3);
  const double beta = 4.0;
  const Insertion a{1.2, 1, 2, 0, -1, 1}, b{0.4, 0, 0, 0, +1, 0};
  const Insertion ins[] = {a, b};
  const Mat2c S = propagator_position({0.8, 1, 2}, beta, spec);
  EXPECT_LT(std::abs(wick_2n(ins, beta, spec) - S(1, 0)), 1e-14);
}

TEST(Wick, UnbalancedIsZero) {
  const auto spec = LatticeSpec::honeycomb(3);
  const Insertion a{1.2, 1, 2, 0, -1, 1}, b{0.4, 0, 0, 0, -1, 0};
  const Insertion ins[] = {a, b};
  EXPECT_EQ(wick_2n(ins, 4.0, spec), cplx(0.0));
}

TEST(Wick, FourPointMatchesPairings) {
  const int L = 3;
  const double beta = 4.0;
  const auto spec = LatticeSpec::honeycomb(L);
  const oracle::RealSpaceFree rs(L, beta);
  const Insertion a{3.1, 1, 2, 0, -1, 1}, b{0.4, 0, 1, 0, -1, 0};
  const Insertion c{2.2, 2, 2, 0, +1, 0}, d{1.5, 0, 0, 0, +1, 1};
  auto G = [&](const Insertion& x, const Insertion& y) {
    return rs.G(rs.site(x.sublattice, x.n1, x.n2), rs.site(y.sublattice, y.n1, y.n2), x.x0 - y.x0);
  };
  const double expect = G(a, d) * G(b, c) - G(a, c) * G(b, d);
  const Insertion ins[] = {a, b, c, d};
  EXPECT_NEAR(std::abs(wick_2n(ins, beta, spec) - expect), 0.0, 1e-12);
  // Reordering the list multiplies by the permutation sign.
  const Insertion swapped[] = {b, a, c, d};
  EXPECT_NEAR(std::abs(wick_2n(swapped, beta, spec) + expect), 0.0, 1e-12);
  // Opposite spins decouple.
  const Insertion a2{3.1, 1, 2, 1, -1, 1}, d2{1.5, 0, 0, 1, +1, 1};
  const Insertion mixed[] = {a2, b, c, d2};
  EXPECT_NEAR(std::abs(wick_2n(mixed, beta, spec) - G(a2, d2) * G(b, c)), 0.0, 1e-12);
}
