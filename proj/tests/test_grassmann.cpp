#include "honeycomb/grassmann.hpp"
#include "grassmann_oracle.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <random>

using namespace honeycomb;
using namespace honeycomb::grassmann;
using namespace oracle;

TEST(Grassmann, AlgebraBasics) {
  const int N = 4;
  const Mono a{2, 0}, b{0, 2};
  const auto fa = MultilinearForm<Rational>::monomial(N, a), fb = MultilinearForm<Rational>::monomial(N, b);
  EXPECT_TRUE((fa + fb).is_zero());  // psi2 psi0 = -psi0 psi2
  const Mono rep{1, 1};
  EXPECT_TRUE(MultilinearForm<Rational>::monomial(N, rep).is_zero());
  const auto x = MultilinearForm<Rational>::monomial(N, Mono{0}), y = MultilinearForm<Rational>::monomial(N, Mono{3});
  EXPECT_TRUE((x * y + y * x).is_zero());
  EXPECT_TRUE((x * x).is_zero());
  EXPECT_THROW(MultilinearForm<Rational>(17), CapacityError);
  EXPECT_THROW((GaussianSpec<Rational>(8, 8, 1)), CapacityError);
}

TEST(Grassmann, ExactDeterminant) {
  std::vector<Rational> m{Rational(1, 2), 3, Rational(-2, 3), 1};
  EXPECT_EQ(determinant(m, 2), Rational(1, 2) + 2);
  std::vector<Rational> sing{1, 2, 2, 4};
  EXPECT_EQ(determinant(sing, 2), 0);
}

TEST(GaussianMoment, TwoPointAndUnbalanced) {
  std::mt19937_64 rng(1);
  const auto spec = random_rational_spec(3, rng);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Mono mp{spec.minus(i), spec.plus(j)}, pm{spec.plus(j), spec.minus(i)};
      EXPECT_EQ(gaussian_moment<Rational>(mp, spec), spec(i, j));
      EXPECT_EQ(gaussian_moment<Rational>(pm, spec), -spec(i, j));
      EXPECT_EQ(berezin_moment(mp, spec), spec(i, j));
    }
  const Mono unbalanced{spec.minus(0), spec.minus(1)};
  EXPECT_EQ(gaussian_moment<Rational>(unbalanced, spec), 0);
}

TEST(GaussianMoment, SixFieldsMatchBerezinIntegration) {
  std::mt19937_64 rng(2);
  const auto spec = random_rational_spec(4, rng);  // 8 generators
  std::vector<int> gens(8);
  std::iota(gens.begin(), gens.end(), 0);
  for (int trial = 0; trial < 25; ++trial) {
    std::shuffle(gens.begin(), gens.end(), rng);
    const Mono six(gens.begin(), gens.begin() + 6);
    EXPECT_EQ(gaussian_moment<Rational>(six, spec), berezin_moment(six, spec));
    const Mono eight(gens.begin(), gens.end());
    EXPECT_EQ(gaussian_moment<Rational>(eight, spec), berezin_moment(eight, spec));
  }
}

TEST(TruncatedExpectation, FirstCumulantIsExpectation) {
  std::mt19937_64 rng(3);
  const auto spec = random_rational_spec(4, rng);
  const auto V = to_form(hubbard_terms(spec, 2), spec.total());
  EXPECT_EQ(truncated_expectation(V, spec, 1), expectation(V, spec));
}

TEST(TruncatedExpectation, QuadraticMatchesTraceFormula) {
  std::mt19937_64 rng(4);
  const int n = 4;
  const auto spec = random_rational_spec(n, rng);
  std::uniform_int_distribution<int> num(-3, 3);
  std::vector<Rational> A(n * n);
  MultilinearForm<Rational> V(spec.total());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      A[i * n + j] = Rational(num(rng), 2);
      V = V + MultilinearForm<Rational>::monomial(spec.total(), Mono{spec.plus(i), spec.minus(j)}, A[i * n + j]);
    }
  // log E e^{lambda psi+ A psi-} = tr log(1 - lambda A g): E^T(V;1) = -tr(Ag), E^T(V;2) = -tr(AgAg).
  std::vector<Rational> Ag(n * n, 0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) Ag[i * n + k] += A[i * n + j] * spec(j, k);
  Rational tr1 = 0, tr2 = 0;
  for (int i = 0; i < n; ++i) {
    tr1 += Ag[i * n + i];
    for (int k = 0; k < n; ++k) tr2 += Ag[i * n + k] * Ag[k * n + i];
  }
  EXPECT_EQ(truncated_expectation(V, spec, 1).scalar_part(), -tr1);
  EXPECT_EQ(truncated_expectation(V, spec, 2).scalar_part(), -tr2);
  // and the connected-pairing enumeration agrees
  Rational conn = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          conn += A[i * n + j] * A[k * n + l] *
                  connected_pairing_sum({Mono{spec.plus(i), spec.minus(j)}, Mono{spec.plus(k), spec.minus(l)}}, spec);
  EXPECT_EQ(conn, -tr2);
}

TEST(TruncatedExpectation, QuarticMatchesConnectedPairings) {
  std::mt19937_64 rng(5);
  const auto spec = random_rational_spec(6, rng);  // 12 generators, 3 sites
  const auto terms = hubbard_terms(spec, 3);
  const auto V = to_form(terms, spec.total());
  for (int n = 1; n <= 3; ++n) {
    Rational oracle = 0;
    std::vector<int> pick(n, 0);
    while (true) {
      std::vector<Mono> f;
      Rational c = 1;
      for (int p : pick) {
        f.push_back(terms[p].fields);
        c *= terms[p].c;
      }
      oracle += c * connected_pairing_sum(f, spec);
      int i = 0;
      while (i < n && ++pick[i] == static_cast<int>(terms.size())) pick[i++] = 0;
      if (i == n) break;
    }
    EXPECT_EQ(truncated_expectation(V, spec, n).scalar_part(), oracle) << "n=" << n;
  }
}

TEST(TruncatedExpectation, CumulantRecursion) {
  std::mt19937_64 rng(6);
  const auto spec = random_rational_spec(4, rng, 2);  // two external generators
  const int N = spec.total();
  auto V = to_form(hubbard_terms(spec, 2), N);
  // couple the external pair to the fields
  V = V + MultilinearForm<Rational>::monomial(N, Mono{spec.external(0), spec.minus(1)}, Rational(2, 3));
  V = V + MultilinearForm<Rational>::monomial(N, Mono{spec.plus(2), spec.external(1)}, Rational(-1, 5));
  const auto mom = moments(V, spec, 4);
  std::vector<MultilinearForm<Rational>> kappa(5, MultilinearForm<Rational>(N));
  for (int n = 1; n <= 4; ++n) {
    kappa[n] = mom[n];
    for (int m = 1; m < n; ++m) {
      Rational binom = 1;
      for (int t = 0; t < m - 1; ++t) binom = binom * (n - 1 - t) / (t + 1);
      kappa[n] = kappa[n] - binom * (kappa[m] * mom[n - m]);
    }
    EXPECT_EQ(truncated_expectation(V, spec, n), kappa[n]) << "n=" << n;
  }
}

TEST(TruncatedExpectation, RationalComplexCoefficients) {
  GaussianSpec<RationalComplex> spec(2, 2);
  spec(0, 0) = RationalComplex(Rational(1), Rational(1, 2));
  spec(0, 1) = RationalComplex(Rational(0), Rational(-1));
  spec(1, 0) = RationalComplex(Rational(1, 3), Rational(0));
  spec(1, 1) = RationalComplex(Rational(2), Rational(0));
  const Mono f{spec.minus(0), spec.plus(0), spec.minus(1), spec.plus(1)};
  const auto V = MultilinearForm<RationalComplex>::monomial(spec.total(), f);
  const RationalComplex det = spec(0, 0) * spec(1, 1) - spec(0, 1) * spec(1, 0);
  EXPECT_TRUE(truncated_expectation(V, spec, 1).scalar_part() == det);
  // V^2 = 0, so the second cumulant is -E(V)^2
  EXPECT_TRUE(truncated_expectation(V, spec, 2).scalar_part() == -(det * det));
}

namespace {
GaussianSpec<cplx> random_complex_spec(int n, std::mt19937_64& rng) {
  GaussianSpec<cplx> spec(n, n);
  std::normal_distribution<double> d;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) spec(i, j) = {d(rng), d(rng)};
  return spec;
}
}  // namespace

TEST(Bbf, SingleCluster) {
  std::mt19937_64 rng(7);
  const auto spec = random_complex_spec(3, rng);
  EXPECT_EQ(bbf_evaluate({{}}, spec).value, cplx(1.0));
  const std::vector<int> c{spec.minus(0), spec.plus(1), spec.minus(2), spec.plus(0)};
  EXPECT_LT(std::abs(bbf_evaluate({c}, spec).value - gaussian_moment<cplx>(c, spec)), 1e-13);
}

TEST(Bbf, TwoAndThreeClustersMatchBruteForce) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto spec = random_complex_spec(4, rng);
    std::vector<int> gens(8);
    std::iota(gens.begin(), gens.end(), 0);
    std::shuffle(gens.begin(), gens.end(), rng);
    // two 2-field clusters
    {
      const std::vector<std::vector<int>> cl{{gens[0], gens[1]}, {gens[2], gens[3]}};
      const cplx ref = cluster_truncated_expectation(cl, spec);
      EXPECT_LT(std::abs(bbf_evaluate(cl, spec).value - ref), 1e-12);
    }
    // three clusters of sizes 2, 2, 4
    {
      const std::vector<std::vector<int>> cl{{gens[0], gens[1]}, {gens[2], gens[3]}, {gens[4], gens[5], gens[6], gens[7]}};
      const cplx ref = cluster_truncated_expectation(cl, spec);
      EXPECT_LT(std::abs(bbf_evaluate(cl, spec).value - ref), 1e-12);
    }
    // two 4-field clusters
    {
      const std::vector<std::vector<int>> cl{{gens[0], gens[1], gens[2], gens[3]}, {gens[4], gens[5], gens[6], gens[7]}};
      const cplx ref = cluster_truncated_expectation(cl, spec);
      EXPECT_LT(std::abs(bbf_evaluate(cl, spec).value - ref), 1e-12);
    }
  }
}

TEST(Bbf, CapacityAndInterpolation) {
  std::mt19937_64 rng(9);
  const auto spec = random_complex_spec(4, rng);
  EXPECT_THROW(bbf_evaluate({{0}, {1}, {4}, {5}}, spec), CapacityError);
  // t_{ii'} is a Gram matrix of unit vectors
  const auto t = bbf_interpolation(3, {{0, 1}, {1, 2}}, {0.3, 0.7});
  EXPECT_DOUBLE_EQ(t(0, 2), 0.3);
  EXPECT_DOUBLE_EQ(t(1, 2), 0.7);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-14);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(t(i, i), 1.0);
}

TEST(GramHadamard, OrthonormalAndRandom) {
  const Eigen::MatrixXcd Q = Eigen::MatrixXcd::Identity(4, 4);
  const auto r = gram_hadamard_check(Q, Q);
  EXPECT_NEAR(std::abs(r.det), 1.0, 1e-15);
  EXPECT_NEAR(r.bound, 1.0, 1e-15);
  EXPECT_TRUE(r.ok);
  std::mt19937_64 rng(10);
  std::normal_distribution<double> d;
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + t % 6, dim = n + t % 3;
    Eigen::MatrixXcd F(dim, n), G(dim, n);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < n; ++j) {
        F(i, j) = {d(rng), d(rng)};
        G(i, j) = {d(rng), d(rng)};
      }
    EXPECT_TRUE(gram_hadamard_check(F, G).ok);
  }
}
