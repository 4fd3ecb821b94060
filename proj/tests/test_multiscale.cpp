#include "honeycomb/multiscale.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace honeycomb;

namespace {

const CutoffSpec kCut{};

double max_abs(const Mat2c& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<SpaceTimePoint> sample_points(double beta, int L) {
  std::vector<SpaceTimePoint> xs;
  for (double f : {0.05, 0.3, 0.5, 0.77}) {
    xs.push_back({f * beta, 0, 0});
    xs.push_back({f * beta, 1, -2});
    xs.push_back({-f * beta, L / 2, 1});
    xs.push_back({f * beta + 0.1, 3, L - 1});
  }
  return xs;
}

}  // namespace

TEST(Multiscale, InitialFormIsTheFreeForm) {
  const auto flow = FlowState::initial();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (int i = 0; i < 200; ++i) {
    const MomentumPoint k{u(rng), Vec2d(u(rng), u(rng))};
    for (int omega : {1, -1}) EXPECT_LT(max_abs(dressed_form(k, omega, flow) - free_shifted_form(k, omega)), 1e-14);
  }
  const Mat2c at_zero = dressed_form({0.3, Vec2d::Zero()}, 1, flow);
  EXPECT_LT(std::abs(at_zero(0, 0) - cplx(0, -0.3)), 1e-15);
  EXPECT_LT(std::abs(at_zero(0, 1)), 1e-14);
}

TEST(Multiscale, RemainderIsQuadratic) {
  for (int omega : {1, -1}) {
    for (double angle : {0.0, 0.4, 1.3, 2.9}) {
      const Vec2d dir(std::cos(angle), std::sin(angle));
      std::vector<double> ratio;
      for (double r : {1e-1, 1e-2, 1e-3, 1e-4}) ratio.push_back(std::abs(free_remainder_t0({0.0, r * dir}, omega)) / (r * r));
      for (double q : ratio) EXPECT_LT(q, 2.0);
      // The ratio converges to the curvature constant of the dispersion.
      EXPECT_NEAR(ratio[2], ratio[3], 1e-3 * std::max(1.0, ratio[3]));
    }
  }
}

TEST(Multiscale, FlowStepAddsCorrections) {
  auto flow = FlowState::initial();
  const auto same = flow_step(flow, Corrections{});
  EXPECT_EQ(same.h, -1);
  EXPECT_EQ(same.zeta, 1.0);
  EXPECT_EQ(same.c, 1.5);
  const MomentumPoint k{0.2, Vec2d(0.1, -0.05)};
  EXPECT_EQ(same.t(k, 1), flow.t(k, 1));
  EXPECT_EQ(same.s(k, 1), cplx(0.0));

  Corrections c;
  c.z = 0.01;
  c.delta = -0.02;
  c.sigma_fn = [](const MomentumPoint& p, int) { return cplx(0.0, p.k0 * p.k0); };
  c.tau_fn = [](const MomentumPoint& p, int w) { return cplx(w * p.k(0) * p.k(1), 0.0); };
  c.e = 0.5;
  c.ebar = 0.25;
  const auto next = flow_step(flow, c);
  EXPECT_DOUBLE_EQ(next.zeta, 1.01);
  EXPECT_DOUBLE_EQ(next.c, 1.48);
  EXPECT_DOUBLE_EQ(next.F, 0.75);
  EXPECT_EQ(next.s(k, 1), c.sigma(k, 1));
  EXPECT_EQ(next.t(k, -1), flow.t(k, -1) + c.tau(k, -1));
}

TEST(Multiscale, BarredFormInterpolatesBetweenScales) {
  auto flow = FlowState::initial();
  Corrections c;
  c.z = 0.03;
  c.delta = 0.01;
  c.sigma_fn = [](const MomentumPoint& p, int) { return cplx(0.0, -0.1 * p.k0); };
  const auto next = flow_step(flow, c);
  // chi_0 = 1 deep inside, 0 outside its support.
  const MomentumPoint inside{0.05, Vec2d(0.1, 0.0)}, outside{0.6, Vec2d(0.5, 0.3)};
  for (int omega : {1, -1}) {
    EXPECT_LT(max_abs(barred_form(inside, omega, flow, c, kCut) - dressed_form(inside, omega, next)), 1e-15);
    EXPECT_LT(max_abs(barred_form(outside, omega, flow, c, kCut) - dressed_form(outside, omega, flow)), 1e-15);
  }
}

TEST(Multiscale, DressedFormKeepsConjugationStructure) {
  auto flow = FlowState::initial();
  Corrections c;
  c.z = 0.02;
  c.delta = -0.01;
  c.sigma_fn = [](const MomentumPoint& p, int) { return cplx(0.0, -0.05 * p.k0 * p.k0 * p.k0); };
  c.tau_fn = [](const MomentumPoint& p, int) { return cplx(0.1 * p.k(0) * p.k(0), 0.02 * p.k(1)); };
  for (int step = 0; step < 4; ++step) flow = flow_step(flow, c);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int i = 0; i < 50; ++i) {
    const MomentumPoint k{u(rng), Vec2d(u(rng), u(rng))};
    const MomentumPoint km{-k.k0, k.k};
    for (int omega : {1, -1}) {
      const Mat2c A = dressed_form(k, omega, flow), B = dressed_form(km, omega, flow);
      // Diagonal: purely imaginary and odd in k0 here; off-diagonal: conjugate pair.
      EXPECT_LT(std::abs(A(0, 0).real()), 1e-15);
      EXPECT_LT(std::abs(A(0, 0) + B(0, 0)), 1e-15);
      EXPECT_LT(std::abs(A(1, 0) - std::conj(A(0, 1))), 1e-15);
      EXPECT_LT(std::abs(A(0, 1) - B(0, 1)), 1e-15);
    }
  }
}

TEST(Multiscale, SlicesBelowTheFloorAreEmpty) {
  const auto spec = LatticeSpec::honeycomb(12);
  const double beta = 8.0;
  const int floor = h_beta(beta, 1.0, kCut);
  EXPECT_EQ(floor, 0);
  SingleScalePropagator below(-1, 1, beta, spec, kCut, free_shifted_form);
  EXPECT_TRUE(below.empty());
  SingleScalePropagator at(0, 1, beta, spec, kCut, free_shifted_form);
  EXPECT_FALSE(at.empty());
  EXPECT_EQ(at.floor(), 0);
}

TEST(Multiscale, QuasiParticleSupportsAreDisjoint) {
  for (int L : {12, 13, 14}) {
    const auto spec = LatticeSpec::honeycomb(L);
    const double beta = 24.0;
    for (int h = 0; h >= -2; --h) {
      std::vector<GridIndex> seen[2];
      for (int omega : {1, -1}) {
        SingleScalePropagator g(h, omega, beta, spec, kCut, free_shifted_form);
        MomentumGrid grid(spec, beta, 1, omega);
        for (const auto& p : g.support()) seen[omega > 0].push_back(grid.unshifted(p.index));
      }
      for (const auto& a : seen[0])
        for (const auto& b : seen[1]) EXPECT_FALSE(a == b) << "L=" << L << " h=" << h;
    }
  }
}

TEST(Multiscale, TelescopingReproducesInfraredPropagator) {
  const auto spec = LatticeSpec::honeycomb(12);
  const double beta = 8.0;
  for (const auto& x : sample_points(beta, 12)) {
    const Mat2c a = telescoped_infrared(x, beta, spec, kCut, -8);
    const Mat2c b = infrared_propagator(x, beta, spec, kCut);
    EXPECT_LT(max_abs(a - b), 1e-13);
  }
}

TEST(Multiscale, TelescopingPlusUltravioletIsTheFreePropagator) {
  const auto spec = LatticeSpec::honeycomb(12);
  const double beta = 8.0;
  auto xs = sample_points(beta, 12);
  xs.resize(6);
  for (const auto& x : xs) {
    const Mat2c total = ultraviolet_propagator(x, beta, spec, 20000, kCut) + telescoped_infrared(x, beta, spec, kCut, -8);
    EXPECT_LT(max_abs(total - propagator_position(x, beta, spec)), 1e-8);
  }
}

TEST(Multiscale, SmallerFloorOnLongerTimes) {
  // At beta = 64 several infrared slices are populated; the telescoped sum still matches.
  const auto spec = LatticeSpec::honeycomb(12);
  const double beta = 64.0;
  EXPECT_LT(h_beta(beta, 1.0, kCut), -2);
  for (const auto& x : sample_points(beta, 12)) {
    EXPECT_LT(max_abs(telescoped_infrared(x, beta, spec, kCut, -8) - infrared_propagator(x, beta, spec, kCut)), 1e-13);
  }
}

namespace {

// Per-scale grid: beta and L grow like gamma^{-h} so the scale-h support has a fixed shape.
struct ScaledGrid {
  double beta;
  LatticeSpec spec;
};
ScaledGrid scaled_grid(int h, double gamma) {
  const double s = std::pow(gamma, -h);
  return {16.0 * s, LatticeSpec::honeycomb(static_cast<int>(std::lround(12 * s)))};
}

std::vector<SpaceTimePoint> scaled_samples(int h, double gamma) {
  const double s = std::pow(gamma, -h);
  std::vector<SpaceTimePoint> xs;
  for (double t : {0.0, 0.5, 1.5, 3.0, 6.0})
    for (auto [n1, n2] : std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {1, 1}, {2, -1}, {3, 2}})
      xs.push_back({t * s, static_cast<int>(std::lround(n1 * s)), static_cast<int>(std::lround(n2 * s))});
  return xs;
}

}  // namespace

TEST(Multiscale, DecayEnvelopeIsFlatAcrossScales) {
  std::vector<double> env;
  for (int h = 0; h >= -6; --h) {
    const auto grid = scaled_grid(h, kCut.gamma);
    SingleScalePropagator g(h, 1, grid.beta, grid.spec, kCut, free_shifted_form, -100);
    env.push_back(decay_envelope(g, scaled_samples(h, kCut.gamma), kCut.gamma));
  }
  const double lo = *std::min_element(env.begin(), env.end()), hi = *std::max_element(env.begin(), env.end());
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi / lo, 3.0);
}

TEST(Multiscale, GramNormsScale) {
  std::vector<double> a, b;
  for (int h = 0; h >= -6; --h) {
    const auto grid = scaled_grid(h, kCut.gamma);
    SingleScalePropagator g(h, -1, grid.beta, grid.spec, kCut, free_shifted_form, -100);
    a.push_back(g.gram_norm_A_sq() * std::pow(kCut.gamma, -3 * h));
    b.push_back(g.gram_norm_B_sq().maxCoeff() * std::pow(kCut.gamma, -h));
  }
  for (auto* v : {&a, &b}) {
    double mean = 0;
    for (double x : *v) mean += x / v->size();
    for (double x : *v) EXPECT_NEAR(x / mean, 1.0, 0.3);
  }
}

TEST(Multiscale, GramFactorsReconstructThePropagator) {
  const auto spec = LatticeSpec::honeycomb(12);
  const double beta = 16.0;
  for (int h : {0, -1}) {
    SingleScalePropagator g(h, 1, beta, spec, kCut, free_shifted_form, -10);
    ASSERT_FALSE(g.empty());
    const int nt = g.exact_time_nodes();
    const std::vector<std::pair<SpaceTimePoint, SpaceTimePoint>> pairs{
        {{0.3, 0, 0}, {5.1, 2, 1}}, {{11.0, 4, 7}, {2.5, 1, 9}}, {{7.7, 3, 3}, {7.7, 3, 3}}};
    for (const auto& [x, y] : pairs) {
      Mat2c sum = Mat2c::Zero();
      for (int j = 0; j < nt; ++j) {
        const double z0 = beta * j / nt;
        for (int m1 = 0; m1 < 12; ++m1)
          for (int m2 = 0; m2 < 12; ++m2) {
            const SpaceTimePoint dx{x.x0 - z0, x.n1 - m1, x.n2 - m2}, dy{y.x0 - z0, y.n1 - m1, y.n2 - m2};
            sum += std::conj(g.gram_A(dx)) * g.gram_B(dy);
          }
      }
      sum *= beta / nt;
      const SpaceTimePoint d{x.x0 - y.x0, x.n1 - y.n1, x.n2 - y.n2};
      EXPECT_LT(max_abs(sum - g(d)), 1e-10);
    }
  }
}

TEST(Multiscale, GramHadamardHolds) {
  const auto spec = LatticeSpec::honeycomb(24);
  for (int h : {0, -1, -2}) {
    SingleScalePropagator g(h, 1, 48.0, spec, kCut, free_shifted_form, -10);
    const auto rep = gram_hadamard_check(g, 120, 6, 11 + h);
    EXPECT_EQ(rep.violations, 0);
    EXPECT_LE(rep.max_ratio, 1.0);
  }
}

TEST(Multiscale, UltravioletSlicesVanishAtTheOriginOnTheDiagonal) {
  const auto spec = LatticeSpec::honeycomb(6);
  const double beta = 4.0;
  const int M = 64;
  const int hM = h_M(beta, M, kCut);
  for (int h = 1; h <= hM; ++h) {
    UvSlice g(h, beta, spec, M, kCut);
    const Mat2c at0 = g({0.0, 0, 0});
    EXPECT_LT(std::abs(at0(0, 0)), 1e-14);
    EXPECT_LT(std::abs(at0(1, 1)), 1e-14);
  }
}

TEST(Multiscale, UltravioletSlicesSumToTheUltravioletPropagator) {
  const auto spec = LatticeSpec::honeycomb(6);
  const double beta = 4.0;
  const int M = 64;
  const int hM = h_M(beta, M, kCut);
  for (const auto& x : sample_points(beta, 6)) {
    Mat2c sum = Mat2c::Zero();
    for (int h = 1; h <= hM; ++h) sum += UvSlice(h, beta, spec, M, kCut)(x);
    EXPECT_LT(max_abs(sum - ultraviolet_truncated(x, beta, spec, M, kCut)), 1e-12);
  }
  EXPECT_TRUE(UvSlice(hM + 1, beta, spec, M, kCut).empty());
}

TEST(Multiscale, UltravioletGramFactors) {
  const auto spec = LatticeSpec::honeycomb(3);
  const double beta = 2.0;
  const int M = 48;
  const int hM = h_M(beta, M, kCut);
  std::vector<double> a, b;
  for (int h = 1; h <= hM; ++h) {
    UvSlice g(h, beta, spec, M, kCut);
    if (g.empty()) continue;
    a.push_back(g.gram_norm_A_sq() * std::pow(kCut.gamma, 3 * h));
    b.push_back(g.gram_norm_B_sq().maxCoeff() * std::pow(kCut.gamma, -3 * h));
    if (h > 2) continue;
    const int nt = g.exact_time_nodes();
    const SpaceTimePoint x{0.4, 1, 2}, y{1.3, 0, 1};
    Mat2c sum = Mat2c::Zero();
    for (int j = 0; j < nt; ++j) {
      const double z0 = beta * j / nt;
      for (int m1 = 0; m1 < 3; ++m1)
        for (int m2 = 0; m2 < 3; ++m2)
          sum += std::conj(g.gram_A({x.x0 - z0, x.n1 - m1, x.n2 - m2})) * g.gram_B({y.x0 - z0, y.n1 - m1, y.n2 - m2});
    }
    sum *= beta / nt;
    EXPECT_LT(max_abs(sum - g({x.x0 - y.x0, x.n1 - y.n1, x.n2 - y.n2})), 1e-10);
  }
  // ||A_h||^2 <= C gamma^{-3h} and ||B_h||^2 <= C gamma^{3h}: the rescaled norms stay bounded.
  ASSERT_GE(a.size(), 4u);
  // Bounded above: the largest rescaled norm stays within a fixed factor of the typical one.
  for (auto* v : {&a, &b}) {
    auto sorted = *v;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_LT(sorted.back() / sorted[sorted.size() / 2], 10.0);
  }
}

TEST(Multiscale, UltravioletDecayEnvelope) {
  // (B.3)-type bound with K = 3: |g^(h)(x)| (1 + (gamma^h |x0| + |x|)^3) stays bounded over h.
  const auto spec = LatticeSpec::honeycomb(6);
  const double beta = 4.0;
  const int M = 128;
  const int hM = h_M(beta, M, kCut);
  std::vector<double> env;
  for (int h = 2; h < hM; ++h) {
    UvSlice g(h, beta, spec, M, kCut);
    const double gh = std::pow(kCut.gamma, h);
    double sup = 0;
    for (double t : {0.0, 0.5, 1.0, 2.0, 4.0})
      for (auto [n1, n2] : std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {1, 1}, {2, -1}}) {
        const SpaceTimePoint x{t / gh, n1, n2};
        const double d = gh * torus_time_distance(x.x0, beta) + torus_space_distance(n1, n2, spec);
        sup = std::max(sup, max_abs(g(x)) * (1 + d * d * d));
      }
    env.push_back(sup);
  }
  ASSERT_GE(env.size(), 3u);
  for (double e : env) EXPECT_TRUE(std::isfinite(e));
  EXPECT_LT(*std::max_element(env.begin(), env.end()) / *std::min_element(env.begin(), env.end()), 10.0);
}
