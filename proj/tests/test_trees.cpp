#include "honeycomb/trees.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace honeycomb::trees;

namespace {

// Plane trees with n ordered leaves and all internal nodes of degree >= 2, by composition recursion.
std::uint64_t oracle_skeletons(int n, std::map<int, std::uint64_t>& memo) {
  if (n == 1) return 1;
  if (auto it = memo.find(n); it != memo.end()) return it->second;
  // f[m] = number of sequences of >= 1 subtrees covering m leaves
  std::vector<std::uint64_t> seq(n + 1, 0);
  seq[0] = 1;
  for (int m = 1; m <= n; ++m)
    for (int p = 1; p <= m; ++p)
      if (p < n) seq[m] += seq[m - p] * oracle_skeletons(p, memo);
  // subtract the single-part sequence (p = n is excluded already)
  memo[n] = seq[n];
  return seq[n];
}

}  // namespace

TEST(Skeletons, MatchCompositionCount) {
  std::map<int, std::uint64_t> memo;
  for (int n = 1; n <= 6; ++n) EXPECT_EQ(count_skeletons(n), oracle_skeletons(n, memo)) << n;
  // frozen oracle values
  const std::uint64_t frozen[] = {1, 1, 3, 11, 45, 197};
  for (int n = 1; n <= 6; ++n) EXPECT_EQ(count_skeletons(n), frozen[n - 1]);
}

TEST(Skeletons, BoundedByFourToTheN) {
  for (int n = 1; n <= 5; ++n) EXPECT_LE(count_skeletons(n), static_cast<std::uint64_t>(std::pow(4, n)));
}

TEST(Skeletons, CapacityAboveSix) {
  EXPECT_THROW(enumerate_skeletons(7), honeycomb::CapacityError);
  EXPECT_THROW(enumerate_trees({-3, 7, false, 1}), honeycomb::CapacityError);
}

TEST(Trees, SmallCountsByHand) {
  for (int h = -5; h <= -2; ++h) {
    const int top = 1;
    EXPECT_EQ(enumerate_trees({h, 1, false, top}).size(), static_cast<std::size_t>(top - h - 1));
    std::size_t two = 0;
    for (int b = h + 1; b <= top - 1; ++b) two += static_cast<std::size_t>((top - b) * (top - b));
    EXPECT_EQ(enumerate_trees({h, 2, false, top}).size(), two);
  }
}

TEST(Trees, StructuralInvariants) {
  for (int n = 1; n <= 4; ++n) {
    for (const auto& t : enumerate_trees({-4, n, false, 1})) {
      ASSERT_EQ(t.n(), n);
      EXPECT_EQ(t.vertices[0].scale, -3);
      EXPECT_FALSE(t.vertices[0].endpoint);
      for (int v = 0; v < static_cast<int>(t.vertices.size()); ++v) {
        const auto& tv = t.vertices[v];
        EXPECT_EQ(tv.scale, t.parent_scale(v) + 1);  // every line is materialized
        if (tv.endpoint) {
          EXPECT_TRUE(tv.children.empty());
          EXPECT_LE(tv.scale, 1);
        } else {
          EXPECT_FALSE(tv.children.empty());
          EXPECT_LE(tv.scale, 0);
        }
      }
    }
  }
}

TEST(Trees, UvFilterRemovesSingleEndpointBranches) {
  EXPECT_TRUE(enumerate_trees({-3, 1, true, 1}).empty());
  for (const auto& t : enumerate_trees({-3, 3, true, 1}))
    for (int v = 0; v < static_cast<int>(t.vertices.size()); ++v)
      if (!t.vertices[v].endpoint) EXPECT_GT(t.endpoints_following(v), 1);
  EXPECT_LT(enumerate_trees({-3, 3, true, 1}).size(), enumerate_trees({-3, 3, false, 1}).size());
}

TEST(Trees, SumIdentitiesOnRandomAssignments) {
  std::mt19937_64 rng(20261016);
  int checked = 0;
  for (int n = 1; n <= 5; ++n) {
    const auto ts = enumerate_trees({-3, n, false, 1});
    for (int trial = 0; trial < 120; ++trial) {
      const auto& t = ts[std::uniform_int_distribution<std::size_t>(0, ts.size() - 1)(rng)];
      const auto fa = random_field_assignment(t, rng);
      const auto r = verify_sum_identities(t, fa);
      EXPECT_TRUE(r.all()) << "n=" << n;
      const auto pc = power_counting_bound(t, fa, 0.5);
      EXPECT_EQ(pc.vertex_exponent + pc.prefactor_exponent, pc.reorganized);
      EXPECT_TRUE(pc.relevant_margins);
      EXPECT_TRUE(pc.endpoint_margin);
      ++checked;
    }
  }
  EXPECT_GE(checked, 500);
}

TEST(Trees, ConstraintErrorBelowFourFields) {
  std::mt19937_64 rng(5);
  for (const auto& t : enumerate_trees({-4, 2, false, 1})) {
    if (t.vertices.size() < 3 || t.vertices[1].endpoint) continue;
    auto fa = random_field_assignment(t, rng);
    fa.P[1].resize(2);
    EXPECT_THROW(power_counting_bound(t, fa, 0.5), std::domain_error);
    return;
  }
  FAIL() << "no tree with a non-endpoint above v0";
}

TEST(Trees, PerTreeThetaBound) {
  for (int n = 1; n <= 4; ++n)
    for (double theta : {0.25, 0.5, 0.75}) {
      std::mt19937_64 rng(n);
      for (const auto& t : enumerate_trees({-4, n, false, 1})) {
        const auto pc = power_counting_bound(t, random_field_assignment(t, rng), theta);
        EXPECT_TRUE(pc.theta_bound);
      }
    }
}

TEST(Trees, GeometricSumLimitClosedForms) {
  const double x = std::pow(2.0, -0.25);
  EXPECT_NEAR(geometric_tree_sum_limit(1, 2.0, 0.5), x / (1 - x), 1e-12);
  EXPECT_NEAR(geometric_tree_sum_limit(2, 2.0, 0.5), x / std::pow(1 - x, 3), 1e-9);
  // n = 3: one node with three leaves, or two nested binary nodes (two orders)
  const double e = 1 / (1 - x);
  EXPECT_NEAR(geometric_tree_sum_limit(3, 2.0, 0.5), x * std::pow(e, 4) + 2 * x * x * std::pow(e, 5), 1e-8);
}

TEST(Trees, GeometricSumApproachesLimit) {
  for (int n = 1; n <= 3; ++n) {
    const double limit = geometric_tree_sum_limit(n, 4.0, 0.5);
    double prev = 0;
    for (int h = -2; h >= (n < 3 ? -40 : -22); h -= 2) {
      const double s = geometric_tree_sum(enumerate_trees({h, n, false, 1}), 4.0, 0.5);
      EXPECT_GT(s, prev);
      EXPECT_LT(s, limit);
      prev = s;
    }
    EXPECT_GT(prev, (n < 3 ? 0.999 : 0.95) * limit) << n;
  }
}

TEST(Trees, ScalingExponent) {
  EXPECT_EQ(scaling_exponent(1), 1);
  EXPECT_EQ(scaling_exponent(2), -1);
}
