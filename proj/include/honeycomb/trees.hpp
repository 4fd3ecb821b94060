#pragma once
// Labelled trees of the effective-potential expansion and their power-counting bookkeeping.

#include "honeycomb/errors.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace honeycomb::trees {

inline constexpr int kMaxEndpoints = 6;
inline constexpr int kFieldsPerEndpoint = 4;

// Plane skeleton: branching points with >= 2 children and ordered leaves.
struct SkeletonNode {
  std::vector<int> children;  // empty for a leaf
};
struct Skeleton {
  std::vector<SkeletonNode> nodes;  // nodes[0] is the node right after the root
};

std::vector<Skeleton> enumerate_skeletons(int n);
std::uint64_t count_skeletons(int n);

struct TreeVertex {
  int parent = -1;  // -1: the root
  int scale = 0;
  bool endpoint = false;
  std::vector<int> children;
};

// vertices[0] is v0 (scale h+1); trivial vertices are materialized on every intermediate line.
struct LabeledTree {
  int h = 0;
  int top = 1;  // highest admissible endpoint scale
  std::vector<TreeVertex> vertices;
  std::vector<int> endpoints;  // in endpoint order

  int n() const { return static_cast<int>(endpoints.size()); }
  int parent_scale(int v) const { return vertices[v].parent < 0 ? h : vertices[vertices[v].parent].scale; }
  int branching(int v) const { return static_cast<int>(vertices[v].children.size()); }  // s_v
  int endpoints_following(int v) const;                                                 // n(v)
  int direct_endpoints(int v) const;                                                    // nbar(v)
  int highest_nonendpoint_scale() const;
};

struct EnumerationOptions {
  int h = -3;
  int n = 2;
  bool uv = false;  // keep only trees with n(v) > 1 at every non-endpoint
  int top = 1;      // endpoints on scales h+2..top, non-trivial vertices below them
};

// All labelled trees in the scale window; throws CapacityError for n > 6.
std::vector<LabeledTree> enumerate_trees(const EnumerationOptions& opt);

// Field labels: endpoint e carries labels 4e..4e+3; P[v] lists the external labels of v.
struct FieldAssignment {
  std::vector<std::vector<int>> P;
};

std::vector<int> internal_labels(const LabeledTree& t, int v);  // I_v
FieldAssignment random_field_assignment(const LabeledTree& t, std::mt19937_64& rng, int p_v0 = -1);

struct IdentityReport {
  bool cluster_sum = false;       // sum [sum_i |P_vi| - |P_v|] = |I_v0| - |P_v0|
  bool branching_sum = false;     // sum (s_v - 1) = n - 1
  bool scaled_cluster = false;    // third line
  bool scaled_branching = false;  // fourth line
  bool endpoint_scales = false;   // gamma^{hn} prod gamma^{(h_v-h_v')n(v)} = prod gamma^{h_v nbar(v)}
  bool label_scales = false;      // same with |I_v| and pbar(v)
  bool all() const {
    return cluster_sum && branching_sum && scaled_cluster && scaled_branching && endpoint_scales && label_scales;
  }
};
IdentityReport verify_sum_identities(const LabeledTree& t, const FieldAssignment& P);

struct PowerCountingSummary {
  long vertex_exponent = 0;     // sum (h_v - h_v')(3 - |P_v| + |I_v| - 3 n(v))
  long prefactor_exponent = 0;  // h (3 - |P_v0| + |I_v0| - 3n)
  long reorganized = 0;         // h(3-|P_v0|) - sum (h_v-h_v')(|P_v|-3) + sum h_v (pbar - 3 nbar)
  double final_exponent = 0;    // h (3 - |P_v0| + theta)
  bool relevant_margins = false;  // |P_v|-3 >= 1 and |P_v|-3 >= |P_v|/4 off v0
  bool endpoint_margin = false;   // pbar - 3 nbar >= 0 everywhere, total >= n
  double theta_bound_lhs = 0;     // h* - theta sum (h_v - h_v')
  double theta_bound_rhs = 0;     // theta h
  bool theta_bound = false;
};
// Throws std::domain_error when a non-endpoint vertex above v0 has |P_v| < 4.
PowerCountingSummary power_counting_bound(const LabeledTree& t, const FieldAssignment& P, double theta);

// 3 - 2l for a kernel with 2l external fields.
inline int scaling_exponent(int l) { return 3 - 2 * l; }

// sum over trees of prod_{v not e.p.} gamma^{-(1-theta)(h_v-h_v')/2}
double geometric_tree_sum(const std::vector<LabeledTree>& trees, double gamma, double theta);
// Same sum with the window opened to infinity (each skeleton edge summed as a geometric series).
double geometric_tree_sum_limit(int n, double gamma, double theta);

}  // namespace honeycomb::trees
