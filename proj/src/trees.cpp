#include "honeycomb/trees.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <stdexcept>

namespace honeycomb::trees {

namespace {

// Skeletons over `leaves` consecutive leaves, appended to `out` rooted at a fresh node.
void skeletons_rec(int leaves, std::vector<Skeleton>& out) {
  if (leaves == 1) {
    out.push_back(Skeleton{{SkeletonNode{}}});
    return;
  }
  // compositions of `leaves` into k >= 2 parts, each part a sub-skeleton
  std::vector<int> parts;
  std::function<void(int)> compose = [&](int remaining) {
    if (remaining == 0) {
      if (parts.size() < 2) return;
      std::vector<Skeleton> acc{Skeleton{{SkeletonNode{}}}};
      for (int p : parts) {
        std::vector<Skeleton> subs;
        skeletons_rec(p, subs);
        std::vector<Skeleton> next;
        for (const auto& a : acc)
          for (const auto& s : subs) {
            Skeleton c = a;
            const int offset = static_cast<int>(c.nodes.size());
            for (auto node : s.nodes) {
              for (int& ch : node.children) ch += offset;
              c.nodes.push_back(node);
            }
            c.nodes[0].children.push_back(offset);
            next.push_back(std::move(c));
          }
        acc = std::move(next);
      }
      out.insert(out.end(), acc.begin(), acc.end());
      return;
    }
    for (int p = 1; p <= remaining; ++p) {
      if (p == leaves) continue;
      parts.push_back(p);
      compose(remaining - p);
      parts.pop_back();
    }
  };
  compose(leaves);
}

}  // namespace

std::vector<Skeleton> enumerate_skeletons(int n) {
  if (n < 1) throw std::invalid_argument("enumerate_skeletons: n >= 1 required");
  if (n > kMaxEndpoints) throw CapacityError("enumerate_skeletons: n <= 6 supported");
  std::vector<Skeleton> out;
  skeletons_rec(n, out);
  return out;
}

std::uint64_t count_skeletons(int n) { return enumerate_skeletons(n).size(); }

int LabeledTree::endpoints_following(int v) const {
  if (vertices[v].endpoint) return 1;
  int c = 0;
  for (int ch : vertices[v].children) c += endpoints_following(ch);
  return c;
}

int LabeledTree::direct_endpoints(int v) const {
  int c = 0;
  for (int ch : vertices[v].children) c += vertices[ch].endpoint ? 1 : 0;
  return c;
}

int LabeledTree::highest_nonendpoint_scale() const {
  int m = h;
  for (const auto& v : vertices)
    if (!v.endpoint) m = std::max(m, v.scale);
  return m;
}

std::vector<LabeledTree> enumerate_trees(const EnumerationOptions& opt) {
  if (opt.n < 1) throw std::invalid_argument("enumerate_trees: n >= 1 required");
  if (opt.n > kMaxEndpoints) throw CapacityError("enumerate_trees: n <= 6 supported");
  if (opt.top < opt.h + 2) throw std::invalid_argument("enumerate_trees: window must contain h+2");
  const auto skeletons = enumerate_skeletons(opt.n);
  std::vector<LabeledTree> out;
  constexpr std::size_t kMaxTrees = 5'000'000;

  for (const auto& sk : skeletons) {
    const int m = static_cast<int>(sk.nodes.size());
    std::vector<int> parent(m, -1);
    for (int a = 0; a < m; ++a)
      for (int c : sk.nodes[a].children) parent[c] = a;
    std::vector<int> scale(m);
    // Nodes are stored in preorder, so parents come first.
    std::function<void(int)> assign = [&](int a) {
      if (a == m) {
        LabeledTree t;
        t.h = opt.h;
        t.top = opt.top;
        std::vector<int> vertex_of(m, -1);
        // v0 on line h+1, then trivial vertices up to the first skeleton node
        t.vertices.push_back({-1, opt.h + 1, false, {}});
        int last = 0;
        for (int s = opt.h + 2; s < scale[0]; ++s) {
          t.vertices.push_back({last, s, false, {}});
          t.vertices[last].children.push_back(static_cast<int>(t.vertices.size()) - 1);
          last = static_cast<int>(t.vertices.size()) - 1;
        }
        if (scale[0] == opt.h + 1) {
          vertex_of[0] = 0;
        } else {
          t.vertices.push_back({last, scale[0], sk.nodes[0].children.empty(), {}});
          t.vertices[last].children.push_back(static_cast<int>(t.vertices.size()) - 1);
          vertex_of[0] = static_cast<int>(t.vertices.size()) - 1;
        }
        std::function<void(int)> build = [&](int a2) {
          for (int c : sk.nodes[a2].children) {
            int prev = vertex_of[a2];
            for (int s = scale[a2] + 1; s < scale[c]; ++s) {
              t.vertices.push_back({prev, s, false, {}});
              t.vertices[prev].children.push_back(static_cast<int>(t.vertices.size()) - 1);
              prev = static_cast<int>(t.vertices.size()) - 1;
            }
            t.vertices.push_back({prev, scale[c], sk.nodes[c].children.empty(), {}});
            t.vertices[prev].children.push_back(static_cast<int>(t.vertices.size()) - 1);
            vertex_of[c] = static_cast<int>(t.vertices.size()) - 1;
            if (sk.nodes[c].children.empty()) t.endpoints.push_back(vertex_of[c]);
            build(c);
          }
        };
        if (sk.nodes[0].children.empty()) t.endpoints.push_back(vertex_of[0]);
        build(0);
        if (opt.uv) {
          for (int v = 0; v < static_cast<int>(t.vertices.size()); ++v)
            if (!t.vertices[v].endpoint && t.endpoints_following(v) == 1) return;
        }
        if (out.size() >= kMaxTrees) throw CapacityError("enumerate_trees: more than 5e6 trees");
        out.push_back(std::move(t));
        return;
      }
      const bool leaf = sk.nodes[a].children.empty();
      const int lo = parent[a] < 0 ? opt.h + (leaf ? 2 : 1) : scale[parent[a]] + 1;
      const int hi = leaf ? opt.top : opt.top - 1;
      for (int s = lo; s <= hi; ++s) {
        scale[a] = s;
        assign(a + 1);
      }
    };
    assign(0);
  }
  return out;
}

std::vector<int> internal_labels(const LabeledTree& t, int v) {
  std::vector<int> out;
  std::function<void(int)> rec = [&](int u) {
    if (t.vertices[u].endpoint) {
      const int e = static_cast<int>(std::find(t.endpoints.begin(), t.endpoints.end(), u) - t.endpoints.begin());
      for (int k = 0; k < kFieldsPerEndpoint; ++k) out.push_back(kFieldsPerEndpoint * e + k);
      return;
    }
    for (int c : t.vertices[u].children) rec(c);
  };
  rec(v);
  std::sort(out.begin(), out.end());
  return out;
}

FieldAssignment random_field_assignment(const LabeledTree& t, std::mt19937_64& rng, int p_v0) {
  const int nv = static_cast<int>(t.vertices.size());
  FieldAssignment fa;
  fa.P.assign(nv, {});
  // children have larger indices than parents, so a reverse sweep is bottom-up
  for (int v = nv - 1; v >= 0; --v) {
    const auto& tv = t.vertices[v];
    if (tv.endpoint) {
      fa.P[v] = internal_labels(t, v);
      continue;
    }
    std::vector<int> pool;
    for (int c : tv.children) pool.insert(pool.end(), fa.P[c].begin(), fa.P[c].end());
    const int s = static_cast<int>(tv.children.size());
    const int max_keep = static_cast<int>(pool.size()) - 2 * (s - 1);
    int keep;
    if (v == 0 && p_v0 >= 0) {
      keep = std::min(p_v0, max_keep);
    } else {
      const int lo = (v == 0) ? 0 : 4;
      std::vector<int> options;
      for (int k = lo; k <= max_keep; k += 2) options.push_back(k);
      keep = options[std::uniform_int_distribution<int>(0, static_cast<int>(options.size()) - 1)(rng)];
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    fa.P[v].assign(pool.begin(), pool.begin() + keep);
    std::sort(fa.P[v].begin(), fa.P[v].end());
  }
  return fa;
}

IdentityReport verify_sum_identities(const LabeledTree& t, const FieldAssignment& fa) {
  const int nv = static_cast<int>(t.vertices.size());
  const long h = t.h;
  long c1 = 0, c2 = 0, c3l = 0, c3r = 0, c4l = 0, c4r = 0, e_l = h * t.n(), e_r = 0;
  const long I0 = static_cast<long>(internal_labels(t, 0).size());
  long l_l = h * I0, l_r = 0;
  for (int v = 0; v < nv; ++v) {
    const auto& tv = t.vertices[v];
    if (tv.endpoint) continue;
    long child_p = 0;
    for (int c : tv.children) child_p += static_cast<long>(fa.P[c].size());
    const long Pv = static_cast<long>(fa.P[v].size());
    const long Iv = static_cast<long>(internal_labels(t, v).size());
    const long sv = static_cast<long>(tv.children.size());
    const long hv = tv.scale, dh = tv.scale - t.parent_scale(v);
    const long nvv = t.endpoints_following(v), nbar = t.direct_endpoints(v);
    c1 += child_p - Pv;
    c2 += sv - 1;
    c3l += (hv - h) * (child_p - Pv);
    c3r += dh * (Iv - Pv);
    c4l += (hv - h) * (sv - 1);
    c4r += dh * (nvv - 1);
    e_l += dh * nvv;
    e_r += hv * nbar;
    l_l += dh * Iv;
    l_r += hv * nbar * kFieldsPerEndpoint;
  }
  IdentityReport r;
  r.cluster_sum = c1 == I0 - static_cast<long>(fa.P[0].size());
  r.branching_sum = c2 == t.n() - 1;
  r.scaled_cluster = c3l == c3r;
  r.scaled_branching = c4l == c4r;
  r.endpoint_scales = e_l == e_r;
  r.label_scales = l_l == l_r;
  return r;
}

PowerCountingSummary power_counting_bound(const LabeledTree& t, const FieldAssignment& fa, double theta) {
  if (!(theta > 0 && theta < 1)) throw std::invalid_argument("power_counting_bound: theta in (0,1) required");
  PowerCountingSummary s;
  const int nv = static_cast<int>(t.vertices.size());
  const long h = t.h;
  const long P0 = static_cast<long>(fa.P[0].size());
  const long I0 = static_cast<long>(internal_labels(t, 0).size());
  s.prefactor_exponent = h * (3 - P0 + I0 - 3L * t.n());
  s.reorganized = h * (3 - P0);
  s.relevant_margins = true;
  s.endpoint_margin = true;
  long margin_total = 0, dh_total = 0;
  for (int v = 0; v < nv; ++v) {
    const auto& tv = t.vertices[v];
    if (tv.endpoint) continue;
    const long Pv = static_cast<long>(fa.P[v].size());
    const long Iv = static_cast<long>(internal_labels(t, v).size());
    const long dh = tv.scale - t.parent_scale(v);
    if (v != 0 && Pv < 4)
      throw std::domain_error("power_counting_bound: |P_v| >= 4 required off v0 (quadratic parts are localized)");
    if (v != 0 && !(Pv - 3 >= 1 && 4 * (Pv - 3) >= Pv)) s.relevant_margins = false;
    s.vertex_exponent += dh * (3 - Pv + Iv - 3L * t.endpoints_following(v));
    const long nbar = t.direct_endpoints(v), pbar = nbar * kFieldsPerEndpoint;
    s.reorganized += -dh * (Pv - 3) + static_cast<long>(tv.scale) * (pbar - 3 * nbar);
    if (pbar - 3 * nbar < 0) s.endpoint_margin = false;
    margin_total += pbar - 3 * nbar;
    dh_total += dh;
  }
  if (margin_total < t.n()) s.endpoint_margin = false;
  s.final_exponent = h * (3 - P0 + theta);
  s.theta_bound_lhs = t.highest_nonendpoint_scale() - theta * dh_total;
  s.theta_bound_rhs = theta * h;
  s.theta_bound = s.theta_bound_lhs <= s.theta_bound_rhs + 1e-12;
  return s;
}

double geometric_tree_sum(const std::vector<LabeledTree>& ts, double gamma, double theta) {
  double total = 0.0;
  for (const auto& t : ts) {
    long dh = 0;
    for (int v = 0; v < static_cast<int>(t.vertices.size()); ++v)
      if (!t.vertices[v].endpoint) dh += t.vertices[v].scale - t.parent_scale(v);
    total += std::pow(gamma, -(1.0 - theta) * dh / 2.0);
  }
  return total;
}

double geometric_tree_sum_limit(int n, double gamma, double theta) {
  const double x = std::pow(gamma, -(1.0 - theta) / 2.0);
  const double edge = 1.0 / (1.0 - x);
  if (n == 1) return x * edge;  // v0 sits strictly below the single endpoint
  double total = 0.0;
  for (const auto& sk : enumerate_skeletons(n)) {
    int branch = 0;
    for (const auto& node : sk.nodes) branch += node.children.empty() ? 0 : 1;
    const int edges = static_cast<int>(sk.nodes.size());  // one edge above every node
    total += std::pow(x, branch) * std::pow(edge, edges);
  }
  return total;
}

}  // namespace honeycomb::trees
