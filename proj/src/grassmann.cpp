#include "honeycomb/grassmann.hpp"
#include "honeycomb/quadrature.hpp"

#include <numeric>
#include <queue>

namespace honeycomb::grassmann {

namespace {

struct Field {
  int gen;
  int cluster;
};

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

// Edges (as cluster pairs) along the tree path from a to b.
std::vector<int> tree_path(int s, const std::vector<std::pair<int, int>>& edges, int a, int b) {
  std::vector<int> prev_edge(s, -1), prev_node(s, -1);
  std::vector<bool> seen(s, false);
  std::queue<int> q;
  q.push(a);
  seen[a] = true;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
      const auto [x, y] = edges[e];
      const int v = (x == u) ? y : (y == u ? x : -1);
      if (v < 0 || seen[v]) continue;
      seen[v] = true;
      prev_edge[v] = e;
      prev_node[v] = u;
      q.push(v);
    }
  }
  std::vector<int> path;
  for (int v = b; v != a; v = prev_node[v]) {
    if (prev_node[v] < 0) throw std::invalid_argument("tree_path: clusters not connected");
    path.push_back(prev_edge[v]);
  }
  return path;
}

}  // namespace

Eigen::MatrixXd bbf_interpolation(int s, const std::vector<std::pair<int, int>>& edges, const std::vector<double>& w) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Ones(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = i + 1; j < s; ++j) {
      double m = 1.0;
      for (int e : tree_path(s, edges, i, j)) m = std::min(m, w[e]);
      t(i, j) = t(j, i) = m;
    }
  return t;
}

BbfReport bbf_evaluate(const std::vector<std::vector<int>>& clusters, const GaussianSpec<cplx>& spec) {
  const int s = static_cast<int>(clusters.size());
  if (s < 1) throw std::invalid_argument("bbf_evaluate: at least one cluster required");
  if (s > 3) throw CapacityError("bbf_evaluate: at most 3 clusters supported");
  std::vector<Field> F;
  for (int c = 0; c < s; ++c)
    for (int g : clusters[c]) {
      if (!spec.is_integrated(g)) throw std::invalid_argument("bbf_evaluate: clusters must hold integrated fields");
      F.push_back({g, c});
    }
  const int nf = static_cast<int>(F.size());
  {
    Mask used = 0;
    for (const auto& f : F) {
      if (used & (Mask(1) << f.gen)) return {0.0, 0};  // repeated generator: the product vanishes
      used |= Mask(1) << f.gen;
    }
  }

  std::vector<AnchoredLine> lines;
  for (int a = 0; a < nf; ++a)
    for (int b = 0; b < nf; ++b)
      if (F[a].cluster != F[b].cluster && spec.is_minus(F[a].gen) && spec.is_plus(F[b].gen)) lines.push_back({a, b});

  BbfReport report{0.0, 0};
  std::vector<int> chosen;
  auto evaluate_tree = [&]() {
    std::vector<bool> used(nf, false);
    std::vector<std::pair<int, int>> edges;
    cplx line_product = 1.0;
    std::vector<int> order;
    for (int li : chosen) {
      const auto& l = lines[li];
      used[l.minus_field] = used[l.plus_field] = true;
      edges.push_back({F[l.minus_field].cluster, F[l.plus_field].cluster});
      line_product *= spec.pair(F[l.minus_field].gen, F[l.plus_field].gen);
      order.push_back(l.minus_field);
      order.push_back(l.plus_field);
    }
    std::vector<int> rm, rp;
    for (int a = 0; a < nf; ++a)
      if (!used[a]) (spec.is_minus(F[a].gen) ? rm : rp).push_back(a);
    if (rm.size() != rp.size()) return;
    const int m = static_cast<int>(rm.size());
    for (int a = 0; a < m; ++a) {
      order.push_back(rm[a]);
      order.push_back(rp[a]);
    }
    const double sign = permutation_sign(order);

    auto integrand = [&](const std::vector<double>& w) {
      const Eigen::MatrixXd t = bbf_interpolation(s, edges, w);
      Eigen::MatrixXcd G(m, m);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          G(a, b) = t(F[rm[a]].cluster, F[rp[b]].cluster) * spec.pair(F[rm[a]].gen, F[rp[b]].gen);
      return m == 0 ? cplx(1.0) : G.determinant();
    };

    // det G^T is a polynomial of degree <= m in each parameter on every ordering chamber.
    cplx integral = 0.0;
    if (s == 1) {
      integral = integrand({});
    } else if (s == 2) {
      const auto q = gauss_legendre(m / 2 + 2, 0.0, 1.0);
      for (int i = 0; i < q.nodes.size(); ++i) integral += q.weights(i) * integrand({q.nodes(i)});
    } else {
      // Chambers w_a < w_b: w_b = y, w_a = x y, Jacobian y.
      const auto q = gauss_legendre(m + 3, 0.0, 1.0);
      for (int i = 0; i < q.nodes.size(); ++i)
        for (int j = 0; j < q.nodes.size(); ++j) {
          const double x = q.nodes(i), y = q.nodes(j), wt = q.weights(i) * q.weights(j) * y;
          integral += wt * (integrand({x * y, y}) + integrand({y, x * y}));
        }
    }
    report.value += sign * line_product * integral;
    ++report.trees;
  };

  const int need = s - 1;
  auto recurse = [&](auto&& self, int start) -> void {
    if (static_cast<int>(chosen.size()) == need) {
      // distinct fields and a spanning tree on clusters
      std::vector<bool> used(nf, false);
      std::vector<int> parent(s);
      std::iota(parent.begin(), parent.end(), 0);
      for (int li : chosen) {
        const auto& l = lines[li];
        if (used[l.minus_field] || used[l.plus_field]) return;
        used[l.minus_field] = used[l.plus_field] = true;
        const int a = find_root(parent, F[l.minus_field].cluster), b = find_root(parent, F[l.plus_field].cluster);
        if (a == b) return;
        parent[a] = b;
      }
      evaluate_tree();
      return;
    }
    for (int li = start; li < static_cast<int>(lines.size()); ++li) {
      chosen.push_back(li);
      self(self, li + 1);
      chosen.pop_back();
    }
  };
  recurse(recurse, 0);
  return report;
}

cplx cluster_truncated_expectation(const std::vector<std::vector<int>>& clusters, const GaussianSpec<cplx>& spec) {
  std::vector<MultilinearForm<cplx>> X;
  for (const auto& c : clusters) {
    if (c.size() % 2 != 0) throw std::invalid_argument("cluster_truncated_expectation: clusters must be even");
    X.push_back(MultilinearForm<cplx>::monomial(spec.total(), c));
  }
  return truncated_expectation_joint<cplx>(X, spec).scalar_part();
}

GramHadamardResult gram_hadamard_check(const Eigen::MatrixXcd& F, const Eigen::MatrixXcd& G) {
  if (F.cols() != G.cols() || F.rows() != G.rows())
    throw std::invalid_argument("gram_hadamard_check: equal counts and dimensions required");
  const Eigen::MatrixXcd M = F.adjoint() * G;
  const cplx det = M.size() ? M.determinant() : cplx(1.0);
  double bound = 1.0;
  for (int a = 0; a < F.cols(); ++a) bound *= F.col(a).norm() * G.col(a).norm();
  return {det, bound, std::abs(det) <= bound * (1.0 + 1e-12)};
}

}  // namespace honeycomb::grassmann
