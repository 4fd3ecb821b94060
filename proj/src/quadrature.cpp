#include "honeycomb/quadrature.hpp"

#include <stdexcept>

namespace honeycomb {

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1 required");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadratureRule r;
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  r.nodes = mid + half * es.eigenvalues().array();
  r.weights = (2.0 * half) * es.eigenvectors().row(0).transpose().array().square();
  return r;
}

QuadratureRule composite_gauss_legendre(int n, int panels, double a, double b) {
  if (panels < 1) throw std::invalid_argument("composite_gauss_legendre: panels >= 1 required");
  QuadratureRule r;
  r.nodes.resize(n * panels);
  r.weights.resize(n * panels);
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const auto q = gauss_legendre(n, a + p * w, a + (p + 1) * w);
    r.nodes.segment(p * n, n) = q.nodes;
    r.weights.segment(p * n, n) = q.weights;
  }
  return r;
}

}  // namespace honeycomb
