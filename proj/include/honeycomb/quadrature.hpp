#pragma once

#include <Eigen/Dense>

namespace honeycomb {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

// n-point Gauss-Legendre rule on [a, b] (Golub-Welsch); exact for polynomials of degree 2n-1.
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

// The same rule repeated on `panels` equal subintervals of [a, b].
QuadratureRule composite_gauss_legendre(int n, int panels, double a, double b);

}  // namespace honeycomb
