#pragma once
// Free fermions on the finite honeycomb cluster by direct diagonalization of the
// 2L^2 x 2L^2 hopping matrix. Used as an independent check of the Bloch formulas.

#include "honeycomb/lattice.hpp"

#include <Eigen/Dense>

namespace oracle {

struct RealSpaceFree {
  int L;
  double beta;
  Eigen::VectorXd E;
  Eigen::MatrixXd U;

  int site(int rho, int n1, int n2) const {
    auto w = [this](int x) { return ((x % L) + L) % L; };
    return rho * L * L + w(n1) * L + w(n2);
  }

  RealSpaceFree(int L_, double beta_) : L(L_), beta(beta_) {
    const int N = 2 * L * L;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(N, N);
    for (int n1 = 0; n1 < L; ++n1)
      for (int n2 = 0; n2 < L; ++n2) {
        const int a = site(0, n1, n2);
        for (auto [m1, m2] : {std::pair{n1, n2}, {n1, n2 - 1}, {n1 - 1, n2}}) {
          const int b = site(1, m1, m2);
          h(a, b) -= 1.0;
          h(b, a) -= 1.0;
        }
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    E = es.eigenvalues();
    U = es.eigenvectors();
  }

  // <T c_i(tau) c+_j(0)>, tau in (-beta, beta); tau == 0 taken as 0^-.
  double G(int i, int j, double tau) const {
    double s = 0.0;
    for (int n = 0; n < E.size(); ++n) {
      const double e = E(n);
      double k;
      if (tau > 0) k = std::exp(-tau * e) / (1.0 + std::exp(-beta * e));
      else k = -std::exp(-(tau + beta) * e) / (1.0 + std::exp(-beta * e));
      s += U(i, n) * U(j, n) * k;
    }
    return s;
  }
};

}  // namespace oracle
