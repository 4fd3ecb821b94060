#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>

namespace honeycomb {

using Mat4c = Eigen::Matrix4cd;

struct GammaSet {
  std::array<Mat4c, 3> g;
};

// gamma_0 = -i [[0, s0], [s0, 0]], gamma_1 = [[0, s2], [-s2, 0]], gamma_2 = [[0, s1], [-s1, 0]]
GammaSet euclidean_gammas();
std::array<Eigen::Matrix2cd, 3> pauli();  // s0 (identity), s1, s2

// {g_mu, g_nu} + 2 delta_{mu nu}; exact zero for a euclidean set.
std::array<std::array<Mat4c, 3>, 3> anticommutator_table(const GammaSet& g);
double anticommutator_defect(const GammaSet& g);

// S g S^{-1} for every member.
GammaSet similarity_transform(const GammaSet& g, const Mat4c& S);

// exp(theta/4 [g0, g1]) through (g0 g1)^2 = -1: cos(theta/2) + g0 g1 sin(theta/2).
Mat4c spinor_rotation(double theta, const GammaSet& g);

// e^{-theta/4 [g0,g1]} (g0, g1, g2) e^{theta/4 [g0,g1]}
GammaSet rotation_conjugation(double theta, const GammaSet& g);
// (g0 cos - g1 sin, g1 cos + g0 sin, g2)
GammaSet rotated_reference(double theta, const GammaSet& g);
double max_difference(const GammaSet& a, const GammaSet& b);

// gamma_0 i kslash: the quadratic form of the free Dirac action at k = (k0, k1, k2).
Mat4c dirac_form(const Eigen::Vector3d& k, const GammaSet& g);

// 2x2 block acting on the omega component of the spinor (Psi_{1+}, Psi_{2+}, Psi_{2-}, Psi_{1-}),
// returned in sublattice order (rho = 1, 2).
Eigen::Matrix2cd sublattice_block(const Mat4c& m, int omega);

}  // namespace honeycomb
