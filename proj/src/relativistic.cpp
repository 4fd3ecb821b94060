#include "honeycomb/relativistic.hpp"

#include <cmath>

namespace honeycomb {

namespace {
const std::complex<double> I{0.0, 1.0};

Mat4c blocks(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b, const Eigen::Matrix2cd& c,
             const Eigen::Matrix2cd& d) {
  Mat4c m;
  m << a, b, c, d;
  return m;
}
}  // namespace

std::array<Eigen::Matrix2cd, 3> pauli() {
  Eigen::Matrix2cd s0 = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd s1, s2;
  s1 << 0, 1, 1, 0;
  s2 << 0, -I, I, 0;
  return {s0, s1, s2};
}

GammaSet euclidean_gammas() {
  const auto s = pauli();
  const Eigen::Matrix2cd z = Eigen::Matrix2cd::Zero();
  return {{-I * blocks(z, s[0], s[0], z), blocks(z, s[2], -s[2], z), blocks(z, s[1], -s[1], z)}};
}

std::array<std::array<Mat4c, 3>, 3> anticommutator_table(const GammaSet& g) {
  std::array<std::array<Mat4c, 3>, 3> t;
  for (int m = 0; m < 3; ++m)
    for (int n = 0; n < 3; ++n) {
      t[m][n] = g.g[m] * g.g[n] + g.g[n] * g.g[m];
      if (m == n) t[m][n] += 2.0 * Mat4c::Identity();
    }
  return t;
}

double anticommutator_defect(const GammaSet& g) {
  double d = 0.0;
  for (const auto& row : anticommutator_table(g))
    for (const auto& m : row) d = std::max(d, m.cwiseAbs().maxCoeff());
  return d;
}

GammaSet similarity_transform(const GammaSet& g, const Mat4c& S) {
  const Mat4c Si = S.inverse();
  return {{S * g.g[0] * Si, S * g.g[1] * Si, S * g.g[2] * Si}};
}

Mat4c spinor_rotation(double theta, const GammaSet& g) {
  // [g0, g1] = 2 g0 g1, so theta/4 [g0, g1] = (theta/2) X with X^2 = -1.
  const Mat4c X = g.g[0] * g.g[1];
  return std::cos(theta / 2) * Mat4c::Identity() + std::sin(theta / 2) * X;
}

GammaSet rotation_conjugation(double theta, const GammaSet& g) {
  const Mat4c R = spinor_rotation(theta, g);
  const Mat4c Rinv = spinor_rotation(-theta, g);
  return {{Rinv * g.g[0] * R, Rinv * g.g[1] * R, Rinv * g.g[2] * R}};
}

GammaSet rotated_reference(double theta, const GammaSet& g) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {{c * g.g[0] - s * g.g[1], c * g.g[1] + s * g.g[0], g.g[2]}};
}

double max_difference(const GammaSet& a, const GammaSet& b) {
  double d = 0.0;
  for (int m = 0; m < 3; ++m) d = std::max(d, (a.g[m] - b.g[m]).cwiseAbs().maxCoeff());
  return d;
}

Mat4c dirac_form(const Eigen::Vector3d& k, const GammaSet& g) {
  const Mat4c kslash = k(0) * g.g[0] + k(1) * g.g[1] + k(2) * g.g[2];
  return I * g.g[0] * kslash;
}

Eigen::Matrix2cd sublattice_block(const Mat4c& m, int omega) {
  if (omega > 0) return m.topLeftCorner<2, 2>();
  // components 3, 4 hold (rho=2, rho=1): reverse to sublattice order
  Eigen::Matrix2cd b;
  b << m(3, 3), m(3, 2), m(2, 3), m(2, 2);
  return b;
}

}  // namespace honeycomb
