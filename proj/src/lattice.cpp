#include "honeycomb/lattice.hpp"

#include <limits>
#include <stdexcept>

namespace honeycomb {

DualBasis dual_basis(const Vec2d& a1, const Vec2d& a2) {
  Eigen::Matrix2d A;
  A.col(0) = a1;
  A.col(1) = a2;
  const double det = A.determinant();
  const double scale = a1.norm() * a2.norm();
  if (!(std::abs(det) > 1e-12 * scale) || !std::isfinite(det)) {
    throw std::invalid_argument("dual_basis: basis vectors are linearly dependent");
  }
  const Eigen::Matrix2d B = 2.0 * kPi * A.transpose().inverse();
  return {B.col(0), B.col(1)};
}

LatticeSpec LatticeSpec::honeycomb(int L) {
  if (L < 1) throw std::invalid_argument("LatticeSpec: L must be positive");
  LatticeSpec s;
  s.L = L;
  s.a1 = Vec2d(1.5, kSqrt3 / 2);
  s.a2 = Vec2d(1.5, -kSqrt3 / 2);
  s.d1 = Vec2d(1.0, 0.0);
  s.d2 = Vec2d(-0.5, kSqrt3 / 2);
  s.d3 = Vec2d(-0.5, -kSqrt3 / 2);
  const auto dual = dual_basis(s.a1, s.a2);
  s.b1 = dual.b1;
  s.b2 = dual.b2;
  return s;
}

FermiPoint fermi_point(int omega) {
  return {omega, Vec2d(2 * kPi / 3, omega * 2 * kPi / (3 * kSqrt3))};
}

cplx complex_amplitude_bonds(const Vec2d& k, const LatticeSpec& spec) {
  cplx v = 0;
  for (int i = 0; i < 3; ++i) v += std::polar(1.0, k.dot(spec.delta(i) - spec.d1));
  return v;
}

Eigen::Matrix2d rotation_T1() {
  Eigen::Matrix2d R;
  R << -0.5, -kSqrt3 / 2, kSqrt3 / 2, -0.5;
  return R;
}

Eigen::Matrix2d rotation_T1_inverse() { return rotation_T1().transpose(); }

namespace {

const DualBasis& standard_dual() {
  static const DualBasis d = dual_basis(Vec2d(1.5, kSqrt3 / 2), Vec2d(1.5, -kSqrt3 / 2));
  return d;
}

}  // namespace

Vec2d reduce_mod_dual(const Vec2d& k) {
  const auto& d = standard_dual();
  // Coordinates in the dual basis, rounded, then a local search for the shortest image.
  Eigen::Matrix2d B;
  B.col(0) = d.b1;
  B.col(1) = d.b2;
  const Vec2d c = B.inverse() * k;
  const Vec2d base = k - std::round(c(0)) * d.b1 - std::round(c(1)) * d.b2;
  Vec2d best = base;
  double best_norm = std::numeric_limits<double>::infinity();
  for (int m1 = -2; m1 <= 2; ++m1) {
    for (int m2 = -2; m2 <= 2; ++m2) {
      const Vec2d cand = base + m1 * d.b1 + m2 * d.b2;
      const double n = cand.squaredNorm();
      if (n < best_norm) {
        best_norm = n;
        best = cand;
      }
    }
  }
  return best;
}

double norm_mod_dual(const Vec2d& k) { return reduce_mod_dual(k).norm(); }

bool is_dual_lattice_vector(const Vec2d& k, double tol) { return norm_mod_dual(k) < tol; }

Vec2d grid_momentum(const LatticeSpec& spec, const GridIndex& n) {
  return (n.n1 * spec.b1 + n.n2 * spec.b2) / spec.L;
}

GridIndex wrap(const GridIndex& n, int L) {
  auto w = [L](int x) { return ((x % L) + L) % L; };
  return {w(n.n1), w(n.n2)};
}

GridIndex rotate_T1_inverse(const GridIndex& n, int L) {
  // T1^{-1} b1 = b2, T1^{-1} b2 = -(b1 + b2)
  return wrap({-n.n2, n.n1 - n.n2}, L);
}

std::optional<GridIndex> fermi_index(int L, int omega) {
  if (L % 3 != 0) return std::nullopt;
  return omega > 0 ? GridIndex{2 * L / 3, L / 3} : GridIndex{L / 3, 2 * L / 3};
}

MomentumGrid::MomentumGrid(const LatticeSpec& spec, double beta, int M, std::optional<int> omega)
    : spec_(spec), omega_(omega) {
  if (spec.L < 1 || !(beta > 0) || M < 1) {
    throw std::invalid_argument("MomentumGrid: need L >= 1, beta > 0, M >= 1");
  }
  const int L = spec.L;
  if (!omega) {
    for (int n1 = 0; n1 < L; ++n1)
      for (int n2 = 0; n2 < L; ++n2) indices_.push_back({n1, n2});
  } else {
    for (int n1 = -L / 2 + 1; n1 <= L / 2; ++n1)
      for (int n2 = -L / 2 + 1; n2 <= L / 2; ++n2) indices_.push_back({n1, n2});
  }
  const Vec2d shift = omega ? Vec2d(-(double(L % 3) / L) * fermi_point(*omega).p) : Vec2d::Zero();
  for (const auto& n : indices_) spatial_.push_back(grid_momentum(spec, n) + shift);
  for (int n0 = -M; n0 < M; ++n0) frequencies_.push_back(matsubara(beta, n0));
}

GridIndex MomentumGrid::unshifted(const GridIndex& n) const {
  if (!omega_) return wrap(n, spec_.L);
  const int m = (spec_.L - spec_.L % 3) / 3;
  return *omega_ > 0 ? wrap({n.n1 + 2 * m, n.n2 + m}, spec_.L) : wrap({n.n1 + m, n.n2 + 2 * m}, spec_.L);
}

}  // namespace honeycomb
