#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

namespace honeycomb {

template <class T>
using Vec2 = Eigen::Matrix<T, 2, 1>;
using Vec2d = Vec2<double>;
using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrt3 = std::numbers::sqrt3;

struct DualBasis {
  Vec2d b1;
  Vec2d b2;
};

// b_i . a_j = 2 pi delta_ij.  Throws std::invalid_argument on a degenerate basis.
DualBasis dual_basis(const Vec2d& a1, const Vec2d& a2);

struct LatticeSpec {
  int L = 1;
  Vec2d a1, a2;
  Vec2d d1, d2, d3;
  Vec2d b1, b2;

  static LatticeSpec honeycomb(int L);
  const Vec2d& delta(int i) const { return i == 0 ? d1 : (i == 1 ? d2 : d3); }
  int cells() const { return L * L; }
  Vec2d cell_position(int n1, int n2) const { return n1 * a1 + n2 * a2; }
};

struct FermiPoint {
  int omega;
  Vec2d p;
};

FermiPoint fermi_point(int omega);

// 1 + 2 e^{-i 3k_1/2} cos(sqrt3 k_2/2)
template <class T>
std::complex<T> complex_amplitude(const Vec2<T>& k) {
  using std::cos;
  using std::sin;
  const T phase = T(1.5) * k(0);
  const T c = cos(std::sqrt(T(3)) / T(2) * k(1));
  return {T(1) + T(2) * cos(phase) * c, -T(2) * sin(phase) * c};
}

// Same amplitude summed bond by bond: sum_i e^{i k.(d_i - d_1)}.
cplx complex_amplitude_bonds(const Vec2d& k, const LatticeSpec& spec);

// Closed-form modulus; independent of the complex path above.
template <class T>
T dispersion(const Vec2<T>& k) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const T c1 = cos(T(1.5) * k(0));
  const T s1 = sin(T(1.5) * k(0));
  const T c2 = cos(sqrt(T(3)) / T(2) * k(1));
  const T re = T(1) + T(2) * c1 * c2;
  return sqrt(re * re + T(4) * s1 * s1 * c2 * c2);
}

inline double dispersion_modulus(const Vec2d& k) { return std::abs(complex_amplitude(k)); }

// Rotation by 2 pi / 3 and its inverse.
Eigen::Matrix2d rotation_T1();
Eigen::Matrix2d rotation_T1_inverse();

// Euclidean distance to the nearest point of the dual lattice translate of k.
double norm_mod_dual(const Vec2d& k);
// Representative of k modulo the dual lattice with minimal euclidean norm.
Vec2d reduce_mod_dual(const Vec2d& k);
bool is_dual_lattice_vector(const Vec2d& k, double tol = 1e-9);

inline double matsubara(double beta, int n0) { return 2.0 * kPi / beta * (n0 + 0.5); }

struct MomentumPoint {
  double k0 = 0.0;
  Vec2d k = Vec2d::Zero();
};

// Integer label of a spatial grid momentum (n1 b1 + n2 b2)/L.
struct GridIndex {
  int n1 = 0;
  int n2 = 0;
  friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

// Spatial grid D_L (omega empty) or the shifted grid D^omega_L, times 2M Matsubara frequencies.
class MomentumGrid {
 public:
  MomentumGrid(const LatticeSpec& spec, double beta, int M, std::optional<int> omega = std::nullopt);

  const std::vector<GridIndex>& indices() const { return indices_; }
  const std::vector<Vec2d>& spatial() const { return spatial_; }
  const std::vector<double>& frequencies() const { return frequencies_; }
  std::size_t size() const { return spatial_.size() * frequencies_.size(); }
  MomentumPoint point(std::size_t spatial_i, std::size_t freq_i) const {
    return {frequencies_[freq_i], spatial_[spatial_i]};
  }
  std::optional<int> omega() const { return omega_; }

  // Label in D_L (0 <= n_i < L) of k' + p_F^omega for a shifted-grid member.
  GridIndex unshifted(const GridIndex& n) const;

 private:
  LatticeSpec spec_;
  std::optional<int> omega_;
  std::vector<GridIndex> indices_;
  std::vector<Vec2d> spatial_;
  std::vector<double> frequencies_;
};

Vec2d grid_momentum(const LatticeSpec& spec, const GridIndex& n);
GridIndex wrap(const GridIndex& n, int L);
// Integer action of T1^{-1} on grid labels (the grid is closed under it).
GridIndex rotate_T1_inverse(const GridIndex& n, int L);
// Label of p_F^omega on D_L; empty unless L is divisible by 3.
std::optional<GridIndex> fermi_index(int L, int omega);

}  // namespace honeycomb
