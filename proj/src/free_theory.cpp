#include "honeycomb/free_theory.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace honeycomb {

namespace {
constexpr cplx I{0.0, 1.0};

// Phase e^{-i k.x} for k = (m1 b1 + m2 b2)/L and x = n1 a1 + n2 a2.
cplx grid_phase(int m1, int m2, int n1, int n2, int L) {
  const long long p = (static_cast<long long>(m1) * n1 + static_cast<long long>(m2) * n2) % L;
  return std::polar(1.0, -2.0 * kPi * static_cast<double>(p) / L);
}
}  // namespace

Mat2c hopping_matrix(const Vec2d& k) {
  const cplx v = complex_amplitude(k);
  Mat2c H;
  H << 0.0, -std::conj(v), -v, 0.0;
  return H;
}

Mat2c free_quadratic_form(const MomentumPoint& k) {
  return hopping_matrix(k.k) - I * k.k0 * Mat2c::Identity();
}

Mat2c propagator_momentum(const MomentumPoint& k) {
  const cplx v = complex_amplitude(k.k);
  const double den = k.k0 * k.k0 + std::norm(v);
  // v vanishes at p_F only up to rounding, hence the tolerance.
  if (k.k0 == 0.0 && std::abs(v) < 1e-12) throw SingularPropagator("propagator_momentum: (k0, v(k)) = (0, 0)");
  Mat2c g;
  g << I * k.k0, -std::conj(v), -v, I * k.k0;
  return g / den;
}

BandDecomposition bands(const Vec2d& k) {
  const cplx v = complex_amplitude(k);
  const double e = std::abs(v);
  BandDecomposition b;
  b.energy[0] = -e;
  b.energy[1] = e;
  if (e == 0.0) {
    b.projector[0] = 0.5 * Mat2c::Identity();
    b.projector[1] = 0.5 * Mat2c::Identity();
    return b;
  }
  const Mat2c h = hopping_matrix(k) / e;
  b.projector[0] = 0.5 * (Mat2c::Identity() - h);
  b.projector[1] = 0.5 * (Mat2c::Identity() + h);
  return b;
}

double band_kernel_positive(double eps, double tau, double beta) {
  if (eps >= 0) return std::exp(-eps * tau) / (1.0 + std::exp(-beta * eps));
  return std::exp(eps * (beta - tau)) / (1.0 + std::exp(beta * eps));
}

namespace {

// Reduced form of x0: value = sign * kernel(r) for r in (0, beta], or a boundary point.
struct ReducedTime {
  double r;
  double sign;
  bool boundary;
};

ReducedTime reduce_time(double x0, double beta) {
  const double m = std::floor(x0 / beta);
  double r = x0 - m * beta;
  double sign = (static_cast<long long>(m) % 2 == 0) ? 1.0 : -1.0;
  if (r >= beta) {  // guards against rounding in x0 - m*beta
    r -= beta;
    sign = -sign;
  }
  return {r, sign, r == 0.0};
}

double level_kernel(double eps, double x0, double beta, TimeSide side) {
  const auto t = reduce_time(x0, beta);
  if (!t.boundary) return t.sign * band_kernel_positive(eps, t.r, beta);
  const double right = t.sign * band_kernel_positive(eps, 0.0, beta);
  const double left = -t.sign * band_kernel_positive(eps, beta, beta);
  switch (side) {
    case TimeSide::left: return left;
    case TimeSide::right: return right;
    case TimeSide::average: break;
  }
  return 0.5 * (left + right);
}

}  // namespace

Mat2c propagator_mixed(const Vec2d& k, double tau, double beta, TimeSide side) {
  const auto b = bands(k);
  return b.projector[0] * level_kernel(b.energy[0], tau, beta, side) +
         b.projector[1] * level_kernel(b.energy[1], tau, beta, side);
}

Mat2c propagator_position(const SpaceTimePoint& x, double beta, const LatticeSpec& spec) {
  const int L = spec.L;
  Mat2c sum = Mat2c::Zero();
  for (int m1 = 0; m1 < L; ++m1) {
    for (int m2 = 0; m2 < L; ++m2) {
      const Vec2d k = grid_momentum(spec, {m1, m2});
      sum += grid_phase(m1, m2, x.n1, x.n2, L) * propagator_mixed(k, x.x0, beta, x.side);
    }
  }
  return sum / static_cast<double>(spec.cells());
}

Mat2c matsubara_truncated(const SpaceTimePoint& x, double beta, const LatticeSpec& spec, int M, TailTreatment tail) {
  const int L = spec.L;
  std::vector<cplx> time_phase(2 * M);
  std::vector<double> k0s(2 * M);
  for (int n0 = -M; n0 < M; ++n0) {
    k0s[n0 + M] = matsubara(beta, n0);
    time_phase[n0 + M] = std::polar(1.0, -k0s[n0 + M] * x.x0);
  }
  const bool subtract = tail == TailTreatment::subtract_leading;
  // Exact frequency sums of the two asymptotic terms i/k0 and H/k0^2.
  double sum_first = 0.0, sum_second = 0.0;
  if (subtract) {
    sum_first = level_kernel(0.0, x.x0, beta, x.side);
    const auto t = reduce_time(x.x0, beta);
    sum_second = t.sign * (beta / 4 - t.r / 2);
  }
  Mat2c sum = Mat2c::Zero();
  for (int m1 = 0; m1 < L; ++m1) {
    for (int m2 = 0; m2 < L; ++m2) {
      const Vec2d k = grid_momentum(spec, {m1, m2});
      const Mat2c H = hopping_matrix(k);
      Mat2c inner = Mat2c::Zero();
      for (int i = 0; i < 2 * M; ++i) {
        Mat2c g = propagator_momentum({k0s[i], k});
        if (subtract) g -= (I / k0s[i]) * Mat2c::Identity() + H / (k0s[i] * k0s[i]);
        inner += time_phase[i] * g;
      }
      inner /= beta;
      if (subtract) inner += sum_first * Mat2c::Identity() + sum_second * H;
      sum += grid_phase(m1, m2, x.n1, x.n2, L) * inner;
    }
  }
  return sum / static_cast<double>(spec.cells());
}

cplx wick_2n(std::span<const Insertion> ins, double beta, const LatticeSpec& spec) {
  std::vector<int> minus, plus;
  for (int i = 0; i < static_cast<int>(ins.size()); ++i) (ins[i].eps < 0 ? minus : plus).push_back(i);
  if (minus.size() != plus.size()) return 0.0;
  const int n = static_cast<int>(minus.size());
  if (n == 0) return 1.0;

  // Sign of the permutation taking the listed order to (minus..., plus...).
  std::vector<int> order(minus);
  order.insert(order.end(), plus.begin(), plus.end());
  int inversions = 0;
  for (std::size_t a = 0; a < order.size(); ++a)
    for (std::size_t b = a + 1; b < order.size(); ++b)
      if (order[a] > order[b]) ++inversions;
  double sign = (inversions % 2 == 0) ? 1.0 : -1.0;
  // <T c_1..c_n c+_1..c+_n> = (-1)^{n(n-1)/2} det[<T c_i c+_j>]
  if ((n * (n - 1) / 2) % 2 != 0) sign = -sign;

  Eigen::MatrixXcd G(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& a = ins[minus[i]];
    for (int j = 0; j < n; ++j) {
      const auto& b = ins[plus[j]];
      if (a.spin != b.spin) {
        G(i, j) = 0.0;
        continue;
      }
      // Equal times: the creation operator stands to the left.
      const SpaceTimePoint d{a.x0 - b.x0, a.n1 - b.n1, a.n2 - b.n2, TimeSide::left};
      G(i, j) = propagator_position(d, beta, spec)(a.sublattice, b.sublattice);
    }
  }
  return sign * G.determinant();
}

}  // namespace honeycomb
