#pragma once

#include "honeycomb/lattice.hpp"

#include <span>
#include <stdexcept>

namespace honeycomb {

using Mat2c = Eigen::Matrix2cd;

struct SingularPropagator : std::domain_error {
  using std::domain_error::domain_error;
};

// Bloch hopping matrix [[0, -v*], [-v, 0]]; eigenvalues -|v| and +|v|.
Mat2c hopping_matrix(const Vec2d& k);

// [[-i k0, -v*], [-v, -i k0]]
Mat2c free_quadratic_form(const MomentumPoint& k);

// Inverse of the quadratic form; throws SingularPropagator at k0 = 0, |v| < 1e-12.
Mat2c propagator_momentum(const MomentumPoint& k);

// Spectral pieces of the hopping matrix: energies and orthogonal projectors.
struct BandDecomposition {
  double energy[2];
  Mat2c projector[2];
};
BandDecomposition bands(const Vec2d& k);

// Time kernel of a level of energy eps, for 0 < tau <= beta: e^{-eps tau}/(1+e^{-beta eps}).
double band_kernel_positive(double eps, double tau, double beta);

enum class TimeSide { average, left, right };

struct SpaceTimePoint {
  double x0 = 0.0;
  int n1 = 0;  // cell displacement n1 a1 + n2 a2
  int n2 = 0;
  TimeSide side = TimeSide::average;
};

// Closed-form position-space propagator; at x0 in beta*Z the side flag selects a one-sided
// limit, and `average` returns the mean of both limits.
Mat2c propagator_position(const SpaceTimePoint& x, double beta, const LatticeSpec& spec);

// Mixed (k, tau) form used by the closed-form route; tau must lie in (-beta, beta] \ {0}
// unless side selects a limit.
Mat2c propagator_mixed(const Vec2d& k, double tau, double beta, TimeSide side = TimeSide::average);

enum class TailTreatment { none, subtract_leading };

// Frequency sum over n0 = -M..M-1.  With subtract_leading the asymptotes i/k0 and H/k0^2
// are removed term by term and their exact sums added back.
Mat2c matsubara_truncated(const SpaceTimePoint& x, double beta, const LatticeSpec& spec, int M,
                          TailTreatment tail = TailTreatment::none);

struct Insertion {
  double x0 = 0.0;  // in [0, beta)
  int n1 = 0;
  int n2 = 0;
  int spin = 0;     // 0 up, 1 down
  int eps = -1;     // -1 annihilation (psi^-), +1 creation (psi^+)
  int sublattice = 0;
};

// Time-ordered free 2n-point function of the listed insertions (in the listed order).
cplx wick_2n(std::span<const Insertion> insertions, double beta, const LatticeSpec& spec);

}  // namespace honeycomb
