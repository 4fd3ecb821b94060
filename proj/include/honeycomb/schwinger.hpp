#pragma once
// Interacting two-point function from a completed second-order flow.

#include "honeycomb/kernels.hpp"

#include <vector>

namespace honeycomb {

class TwoPointAssembly {
 public:
  // The flow must reach the lowest scale h_beta.
  explicit TwoPointAssembly(FlowResult flow);

  int floor() const { return floor_; }
  const FlowResult& flow() const { return flow_; }

  // g^(h)_omega(k') for h in [floor, 1]; g^(1) is the ultraviolet propagator near p_F^omega
  // (indicator of the nearer Fermi point, one half at ties).
  Mat2c single_scale(int h, const MomentumPoint& kp, int omega) const;
  // W^(h) at k' + p_F^omega.
  Mat2c kernel(int h, const MomentumPoint& kp, int omega) const;
  // Smallest h with g^(h)(k') != 0; 2 when none is.
  int lowest_scale(const MomentumPoint& kp, int omega) const;

  struct Factors {
    std::vector<Mat2c> Q;  // Q[1 - h], h = 1 .. floor
    std::vector<Mat2c> G;  // G[1 - h] = sum_{k >= h} g^(k) Q^(k)
    const Mat2c& q(int h) const { return Q.at(1 - h); }
    const Mat2c& g(int h) const { return G.at(1 - h); }
  };
  // Q^(1) = 1, Q^(h) = Q^(h+1) - W^(h) G^(h+1), down to `down_to` (default floor).
  Factors factors(const MomentumPoint& kp, int omega, std::optional<int> down_to = std::nullopt) const;

  // Two slices around h_k: sum_j Q g Q - G W^(j-1) G, j = h_k, h_k + 1.
  Mat2c quasi_particle(const MomentumPoint& kp, int omega) const;
  // Full momentum: the infrared formula near a Fermi point, g - g W^(0) g elsewhere.
  Mat2c two_point(const MomentumPoint& k) const;

 private:
  FlowResult flow_;
  int floor_;
};

// Inverse-Dirac fit  S^{-1} ~ Z [[-i k0, vF (i k1' - w k2')], [vF (-i k1' - w k2'), -i k0]].
struct DiracFit {
  double Z = 0.0;
  double vF = 0.0;
  double Z_error = 0.0;   // weighted spread of the per-sample estimates
  double vF_error = 0.0;
  double theta_fit = 0.0;  // slope of log ||R|| against log |k'|; NaN with fewer than two samples
  double max_residual = 0.0;
  std::vector<std::pair<double, double>> residual_norm;  // (|k'|, ||R(k')||)
  bool poor_fit = false;   // max ||R|| above the threshold
};
struct DiracSample {
  MomentumPoint kprime;
  Mat2c S;
};
// Weights |k'|^{-1}.  theta is regressed over samples with |k'| >= theta_min.
DiracFit dirac_fit(const std::vector<DiracSample>& samples, int omega, double theta_min = 0.0,
                   double poor_fit_threshold = 0.5);

// k' = (pi/beta, t e) for t geometric in [t_min, t_max].
std::vector<MomentumPoint> dirac_ray(double beta, const Vec2d& direction, double t_min, double t_max, int count);

// Q bound on sampled support points of g^(h), h in hs.
struct QBound {
  std::vector<int> scales;
  std::vector<double> max_deviation;  // max ||Q^(h) - 1|| over the samples
  double theta = 0.5;
  double C = 0.0;                     // max over h of deviation / (|U| gamma^{theta h})
};
QBound q_bound(const TwoPointAssembly& a, const std::vector<int>& hs, int samples_per_scale = 3, double theta = 0.5);

// Free spin-spin correlation <S_x . S_y> with x the a-site of cell 0.
struct SpinSpinPoint {
  int n1, n2, rho;
  double distance;
  double value;
};
struct SpinSpinProfile {
  double on_site = 0.0;
  std::vector<SpinSpinPoint> points;
  std::vector<std::pair<double, double>> envelope;  // (distance, max |value|) per log bin
  double slope = 0.0;
};
SpinSpinProfile spin_spin_free(double beta, const LatticeSpec& spec, double r_min = 2.0, double r_max = 20.0,
                               int bins = 10);
// Minimal-image distance of n1 a1 + n2 a2 + rho d1 on the L x L torus.
double site_distance(int n1, int n2, int rho, const LatticeSpec& spec);

}  // namespace honeycomb
