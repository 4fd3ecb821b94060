#pragma once

#include "honeycomb/cutoff.hpp"
#include "honeycomb/free_theory.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace honeycomb {

// Functions of the quasi-particle momentum k' = (k0, k - p_F^omega).
using OmegaFn = std::function<cplx(const MomentumPoint&, int omega)>;
// Quadratic form of a quasi-particle field, as a function of (k', omega).
using FormFn = std::function<Mat2c(const MomentumPoint&, int omega)>;

// c0: the linear part of -v*(k' + p_F^omega) is c0 (i k1' - omega k2').
inline constexpr double kFreeVelocity = 1.5;

// -v*(k' + p_F^omega) - c0 (i k1' - omega k2'): the O(|k'|^2) remainder of the free form.
cplx free_remainder_t0(const MomentumPoint& kprime, int omega);

// A_{0,omega}(k') written directly from the hopping amplitude.
Mat2c free_shifted_form(const MomentumPoint& kprime, int omega);

struct FlowState {
  int h = 0;
  double zeta = 1.0;
  double c = kFreeVelocity;
  OmegaFn s_fn;  // empty means identically zero
  OmegaFn t_fn;
  double F = 0.0;
  double e = 0.0;
  double ebar = 0.0;

  // h = 0, zeta = 1, c = 3/2, s = 0, t = t0.
  static FlowState initial();
  cplx s(const MomentumPoint& k, int omega) const { return s_fn ? s_fn(k, omega) : cplx(0.0); }
  cplx t(const MomentumPoint& k, int omega) const { return t_fn ? t_fn(k, omega) : cplx(0.0); }
};

struct Corrections {
  double z = 0.0;
  double delta = 0.0;
  OmegaFn sigma_fn;  // sigma depends on omega through the kernel near p_F^omega
  OmegaFn tau_fn;
  double e = 0.0;
  double ebar = 0.0;

  cplx sigma(const MomentumPoint& k, int omega) const { return sigma_fn ? sigma_fn(k, omega) : cplx(0.0); }
  cplx tau(const MomentumPoint& k, int omega) const { return tau_fn ? tau_fn(k, omega) : cplx(0.0); }
};

// [[-i zeta k0 + s, c (i k1' - omega k2') + t], [c (-i k1' - omega k2') + t*, -i zeta k0 + s]]
Mat2c dressed_form(const MomentumPoint& kprime, int omega, const FlowState& flow);

// The form with chi_h-weighted corrections: the measure after absorbing the local part at scale h.
Mat2c barred_form(const MomentumPoint& kprime, int omega, const FlowState& flow, const Corrections& corr,
                  const CutoffSpec& cut);

// zeta_{h-1} = zeta_h + z_h and likewise for c, s, t; F_{h-1} = F_h + e_h + ebar_h.
FlowState flow_step(const FlowState& flow, const Corrections& corr);

// Form provider for the scale-h propagator: Abar_{h-1} built from (flow, corr).
FormFn barred_form_fn(FlowState flow, Corrections corr, CutoffSpec cut);

struct SupportPoint {
  MomentumPoint kprime;
  GridIndex index;    // centered label on the omega-shifted grid
  double weight;      // f_h(k'), or chi_h at the lowest scale
  Mat2c propagator;   // weight * form^{-1}
};

// g^(h)_omega on the shifted grid D^omega_{beta,L}.  At h == floor the weight is chi_h (all lower
// momenta are integrated in one step); below the floor the slice is empty.
class SingleScalePropagator {
 public:
  SingleScalePropagator(int h, int omega, double beta, const LatticeSpec& spec, const CutoffSpec& cut,
                        const FormFn& form, std::optional<int> floor = std::nullopt);

  int scale() const { return h_; }
  int omega() const { return omega_; }
  int floor() const { return floor_; }
  bool empty() const { return points_.empty(); }
  const std::vector<SupportPoint>& support() const { return points_; }
  double beta() const { return beta_; }
  const LatticeSpec& lattice() const { return spec_; }

  // (beta |Lambda|)^{-1} sum e^{-i k0 x0 - i k'.x} weight form^{-1}
  Mat2c operator()(const SpaceTimePoint& x) const;
  // Momentum-space value at a support point; zero off the support.
  Mat2c momentum(const GridIndex& index, int n0) const;

  // Gram factors with +ik'x phases, so that  int dz A*(x - z) B(x' - z) = g(x - x').
  cplx gram_A(const SpaceTimePoint& x) const;
  Mat2c gram_B(const SpaceTimePoint& x) const;
  double gram_norm_A_sq() const;
  // Column norms ||B e_rho||^2, rho = 0, 1.
  Eigen::Vector2d gram_norm_B_sq() const;
  // Number of uniform time nodes making the discrete z0 integral exact on this support.
  int exact_time_nodes() const;

 private:
  int h_;
  int omega_;
  int floor_;
  double beta_;
  LatticeSpec spec_;
  std::vector<SupportPoint> points_;
  std::vector<int> n0_;
};

// Quasi-particle decomposition of the infrared propagator on D_L with f_ir weights (no shifted grids).
Mat2c infrared_propagator(const SpaceTimePoint& x, double beta, const LatticeSpec& spec, const CutoffSpec& cut);

// Ultraviolet propagator: Matsubara sum of f_uv g over 2M frequencies with the i/k0 and H/k0^2
// asymptotes summed exactly.
Mat2c ultraviolet_propagator(const SpaceTimePoint& x, double beta, const LatticeSpec& spec, int M,
                             const CutoffSpec& cut);

// sum_omega e^{-i p_F^omega x} sum_{h=floor}^{0} g^(h)_omega(x) at U = 0.
Mat2c telescoped_infrared(const SpaceTimePoint& x, double beta, const LatticeSpec& spec, const CutoffSpec& cut,
                          int h_min);

// Ultraviolet slice h >= 1: f_uv(k) H_h(k0) g(k) summed over the 2M-frequency grid.
class UvSlice {
 public:
  UvSlice(int h, double beta, const LatticeSpec& spec, int M, const CutoffSpec& cut);

  int scale() const { return h_; }
  bool empty() const { return points_.empty(); }
  Mat2c operator()(const SpaceTimePoint& x) const;
  // A_h carries 1/(k0^2 + |v|^2), B_h the numerator of g; phases +ikx as for the infrared factors.
  cplx gram_A(const SpaceTimePoint& x) const;
  Mat2c gram_B(const SpaceTimePoint& x) const;
  double gram_norm_A_sq() const;
  Eigen::Vector2d gram_norm_B_sq() const;
  int exact_time_nodes() const;

 private:
  struct Point {
    MomentumPoint k;
    int n0;
    double root_weight;  // sqrt(f_uv H_h)
    double denominator;  // k0^2 + |v|^2
    Mat2c numerator;     // [[i k0, -v*], [-v, i k0]]
  };
  int h_;
  double beta_;
  LatticeSpec spec_;
  std::vector<Point> points_;
  int n0_span_ = 0;
};

// Direct 2M-frequency sum of f_uv g: the reference for sum_h UvSlice.
Mat2c ultraviolet_truncated(const SpaceTimePoint& x, double beta, const LatticeSpec& spec, int M,
                            const CutoffSpec& cut);

// Distances used by the decay envelopes: |x0|_beta on the circle, |x| on the torus of L x L cells.
double torus_time_distance(double x0, double beta);
double torus_space_distance(int n1, int n2, const LatticeSpec& spec);

// sup over the samples of |g^(h)(x)| (1 + (gamma^h |x|)^3) / gamma^{2h}.
double decay_envelope(const SingleScalePropagator& g, const std::vector<SpaceTimePoint>& samples, double gamma);

// Gram-Hadamard check on G_{ab} = t_{ab} [g(x_a - y_b)]_{rho_a, rho'_b}, t_{ab} = u_{c(a)} . u_{c(b)}.
struct GramSample {
  double det_abs;
  double hadamard;  // prod ||f_a|| ||g_b||
};
struct GramHadamardReport {
  std::vector<GramSample> samples;
  int violations = 0;
  double max_ratio = 0.0;  // max det_abs / hadamard
};
GramHadamardReport gram_hadamard_check(const SingleScalePropagator& g, int samples, int max_size, unsigned seed);

}  // namespace honeycomb
