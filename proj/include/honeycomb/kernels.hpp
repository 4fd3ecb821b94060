#pragma once
// Second-order two-legged kernel of the effective potential, with free propagator lines.
// W_{rho rho'}(k) = U^2 (beta |Lambda|)^{-2} sum_{p,q} g_{rho rho'}(p) g_{rho rho'}(q) g_{rho' rho}(p + q - k).
// External momenta may sit off the spatial grid; k0 is always a fermionic frequency.

#include "honeycomb/cutoff.hpp"
#include "honeycomb/free_theory.hpp"
#include "honeycomb/multiscale.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace honeycomb {

double fermi(double eps, double beta);
// (n(e1) - n(e2)) / (e1 - e2), including the diagonal limit; no overflow for large beta.
double fermi_divided_difference(double e1, double e2, double beta);

// Particle-hole bubble (beta |Lambda|)^{-1} sum_q g_{rho rho'}(q) g_{rho' rho}(q + P), P0 bosonic.
Mat2c bubble_ph(const MomentumPoint& P, double beta, const LatticeSpec& spec);
// Particle-particle bubble (beta |Lambda|)^{-1} sum_p g_{rho rho'}(p) g_{rho rho'}(P - p), P0 bosonic.
Mat2c bubble_pp(const MomentumPoint& P, double beta, const LatticeSpec& spec);

// Full sunset by the band (spectral) formula, one value per frequency in k0s.
std::vector<Mat2c> sunset_spectral(const Vec2d& k, const std::vector<double>& k0s, double beta,
                                   const LatticeSpec& spec, double U);
Mat2c sunset_spectral(const MomentumPoint& k, double beta, const LatticeSpec& spec, double U);

// The same sunset as U^2 int dtau sum_x e^{ik0 tau + ik.x} g(x)_{rho rho'}^2 g(-x)_{rho' rho},
// with composite Gauss-Legendre in tau.  k must lie on the grid.
Mat2c sunset_position(const MomentumPoint& k, double beta, const LatticeSpec& spec, double U, int panels = 32,
                      int order = 16);

// Sunset of g_{>h} = g - g_{<=h} by direct position-space convolution (reference for SecondOrderKernel).
Mat2c sunset_above_position(int h, const MomentumPoint& k, double beta, const LatticeSpec& spec,
                            const CutoffSpec& cut, double U, int panels = 32, int order = 16);

// Second-order kernels split by scale.  g_{<=h}(p) = sum_omega chi_h(p - p_F^omega) g(p) for h >= floor,
// and zero below the floor (floor = h_beta).
class SecondOrderKernel {
 public:
  SecondOrderKernel(double U, double beta, const LatticeSpec& spec, const CutoffSpec& cut);

  double U() const { return U_; }
  double beta() const { return beta_; }
  const LatticeSpec& lattice() const { return spec_; }
  const CutoffSpec& cutoff() const { return cut_; }
  int floor() const { return floor_; }

  // Whole O(U^2) kernel.
  Mat2c total(const MomentumPoint& k) const;
  // Sunset of g_{>h}: the two-legged part of the effective potential after integrating scales > h.
  Mat2c above(int h, const MomentumPoint& k) const;
  // Increment generated on scale h in [floor, 0]: above(h) - above(h+1) for h < 0; above(0) is the
  // ultraviolet contribution.  Zero outside [floor, 0].
  Mat2c scale(int h, const MomentumPoint& k) const;

 private:
  Mat2c above_uncached(int h, const MomentumPoint& k) const;

  double U_;
  double beta_;
  LatticeSpec spec_;
  CutoffSpec cut_;
  int floor_;
  mutable std::mutex mutex_;
  mutable std::map<std::tuple<int, double, double, double>, Mat2c> cache_;
};

// Kernel values on D_L x {n0 = -F..F-1}.  scale empty means the total kernel.
struct KernelGrid {
  int order = 2;
  std::optional<int> scale;
  double beta = 0.0;
  double U = 0.0;
  LatticeSpec spec;
  int frequencies = 0;  // F
  std::vector<Mat2c> values;  // index (n0 + F) * L^2 + m1 * L + m2

  const Mat2c& at(int m1, int m2, int n0) const;
  MomentumPoint momentum(int m1, int m2, int n0) const;
};

KernelGrid second_order_kernel(const SecondOrderKernel& kernel, std::optional<int> h, int frequencies,
                               int workers = 1);

struct Check {
  std::string name;
  double value;
  double tolerance;
  bool pass;
};

// Relation families on a grid kernel: rotation, conjugation, the two reflections, parity and
// time reversal, plus the combined item (i).
std::vector<Check> symmetry_relations(const KernelGrid& grid, double tol = 1e-10);

// Local structure at k' = 0 near p_F^omega.
struct LocalStructure {
  cplx dk0_aa;             // d/dk0 W_aa, Richardson over k0 = pi/beta, 3pi/beta
  cplx dk0_ab;
  cplx w_aa_0, w_ab_0;     // values extrapolated to k0 = 0
  cplx d1_aa, d2_aa;       // spatial gradients at k0 -> 0
  cplx d1_ab, d2_ab;
};
using KernelFn = std::function<Mat2c(const MomentumPoint&)>;
// eps: spatial central-difference step; gradients are Richardson-extrapolated from eps and 2 eps.
LocalStructure local_structure(const KernelFn& W, int omega, double beta, double eps);

struct ExtractedCorrections {
  double z = 0.0;
  double delta = 0.0;
  double z_imag = 0.0;      // imaginary parts left over; zero up to rounding
  double delta_imag = 0.0;
  LocalStructure local;
};
// z = i dW_aa/dk0, delta = -i dW_ab/dk1' = -omega dW_ab/dk2' (averaged).
ExtractedCorrections extract_local(const KernelFn& W, int omega, double beta, double eps);

// Corrections for the flow on scale h: sigma and tau evaluate the kernel remainder on demand.
// Throws std::domain_error when z or delta has an imaginary part above reality_tol.
Corrections extract_corrections(std::shared_ptr<const SecondOrderKernel> kernel, int h, double reality_tol = 1e-8);

// Step used for spatial derivatives on scale h.
double derivative_step(int h, const CutoffSpec& cut);

struct Lemma2Report {
  std::vector<Check> checks;
  bool pass() const;
};
// Items (i)-(iii) on the total kernel.  (ii) extrapolates linearly in 1/beta over betas.
Lemma2Report lemma2_verify(double U, const LatticeSpec& spec, const std::vector<double>& betas, const CutoffSpec& cut,
                           int workers = 1);

// Linear fit y = a + b x; returns (a, b, max residual).
struct LinearFit {
  double intercept;
  double slope;
  double max_residual;
};
LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y);

struct UmklappReport {
  bool fermi_difference_not_dual;
  double min_support_separation;  // min |k1 - k2| modulo the dual lattice over the two supports
  double assembled_max;           // max |entry| of the omega != omega' block
  bool pass() const { return fermi_difference_not_dual && min_support_separation > 0 && assembled_max == 0.0; }
};
// Pairs every infrared support point near p_F^omega with every one near p_F^{-omega} and accumulates
// the kernel whenever they are equal modulo the dual lattice.
UmklappReport umklapp_check(const SecondOrderKernel& kernel);

// One row of the second-order flow.
struct FlowRow {
  int h;
  double zeta;
  double c;
  double z;
  double delta;
};
struct FlowResult {
  double beta;
  std::vector<FlowRow> rows;
  std::vector<FlowState> states;             // states[i] is the state on scale rows[i].h
  std::vector<Corrections> corrections;
  std::shared_ptr<const SecondOrderKernel> kernel;
};
// Smallest beta = 2^n with h_beta(beta) <= h_min.
double flow_beta(int h_min, const CutoffSpec& cut);
// Runs zeta, c from h = 0 down to max(h_min, floor); at U = 0 no kernel is evaluated.
FlowResult second_order_flow(double U, double beta, const LatticeSpec& spec, const CutoffSpec& cut, int h_min);

}  // namespace honeycomb
