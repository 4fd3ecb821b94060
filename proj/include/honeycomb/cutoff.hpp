#pragma once

#include "honeycomb/lattice.hpp"

#include <string>

namespace honeycomb {

// Smooth compact-support cutoff: chi0(t) = 1 for t <= a0, 0 for t >= a0*gamma.
struct CutoffSpec {
  double gamma = 2.0;
  double a0 = 0.4;
  std::string shape = "quintic";

  // 4 pi/3 - 4 pi/(3 sqrt3)
  static double separation_bound() { return 4 * kPi / 3 - 4 * kPi / (3 * kSqrt3); }
  bool valid() const { return gamma > 1 && a0 > 0 && 2 * a0 * gamma < separation_bound(); }
  // Throws std::invalid_argument naming the violated inequality.
  void validate() const;
};

double chi0(double t, const CutoffSpec& c);

// Euclidean norm of a 3-vector (k0, k) with the spatial part taken modulo the dual lattice.
double momentum_norm(double k0, const Vec2d& k);

// chi_h(k') = chi0(gamma^{-h} |k'|): cumulative cutoff at and below scale h.
double chi_h(double norm, int h, const CutoffSpec& c);
// f_h(k') = chi0(gamma^{-h}|k'|) - chi0(gamma^{-h+1}|k'|).
double slice_f_h(double norm, int h, const CutoffSpec& c);
double slice_f_h(double k0, const Vec2d& kprime, int h, const CutoffSpec& c);

struct UvIrSplit {
  double f_uv;
  double f_ir;
};
UvIrSplit split_uv_ir(const MomentumPoint& k, const CutoffSpec& c);
// The bump around p_F^omega alone.
double ir_bump(const MomentumPoint& k, int omega, const CutoffSpec& c);

// H_1 = chi0(|k0|); H_h = chi0(gamma^{-h+1}|k0|) - chi0(gamma^{-h+2}|k0|).
double uv_time_slice_H_h(double k0, int h, const CutoffSpec& c);
// Smallest h with H_1 + ... + H_h = 1 on every frequency of the 2M grid.
int h_M(double beta, int M, const CutoffSpec& c);

// Largest h with a0 gamma^{h-1} < pi zeta / beta.
int h_beta(double beta, double zeta, const CutoffSpec& c);

}  // namespace honeycomb
