#include "honeycomb/cutoff.hpp"

#include <sstream>
#include <stdexcept>

namespace honeycomb {

void CutoffSpec::validate() const {
  std::ostringstream msg;
  if (!(gamma > 1)) msg << "gamma > 1 violated (gamma=" << gamma << ")";
  else if (!(a0 > 0)) msg << "a0 > 0 violated (a0=" << a0 << ")";
  else if (!(2 * a0 * gamma < separation_bound()))
    msg << "2*a0*gamma < 4pi/3 - 4pi/(3*sqrt3) = " << separation_bound() << " violated (2*a0*gamma=" << 2 * a0 * gamma
        << ")";
  else if (shape != "quintic") msg << "unknown cutoff shape '" << shape << "'";
  else return;
  throw std::invalid_argument(msg.str());
}

double chi0(double t, const CutoffSpec& c) {
  if (t <= c.a0) return 1.0;
  const double top = c.a0 * c.gamma;
  if (t >= top) return 0.0;
  const double s = (t - c.a0) / (top - c.a0);
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double momentum_norm(double k0, const Vec2d& k) {
  const double r = norm_mod_dual(k);
  return std::sqrt(k0 * k0 + r * r);
}

double chi_h(double norm, int h, const CutoffSpec& c) { return chi0(std::pow(c.gamma, -h) * norm, c); }

double slice_f_h(double norm, int h, const CutoffSpec& c) {
  return chi0(std::pow(c.gamma, -h) * norm, c) - chi0(std::pow(c.gamma, -h + 1) * norm, c);
}

double slice_f_h(double k0, const Vec2d& kprime, int h, const CutoffSpec& c) {
  return slice_f_h(momentum_norm(k0, kprime), h, c);
}

double ir_bump(const MomentumPoint& k, int omega, const CutoffSpec& c) {
  return chi0(momentum_norm(k.k0, k.k - fermi_point(omega).p), c);
}

UvIrSplit split_uv_ir(const MomentumPoint& k, const CutoffSpec& c) {
  const double ir = ir_bump(k, +1, c) + ir_bump(k, -1, c);
  return {1.0 - ir, ir};
}

double uv_time_slice_H_h(double k0, int h, const CutoffSpec& c) {
  if (h < 1) throw std::invalid_argument("uv_time_slice_H_h: h >= 1 required");
  const double a = std::abs(k0);
  if (h == 1) return chi0(a, c);
  return chi0(std::pow(c.gamma, -h + 1) * a, c) - chi0(std::pow(c.gamma, -h + 2) * a, c);
}

int h_M(double beta, int M, const CutoffSpec& c) {
  // The telescoped sum up to h equals chi0(gamma^{-h+1}|k0|); it is 1 once a0 gamma^{h-1} >= max|k0|.
  const double kmax = std::abs(matsubara(beta, -M));
  int h = 1;
  while (c.a0 * std::pow(c.gamma, h - 1) < kmax) ++h;
  return h;
}

int h_beta(double beta, double zeta, const CutoffSpec& c) {
  if (!(beta > 0) || !(zeta > 0)) throw std::invalid_argument("h_beta: beta > 0 and zeta > 0 required");
  const double target = kPi * zeta / beta;
  // gamma^{h-1} < target/a0  <=>  h < 1 + log_gamma(target/a0)
  int h = static_cast<int>(std::floor(1.0 + std::log(target / c.a0) / std::log(c.gamma)));
  while (c.a0 * std::pow(c.gamma, h - 1) >= target) --h;
  while (c.a0 * std::pow(c.gamma, h) < target) ++h;
  return h;
}

}  // namespace honeycomb
