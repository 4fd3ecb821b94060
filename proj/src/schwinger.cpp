#include "honeycomb/schwinger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace honeycomb {

namespace {
constexpr cplx I{0.0, 1.0};

double op_norm(const Mat2c& m) { return Eigen::JacobiSVD<Mat2c>(m).singularValues()(0); }

// Squared distance of k to p_F^omega modulo the dual lattice, in units of (2pi/(3L))^2 when k sits
// on the grid D_L (exact integers); empty otherwise.
std::optional<long long> exact_distance_sq(const Vec2d& k, int omega, const LatticeSpec& spec) {
  const int L = spec.L;
  const double c1 = spec.a1.dot(k) * L / (2 * kPi), c2 = spec.a2.dot(k) * L / (2 * kPi);
  const long long m1 = std::llround(c1), m2 = std::llround(c2);
  if (std::abs(c1 - m1) > 1e-9 || std::abs(c2 - m2) > 1e-9) return std::nullopt;
  // p_F^+ = (2 b1 + b2)/3, p_F^- = (b1 + 2 b2)/3; coordinates in units of b_i / (3L).
  const long long u1 = 3 * m1 - (omega > 0 ? 2 * L : L), u2 = 3 * m2 - (omega > 0 ? L : 2 * L);
  long long best = std::numeric_limits<long long>::max();
  for (long long s1 = -2; s1 <= 2; ++s1) {
    for (long long s2 = -2; s2 <= 2; ++s2) {
      const long long v1 = (u1 % (3LL * L)) + s1 * 3 * L, v2 = (u2 % (3LL * L)) + s2 * 3 * L;
      // |v1 b1 + v2 b2|^2 = (2pi/3)^2 ((v1 + v2)^2 + 3 (v1 - v2)^2)
      best = std::min(best, (v1 + v2) * (v1 + v2) + 3 * (v1 - v2) * (v1 - v2));
    }
  }
  return best;
}

// Indicator of the nearer Fermi point, one half at ties.
double nearer_fermi_weight(const Vec2d& k, int omega, const LatticeSpec& spec) {
  const auto a = exact_distance_sq(k, omega, spec), b = exact_distance_sq(k, -omega, spec);
  if (a && b) return *a < *b ? 1.0 : (*a == *b ? 0.5 : 0.0);
  const double da = norm_mod_dual(k - fermi_point(omega).p), db = norm_mod_dual(k - fermi_point(-omega).p);
  return da < db ? 1.0 : (da == db ? 0.5 : 0.0);
}

double scale_weight(int h, int floor, const MomentumPoint& kp, const CutoffSpec& cut) {
  const double norm = momentum_norm(kp.k0, kp.k);
  return h == floor ? chi_h(norm, h, cut) : slice_f_h(norm, h, cut);
}

}  // namespace

TwoPointAssembly::TwoPointAssembly(FlowResult flow) : flow_(std::move(flow)), floor_(flow_.kernel->floor()) {
  if (flow_.rows.empty() || flow_.rows.back().h != floor_)
    throw std::invalid_argument("TwoPointAssembly: the flow must reach h_beta = " + std::to_string(floor_));
}

Mat2c TwoPointAssembly::single_scale(int h, const MomentumPoint& kp, int omega) const {
  const auto& cut = flow_.kernel->cutoff();
  if (h == 1) {
    const MomentumPoint k{kp.k0, kp.k + fermi_point(omega).p};
    const double w = split_uv_ir(k, cut).f_uv * nearer_fermi_weight(k.k, omega, flow_.kernel->lattice());
    return w == 0.0 ? Mat2c::Zero() : Mat2c(w * propagator_momentum(k));
  }
  if (h > 1 || h < floor_) return Mat2c::Zero();
  const double w = scale_weight(h, floor_, kp, cut);
  if (w == 0.0) return Mat2c::Zero();
  const int i = -h;
  return w * barred_form(kp, omega, flow_.states[i], flow_.corrections[i], cut).inverse();
}

Mat2c TwoPointAssembly::kernel(int h, const MomentumPoint& kp, int omega) const {
  if (flow_.kernel->U() == 0.0) return Mat2c::Zero();
  return flow_.kernel->scale(h, {kp.k0, kp.k + fermi_point(omega).p});
}

int TwoPointAssembly::lowest_scale(const MomentumPoint& kp, int omega) const {
  const auto& cut = flow_.kernel->cutoff();
  for (int h = floor_; h <= 0; ++h)
    if (scale_weight(h, floor_, kp, cut) > 0.0) return h;
  return single_scale(1, kp, omega).isZero(0.0) ? 2 : 1;
}

TwoPointAssembly::Factors TwoPointAssembly::factors(const MomentumPoint& kp, int omega,
                                                    std::optional<int> down_to) const {
  const int lo = std::max(down_to.value_or(floor_), floor_);
  Factors f;
  f.Q.push_back(Mat2c::Identity());
  f.G.push_back(single_scale(1, kp, omega));
  for (int h = 0; h >= lo; --h) {
    const Mat2c& Gp = f.G.back();
    Mat2c Q = f.Q.back();
    if (!Gp.isZero(0.0)) Q -= kernel(h, kp, omega) * Gp;
    f.Q.push_back(Q);
    f.G.push_back(Gp + single_scale(h, kp, omega) * Q);
  }
  return f;
}

Mat2c TwoPointAssembly::quasi_particle(const MomentumPoint& kp, int omega) const {
  const int hk = lowest_scale(kp, omega);
  if (hk > 1) return Mat2c::Zero();
  const auto f = factors(kp, omega, hk);
  Mat2c S = Mat2c::Zero();
  for (int j = hk; j <= std::min(hk + 1, 1); ++j) {
    S += f.q(j) * single_scale(j, kp, omega) * f.q(j);
    if (j - 1 >= floor_) S -= f.g(j) * kernel(j - 1, kp, omega) * f.g(j);
  }
  return S;
}

Mat2c TwoPointAssembly::two_point(const MomentumPoint& k) const {
  const auto& cut = flow_.kernel->cutoff();
  for (int omega : {1, -1}) {
    if (ir_bump(k, omega, cut) > 0.0)
      return quasi_particle({k.k0, reduce_mod_dual(k.k - fermi_point(omega).p)}, omega);
  }
  const Mat2c g = propagator_momentum(k);
  if (flow_.kernel->U() == 0.0) return g;
  return g - g * flow_.kernel->scale(0, k) * g;
}

// ---------------------------------------------------------------------------------------------

DiracFit dirac_fit(const std::vector<DiracSample>& samples, int omega, double theta_min, double poor_fit_threshold) {
  double wz = 0, z = 0, wv = 0, zv = 0;
  std::vector<double> zi, vi, wzi, wvi;
  for (const auto& s : samples) {
    const auto& k = s.kprime;
    const double w = 1.0 / std::hypot(k.k0, k.k.norm());
    const Mat2c inv = s.S.inverse();
    const double Zs = (0.5 * I * (inv(0, 0) + inv(1, 1)) / k.k0).real();
    zi.push_back(Zs);
    wzi.push_back(w);
    wz += w;
    z += w * Zs;
    const cplx d(-omega * k.k(1), k.k(0));  // i k1' - omega k2'
    if (std::abs(d) > 0.0) {
      const double ZvF = 0.5 * (inv(0, 1) / d + inv(1, 0) / std::conj(-d) * -1.0).real();
      vi.push_back(ZvF / Zs);
      wvi.push_back(w);
      wv += w;
      zv += w * ZvF;
    }
  }
  DiracFit fit;
  if (wz == 0.0 || wv == 0.0) throw std::invalid_argument("dirac_fit: need samples with k0 != 0 and k' != 0");
  fit.Z = z / wz;
  fit.vF = zv / wv / fit.Z;
  auto spread = [](const std::vector<double>& x, const std::vector<double>& w, double mean) {
    double s = 0, sw = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      s += w[i] * (x[i] - mean) * (x[i] - mean);
      sw += w[i];
    }
    return std::sqrt(s / sw);
  };
  fit.Z_error = spread(zi, wzi, fit.Z);
  fit.vF_error = spread(vi, wvi, fit.vF);

  std::vector<double> lx, ly;
  for (const auto& s : samples) {
    const auto& k = s.kprime;
    const cplx d(-omega * k.k(1), k.k(0));
    Mat2c form;
    form << -I * k.k0, fit.vF * d, fit.vF * cplx(-omega * k.k(1), -k.k(0)), -I * k.k0;
    const double r = op_norm(fit.Z * form * s.S - Mat2c::Identity());
    const double kn = std::hypot(k.k0, k.k.norm());
    fit.residual_norm.push_back({kn, r});
    fit.max_residual = std::max(fit.max_residual, r);
    if (kn >= theta_min && r > 0.0) {
      lx.push_back(std::log(kn));
      ly.push_back(std::log(r));
    }
  }
  fit.theta_fit = lx.size() >= 2 ? fit_linear(lx, ly).slope : std::numeric_limits<double>::quiet_NaN();
  fit.poor_fit = fit.max_residual > poor_fit_threshold;
  return fit;
}

std::vector<MomentumPoint> dirac_ray(double beta, const Vec2d& direction, double t_min, double t_max, int count) {
  std::vector<MomentumPoint> out;
  const Vec2d e = direction.normalized();
  for (int i = 0; i < count; ++i) {
    const double t = t_max * std::pow(t_min / t_max, count > 1 ? double(i) / (count - 1) : 0.0);
    out.push_back({kPi / beta, t * e});
  }
  return out;
}

QBound q_bound(const TwoPointAssembly& a, const std::vector<int>& hs, int samples_per_scale, double theta) {
  QBound qb;
  qb.theta = theta;
  const auto& cut = a.flow().kernel->cutoff();
  const double beta = a.flow().kernel->beta();
  const double U = std::abs(a.flow().kernel->U());
  for (int h : hs) {
    // overlap of the supports of g^(h) and g^(h+1), where Q^(h) differs from 1
    const double r = cut.a0 * std::pow(cut.gamma, h + 0.5);
    int n = std::max(0, static_cast<int>(std::floor((0.6 * r * beta / kPi - 1) / 2)));
    const double k0 = matsubara(beta, n);
    const double s = std::sqrt(std::max(r * r - k0 * k0, 0.0));
    double dev = 0.0;
    for (int j = 0; j < samples_per_scale; ++j) {
      const double phi = 0.3 + 2 * kPi * j / samples_per_scale;
      const MomentumPoint kp{k0, s * Vec2d(std::cos(phi), std::sin(phi))};
      if (a.single_scale(h, kp, 1).isZero(0.0)) continue;
      const auto f = a.factors(kp, 1, h);
      dev = std::max(dev, op_norm(f.q(h) - Mat2c::Identity()));
    }
    qb.scales.push_back(h);
    qb.max_deviation.push_back(dev);
    if (U > 0) qb.C = std::max(qb.C, dev / (U * std::pow(cut.gamma, theta * h)));
  }
  return qb;
}

// ---------------------------------------------------------------------------------------------

double site_distance(int n1, int n2, int rho, const LatticeSpec& spec) {
  const int L = spec.L;
  double best = std::numeric_limits<double>::infinity();
  for (int s1 = -1; s1 <= 1; ++s1)
    for (int s2 = -1; s2 <= 1; ++s2)
      best = std::min(best, (spec.cell_position(n1 + s1 * L, n2 + s2 * L) + rho * spec.d1).norm());
  return best;
}

SpinSpinProfile spin_spin_free(double beta, const LatticeSpec& spec, double r_min, double r_max, int bins) {
  SpinSpinProfile prof;
  const int L = spec.L;
  for (int n1 = 0; n1 < L; ++n1) {
    for (int n2 = 0; n2 < L; ++n2) {
      const Mat2c g = propagator_position({0.0, n1, n2, TimeSide::left}, beta, spec);
      for (int rho = 0; rho < 2; ++rho) {
        const double G = std::abs(g(rho, 0));
        if (n1 == 0 && n2 == 0 && rho == 0) {
          // 3/4 <(n_up - n_dn)^2> with the local densities from the equal-time diagonal
          const double n = 1.0 - std::abs(g(0, 0));
          prof.on_site = 0.75 * (2 * n - 2 * n * n);
          continue;
        }
        prof.points.push_back({n1, n2, rho, site_distance(n1, n2, rho, spec), -1.5 * G * G});
      }
    }
  }
  const double lr = std::log(r_min), step = (std::log(r_max) - lr) / bins;
  std::vector<double> lx, ly;
  for (int b = 0; b < bins; ++b) {
    const double lo = std::exp(lr + b * step), hi = std::exp(lr + (b + 1) * step);
    double best = 0.0, at = 0.0;
    for (const auto& p : prof.points)
      if (p.distance >= lo && p.distance < hi && std::abs(p.value) > best) {
        best = std::abs(p.value);
        at = p.distance;
      }
    if (best > 0.0) {
      prof.envelope.push_back({at, best});
      lx.push_back(std::log(at));
      ly.push_back(std::log(best));
    }
  }
  if (lx.size() >= 2) prof.slope = fit_linear(lx, ly).slope;
  return prof;
}

}  // namespace honeycomb
