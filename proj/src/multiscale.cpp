#include "honeycomb/multiscale.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>

namespace honeycomb {

namespace {
constexpr cplx I{0.0, 1.0};

Vec2d cell_vector(const LatticeSpec& spec, int n1, int n2) { return spec.cell_position(n1, n2); }

cplx phase(const MomentumPoint& k, const SpaceTimePoint& x, const LatticeSpec& spec, double sign) {
  return std::polar(1.0, sign * (k.k0 * x.x0 + k.k.dot(cell_vector(spec, x.n1, x.n2))));
}

// Largest |n0| bound with |k0| < R, as a half-open label range [-n, n).
int frequency_span(double beta, double R) {
  int n = 0;
  while (std::abs(matsubara(beta, n)) < R) ++n;
  return n;
}

}  // namespace

cplx free_remainder_t0(const MomentumPoint& kp, int omega) {
  const Vec2d k = kp.k + fermi_point(omega).p;
  const cplx v = complex_amplitude(k);
  const cplx linear = kFreeVelocity * cplx(-omega * kp.k(1), kp.k(0));
  return -std::conj(v) - linear;
}

Mat2c free_shifted_form(const MomentumPoint& kp, int omega) {
  return free_quadratic_form({kp.k0, kp.k + fermi_point(omega).p});
}

FlowState FlowState::initial() {
  FlowState f;
  f.t_fn = free_remainder_t0;
  return f;
}

Mat2c dressed_form(const MomentumPoint& kp, int omega, const FlowState& flow) {
  const double k1 = kp.k(0), k2 = kp.k(1);
  const cplx diag = -I * flow.zeta * kp.k0 + flow.s(kp, omega);
  const cplx t = flow.t(kp, omega);
  Mat2c A;
  A << diag, flow.c * cplx(-omega * k2, k1) + t, flow.c * cplx(-omega * k2, -k1) + std::conj(t), diag;
  return A;
}

Mat2c barred_form(const MomentumPoint& kp, int omega, const FlowState& flow, const Corrections& corr,
                  const CutoffSpec& cut) {
  const double chi = chi_h(momentum_norm(kp.k0, kp.k), flow.h, cut);
  const double k1 = kp.k(0), k2 = kp.k(1);
  const double zeta = flow.zeta + corr.z * chi;
  const double c = flow.c + corr.delta * chi;
  const cplx diag = -I * zeta * kp.k0 + flow.s(kp, omega) + chi * corr.sigma(kp, omega);
  const cplx t = flow.t(kp, omega) + chi * corr.tau(kp, omega);
  Mat2c A;
  A << diag, c * cplx(-omega * k2, k1) + t, c * cplx(-omega * k2, -k1) + std::conj(t), diag;
  return A;
}

FlowState flow_step(const FlowState& flow, const Corrections& corr) {
  FlowState next = flow;
  next.h = flow.h - 1;
  next.zeta = flow.zeta + corr.z;
  next.c = flow.c + corr.delta;
  if (corr.sigma_fn) {
    auto s = flow.s_fn;
    auto sig = corr.sigma_fn;
    next.s_fn = [s, sig](const MomentumPoint& k, int w) { return (s ? s(k, w) : cplx(0.0)) + sig(k, w); };
  }
  if (corr.tau_fn) {
    auto t = flow.t_fn;
    auto tau = corr.tau_fn;
    next.t_fn = [t, tau](const MomentumPoint& k, int w) { return (t ? t(k, w) : cplx(0.0)) + tau(k, w); };
  }
  next.e = corr.e;
  next.ebar = corr.ebar;
  next.F = flow.F + corr.e + corr.ebar;
  return next;
}

FormFn barred_form_fn(FlowState flow, Corrections corr, CutoffSpec cut) {
  return [flow = std::move(flow), corr = std::move(corr), cut = std::move(cut)](const MomentumPoint& k, int w) {
    return barred_form(k, w, flow, corr, cut);
  };
}

// ---------------------------------------------------------------------------------------------
// Single-scale propagator

SingleScalePropagator::SingleScalePropagator(int h, int omega, double beta, const LatticeSpec& spec,
                                             const CutoffSpec& cut, const FormFn& form, std::optional<int> floor)
    : h_(h), omega_(omega), floor_(floor.value_or(h_beta(beta, 1.0, cut))), beta_(beta), spec_(spec) {
  if (h > 0) throw std::invalid_argument("SingleScalePropagator: h <= 0 required");
  if (omega != 1 && omega != -1) throw std::invalid_argument("SingleScalePropagator: omega = +-1 required");
  if (h < floor_) return;
  const int L = spec.L;
  const double R = cut.a0 * std::pow(cut.gamma, h + 1);
  const Vec2d shift = -(double(L % 3) / L) * fermi_point(omega).p;
  // n = L B^{-1}(k' - shift); the rows of B^{-1} are a_i / 2pi.
  const int nmax = static_cast<int>(std::ceil(L * spec.a1.norm() / (2 * kPi) * (R + shift.norm()))) + 1;
  const int lo = -L / 2 + 1, hi = L / 2;
  const int nf = frequency_span(beta, R);
  for (int n1 = std::max(lo, -nmax); n1 <= std::min(hi, nmax); ++n1) {
    for (int n2 = std::max(lo, -nmax); n2 <= std::min(hi, nmax); ++n2) {
      const Vec2d kp = grid_momentum(spec, {n1, n2}) + shift;
      for (int n0 = -nf; n0 < nf; ++n0) {
        const MomentumPoint k{matsubara(beta, n0), kp};
        const double norm = momentum_norm(k.k0, k.k);
        const double w = (h == floor_) ? chi_h(norm, h, cut) : slice_f_h(norm, h, cut);
        if (w <= 0.0) continue;
        points_.push_back({k, {n1, n2}, w, w * form(k, omega).inverse()});
        n0_.push_back(n0);
      }
    }
  }
}

Mat2c SingleScalePropagator::operator()(const SpaceTimePoint& x) const {
  Mat2c sum = Mat2c::Zero();
  for (const auto& p : points_) sum += phase(p.kprime, x, spec_, -1.0) * p.propagator;
  return sum / (beta_ * spec_.cells());
}

Mat2c SingleScalePropagator::momentum(const GridIndex& index, int n0) const {
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (points_[i].index == index && n0_[i] == n0) return points_[i].propagator;
  return Mat2c::Zero();
}

cplx SingleScalePropagator::gram_A(const SpaceTimePoint& x) const {
  cplx sum = 0.0;
  for (const auto& p : points_) sum += phase(p.kprime, x, spec_, 1.0) * std::sqrt(p.weight);
  return sum / (beta_ * spec_.cells());
}

Mat2c SingleScalePropagator::gram_B(const SpaceTimePoint& x) const {
  Mat2c sum = Mat2c::Zero();
  for (const auto& p : points_) sum += phase(p.kprime, x, spec_, 1.0) * (p.propagator / std::sqrt(p.weight));
  return sum / (beta_ * spec_.cells());
}

double SingleScalePropagator::gram_norm_A_sq() const {
  double s = 0.0;
  for (const auto& p : points_) s += p.weight;
  return s / (beta_ * spec_.cells());
}

Eigen::Vector2d SingleScalePropagator::gram_norm_B_sq() const {
  Eigen::Vector2d s = Eigen::Vector2d::Zero();
  for (const auto& p : points_) s += p.propagator.colwise().squaredNorm().transpose() / p.weight;
  return s / (beta_ * spec_.cells());
}

int SingleScalePropagator::exact_time_nodes() const {
  int span = 1;
  for (int n0 : n0_) span = std::max(span, std::max(n0 + 1, -n0));
  return 2 * span;
}

// ---------------------------------------------------------------------------------------------
// Infrared and ultraviolet pieces on the unshifted grid

Mat2c infrared_propagator(const SpaceTimePoint& x, double beta, const LatticeSpec& spec, const CutoffSpec& cut) {
  const int L = spec.L;
  const int nf = frequency_span(beta, cut.a0 * cut.gamma);
  Mat2c sum = Mat2c::Zero();
  for (int m1 = 0; m1 < L; ++m1) {
    for (int m2 = 0; m2 < L; ++m2) {
      const Vec2d k = grid_momentum(spec, {m1, m2});
      for (int n0 = -nf; n0 < nf; ++n0) {
        const MomentumPoint p{matsubara(beta, n0), k};
        const double w = split_uv_ir(p, cut).f_ir;
        if (w <= 0.0) continue;
        sum += w * phase(p, x, spec, -1.0) * propagator_momentum(p);
      }
    }
  }
  return sum / (beta * spec.cells());
}

Mat2c ultraviolet_propagator(const SpaceTimePoint& x, double beta, const LatticeSpec& spec, int M,
                             const CutoffSpec& cut) {
  if (std::abs(matsubara(beta, -M)) <= cut.a0 * cut.gamma)
    throw std::invalid_argument("ultraviolet_propagator: 2M frequencies must cover the infrared support");
  // f_uv = 1 - f_ir and f_ir has compact support inside the frequency window, so the tail treatment
  // of the full sum carries over unchanged.
  return matsubara_truncated(x, beta, spec, M, TailTreatment::subtract_leading) -
         infrared_propagator(x, beta, spec, cut);
}

Mat2c telescoped_infrared(const SpaceTimePoint& x, double beta, const LatticeSpec& spec, const CutoffSpec& cut,
                          int h_min) {
  const int floor = std::max(h_min, h_beta(beta, 1.0, cut));
  Mat2c sum = Mat2c::Zero();
  for (int omega : {1, -1}) {
    const cplx ph = std::polar(1.0, -fermi_point(omega).p.dot(cell_vector(spec, x.n1, x.n2)));
    for (int h = 0; h >= floor; --h) {
      SingleScalePropagator g(h, omega, beta, spec, cut, free_shifted_form, floor);
      sum += ph * g(x);
    }
  }
  return sum;
}

UvSlice::UvSlice(int h, double beta, const LatticeSpec& spec, int M, const CutoffSpec& cut)
    : h_(h), beta_(beta), spec_(spec) {
  if (h < 1) throw std::invalid_argument("UvSlice: h >= 1 required");
  const int L = spec.L;
  for (int m1 = 0; m1 < L; ++m1) {
    for (int m2 = 0; m2 < L; ++m2) {
      const Vec2d k = grid_momentum(spec, {m1, m2});
      const cplx v = complex_amplitude(k);
      for (int n0 = -M; n0 < M; ++n0) {
        const MomentumPoint p{matsubara(beta, n0), k};
        const double w = split_uv_ir(p, cut).f_uv * uv_time_slice_H_h(p.k0, h, cut);
        if (w <= 0.0) continue;
        Mat2c num;
        num << I * p.k0, -std::conj(v), -v, I * p.k0;
        points_.push_back({p, n0, std::sqrt(w), p.k0 * p.k0 + std::norm(v), num});
        n0_span_ = std::max(n0_span_, std::max(n0 + 1, -n0));
      }
    }
  }
}

Mat2c UvSlice::operator()(const SpaceTimePoint& x) const {
  Mat2c sum = Mat2c::Zero();
  for (const auto& p : points_)
    sum += (p.root_weight * p.root_weight / p.denominator) * phase(p.k, x, spec_, -1.0) * p.numerator;
  return sum / (beta_ * spec_.cells());
}

cplx UvSlice::gram_A(const SpaceTimePoint& x) const {
  cplx sum = 0.0;
  for (const auto& p : points_) sum += (p.root_weight / p.denominator) * phase(p.k, x, spec_, 1.0);
  return sum / (beta_ * spec_.cells());
}

Mat2c UvSlice::gram_B(const SpaceTimePoint& x) const {
  Mat2c sum = Mat2c::Zero();
  for (const auto& p : points_) sum += p.root_weight * phase(p.k, x, spec_, 1.0) * p.numerator;
  return sum / (beta_ * spec_.cells());
}

double UvSlice::gram_norm_A_sq() const {
  double s = 0.0;
  for (const auto& p : points_) s += p.root_weight * p.root_weight / (p.denominator * p.denominator);
  return s / (beta_ * spec_.cells());
}

Eigen::Vector2d UvSlice::gram_norm_B_sq() const {
  Eigen::Vector2d s = Eigen::Vector2d::Zero();
  for (const auto& p : points_) s += p.root_weight * p.root_weight * p.numerator.colwise().squaredNorm().transpose();
  return s / (beta_ * spec_.cells());
}

int UvSlice::exact_time_nodes() const { return 2 * std::max(1, n0_span_); }

Mat2c ultraviolet_truncated(const SpaceTimePoint& x, double beta, const LatticeSpec& spec, int M,
                            const CutoffSpec& cut) {
  const int L = spec.L;
  Mat2c sum = Mat2c::Zero();
  for (int m1 = 0; m1 < L; ++m1) {
    for (int m2 = 0; m2 < L; ++m2) {
      const Vec2d k = grid_momentum(spec, {m1, m2});
      for (int n0 = -M; n0 < M; ++n0) {
        const MomentumPoint p{matsubara(beta, n0), k};
        const double w = split_uv_ir(p, cut).f_uv;
        if (w <= 0.0) continue;
        sum += w * phase(p, x, spec, -1.0) * propagator_momentum(p);
      }
    }
  }
  return sum / (beta * spec.cells());
}

// ---------------------------------------------------------------------------------------------
// Envelopes and Gram-Hadamard sampling

double torus_time_distance(double x0, double beta) {
  double r = std::fmod(x0, beta);
  if (r < 0) r += beta;
  return std::min(r, beta - r);
}

double torus_space_distance(int n1, int n2, const LatticeSpec& spec) {
  const int L = spec.L;
  const GridIndex w = wrap({n1, n2}, L);
  double best = std::numeric_limits<double>::infinity();
  for (int m1 = -1; m1 <= 0; ++m1)
    for (int m2 = -1; m2 <= 0; ++m2) best = std::min(best, cell_vector(spec, w.n1 + m1 * L, w.n2 + m2 * L).norm());
  return best;
}

double decay_envelope(const SingleScalePropagator& g, const std::vector<SpaceTimePoint>& samples, double gamma) {
  const int h = g.scale();
  const double gh = std::pow(gamma, h);
  double sup = 0.0;
  for (const auto& x : samples) {
    const double t = torus_time_distance(x.x0, g.beta());
    const double s = torus_space_distance(x.n1, x.n2, g.lattice());
    const double d = gh * std::sqrt(t * t + s * s);
    const double value = g(x).cwiseAbs().maxCoeff();
    sup = std::max(sup, value * (1.0 + d * d * d) / (gh * gh));
  }
  return sup;
}

GramHadamardReport gram_hadamard_check(const SingleScalePropagator& g, int samples, int max_size, unsigned seed) {
  if (g.empty()) throw std::invalid_argument("gram_hadamard_check: empty slice");
  std::mt19937 rng(seed);
  const double beta = g.beta();
  const int L = g.lattice().L;
  const double a = std::sqrt(g.gram_norm_A_sq());
  const Eigen::Vector2d b = g.gram_norm_B_sq().cwiseSqrt();
  std::uniform_real_distribution<double> time(0.0, beta);
  std::uniform_int_distribution<int> cell(0, L - 1), rho(0, 1), size(1, max_size);
  std::normal_distribution<double> gauss;
  GramHadamardReport rep;
  for (int s = 0; s < samples; ++s) {
    const int n = size(rng);
    const int clusters = 1 + static_cast<int>(rng() % n);
    std::vector<Eigen::VectorXd> u(clusters);
    for (auto& v : u) {
      v = Eigen::VectorXd(clusters);
      for (int i = 0; i < clusters; ++i) v(i) = gauss(rng);
      v.normalize();
    }
    std::vector<SpaceTimePoint> xs(n), ys(n);
    std::vector<int> rx(n), ry(n), cx(n), cy(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = {time(rng), cell(rng), cell(rng)};
      ys[i] = {time(rng), cell(rng), cell(rng)};
      rx[i] = rho(rng);
      ry[i] = rho(rng);
      cx[i] = static_cast<int>(rng() % clusters);
      cy[i] = static_cast<int>(rng() % clusters);
    }
    Eigen::MatrixXcd G(n, n);
    double had = 1.0;
    for (int i = 0; i < n; ++i) {
      had *= a * b(ry[i]);
      for (int j = 0; j < n; ++j) {
        const SpaceTimePoint d{xs[i].x0 - ys[j].x0, xs[i].n1 - ys[j].n1, xs[i].n2 - ys[j].n2};
        G(i, j) = u[cx[i]].dot(u[cy[j]]) * g(d)(rx[i], ry[j]);
      }
    }
    const double det = std::abs(G.determinant());
    rep.samples.push_back({det, had});
    // Relative slack for rounding in the determinant.
    if (det > had * (1.0 + 1e-10)) ++rep.violations;
    rep.max_ratio = std::max(rep.max_ratio, det / had);
  }
  return rep;
}

}  // namespace honeycomb
