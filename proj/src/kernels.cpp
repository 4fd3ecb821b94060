#include "honeycomb/kernels.hpp"

#include "honeycomb/parallel.hpp"
#include "honeycomb/quadrature.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <stdexcept>

namespace honeycomb {

namespace {
constexpr cplx I{0.0, 1.0};

double log_cosh(double a) {
  a = std::abs(a);
  return a + std::log1p(std::exp(-2 * a)) - std::log(2.0);
}

// log(sinh(x) / x)
double log_sinhc(double x) {
  x = std::abs(x);
  if (x < 1e-4) return x * x / 6;
  return x + std::log1p(-std::exp(-2 * x)) - std::log(2.0) - std::log(x);
}

struct Level {
  double e;
  double n;
  Mat2c P;
};

// Both bands at every label of D_L + offset.
struct BandTable {
  int L = 0;
  std::vector<std::array<Level, 2>> levels;
  std::vector<cplx> v;

  BandTable(const LatticeSpec& spec, double beta, const Vec2d& offset) : L(spec.L) {
    levels.resize(spec.cells());
    v.resize(spec.cells());
    for (int m1 = 0; m1 < L; ++m1) {
      for (int m2 = 0; m2 < L; ++m2) {
        const Vec2d k = grid_momentum(spec, {m1, m2}) + offset;
        const auto b = bands(k);
        auto& l = levels[m1 * L + m2];
        for (int j = 0; j < 2; ++j) l[j] = {b.energy[j], fermi(b.energy[j], beta), b.projector[j]};
        v[m1 * L + m2] = complex_amplitude(k);
      }
    }
  }
  int label(int m1, int m2) const { return ((m1 % L + L) % L) * L + ((m2 % L + L) % L); }
  Mat2c propagator(int idx, double k0) const {
    const cplx vv = v[idx];
    Mat2c g;
    g << I * k0, -std::conj(vv), -vv, I * k0;
    return g / (k0 * k0 + std::norm(vv));
  }
};

Mat2c hadamard3(const Mat2c& a, const Mat2c& b, const Mat2c& c) {
  return a.cwiseProduct(b).cwiseProduct(c.transpose());
}

// Frequency sums of one pair of levels; P0 is a bosonic frequency (exact zero allowed).
cplx ph_level(double e, double n, double ep, double np, double P0, double beta) {
  if (P0 == 0.0) return fermi_divided_difference(e, ep, beta);
  return -(np - n) / cplx(e - ep, P0);
}

cplx pp_level(double e1, double n1, double e2, double n2, double P0, double beta) {
  if (P0 == 0.0) return -fermi_divided_difference(e1, -e2, beta);
  return (1.0 - n1 - n2) / cplx(e1 + e2, -P0);
}

// Snaps a difference of fermionic frequencies to the bosonic lattice.
double bosonic(double P0, double beta) {
  const double step = 2 * kPi / beta;
  return step * std::round(P0 / step);
}

// Particle-hole bubble with q on table A and q + P on table B (B's label = A's label + shift).
Mat2c bubble_ph_tables(const BandTable& A, const BandTable& B, int s1, int s2, double P0, double beta) {
  const int L = A.L;
  Mat2c sum = Mat2c::Zero();
  for (int m1 = 0; m1 < L; ++m1) {
    for (int m2 = 0; m2 < L; ++m2) {
      const auto& a = A.levels[m1 * L + m2];
      const auto& b = B.levels[B.label(m1 + s1, m2 + s2)];
      for (const auto& la : a)
        for (const auto& lb : b)
          sum += ph_level(la.e, la.n, lb.e, lb.n, P0, beta) * la.P.cwiseProduct(lb.P.transpose());
    }
  }
  return sum / static_cast<double>(A.L * A.L);
}

// Particle-particle bubble with p on table A and P - p on table B (label s - m).
Mat2c bubble_pp_tables(const BandTable& A, const BandTable& B, int s1, int s2, double P0, double beta) {
  const int L = A.L;
  Mat2c sum = Mat2c::Zero();
  for (int m1 = 0; m1 < L; ++m1) {
    for (int m2 = 0; m2 < L; ++m2) {
      const auto& a = A.levels[m1 * L + m2];
      const auto& b = B.levels[B.label(s1 - m1, s2 - m2)];
      for (const auto& la : a)
        for (const auto& lb : b) sum += pp_level(la.e, la.n, lb.e, lb.n, P0, beta) * la.P.cwiseProduct(lb.P);
    }
  }
  return sum / static_cast<double>(A.L * A.L);
}

// Writes P (spatial) as grid label + remainder; the remainder is the table offset.
struct SplitMomentum {
  int m1, m2;
  Vec2d rest;
};
SplitMomentum split(const Vec2d& P, const LatticeSpec& spec) {
  // Coordinates in units of b_i / L: the rows of B^{-1} are a_i / 2pi.
  const double c1 = spec.a1.dot(P) * spec.L / (2 * kPi), c2 = spec.a2.dot(P) * spec.L / (2 * kPi);
  const int m1 = static_cast<int>(std::round(c1)), m2 = static_cast<int>(std::round(c2));
  return {m1, m2, P - grid_momentum(spec, {m1, m2})};
}

// Points of D_L + offset with chi_h(p - p_F^omega) > 0 for some omega.
struct LowPoint {
  int label;
  double k0;
  Mat2c s;       // chi_h g
  double chi;
};

std::vector<LowPoint> low_support(int h, double beta, const BandTable& T, const LatticeSpec& spec,
                                  const CutoffSpec& cut, const Vec2d& offset) {
  std::vector<LowPoint> out;
  const double R = cut.a0 * std::pow(cut.gamma, h + 1);
  const int L = spec.L;
  for (int m1 = 0; m1 < L; ++m1) {
    for (int m2 = 0; m2 < L; ++m2) {
      const Vec2d k = grid_momentum(spec, {m1, m2}) + offset;
      for (int omega : {1, -1}) {
        const Vec2d kp = k - fermi_point(omega).p;
        const double d = norm_mod_dual(kp);
        if (d >= R) continue;
        for (int n0 = 0;; ++n0) {
          const double k0 = matsubara(beta, n0);
          if (k0 * k0 + d * d >= R * R) break;
          for (double f0 : {k0, -k0}) {
            const double chi = chi_h(momentum_norm(f0, kp), h, cut);
            if (chi <= 0.0) continue;
            out.push_back({m1 * L + m2, f0, chi * T.propagator(m1 * L + m2, f0), chi});
          }
        }
      }
    }
  }
  return out;
}

// g(tau, x) for every cell x at fixed tau in (-beta, beta): index n1 * L + n2.
std::vector<Mat2c> position_slice(double tau, double beta, const LatticeSpec& spec, const std::vector<Vec2d>& ks,
                                  const std::vector<BandDecomposition>& bk) {
  const int L = spec.L;
  std::vector<Mat2c> out(spec.cells(), Mat2c::Zero());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const auto& b = bk[i];
    double w[2];
    for (int j = 0; j < 2; ++j) {
      // tau in (0, beta) or (-beta, 0)
      w[j] = tau > 0 ? band_kernel_positive(b.energy[j], tau, beta) : -band_kernel_positive(b.energy[j], tau + beta, beta);
    }
    const Mat2c gk = w[0] * b.projector[0] + w[1] * b.projector[1];
    for (int n1 = 0; n1 < L; ++n1)
      for (int n2 = 0; n2 < L; ++n2)
        out[n1 * L + n2] += std::polar(1.0, -ks[i].dot(spec.cell_position(n1, n2))) * gk;
  }
  for (auto& m : out) m /= static_cast<double>(spec.cells());
  return out;
}

struct LowTerm {
  MomentumPoint p;
  Mat2c s;
};

Mat2c sunset_position_impl(const MomentumPoint& k, double beta, const LatticeSpec& spec, double U, int panels,
                           int order, const std::vector<LowTerm>& low) {
  const int L = spec.L;
  std::vector<Vec2d> ks;
  std::vector<BandDecomposition> bk;
  for (int m1 = 0; m1 < L; ++m1)
    for (int m2 = 0; m2 < L; ++m2) {
      ks.push_back(grid_momentum(spec, {m1, m2}));
      bk.push_back(bands(ks.back()));
    }
  const double norm = beta * spec.cells();
  // g_{>h}(tau, x) = g(tau, x) - (beta |Lambda|)^{-1} sum_low e^{-i p x} s(p)
  auto slice = [&](double tau) {
    auto g = position_slice(tau, beta, spec, ks, bk);
    for (const auto& t : low)
      for (int n1 = 0; n1 < L; ++n1)
        for (int n2 = 0; n2 < L; ++n2)
          g[n1 * L + n2] -= std::polar(1.0, -(t.p.k0 * tau + t.p.k.dot(spec.cell_position(n1, n2)))) * t.s / norm;
    return g;
  };
  const auto rule = composite_gauss_legendre(order, panels, 0.0, beta);
  Mat2c sum = Mat2c::Zero();
  for (int i = 0; i < rule.nodes.size(); ++i) {
    const double tau = rule.nodes(i);
    const auto gp = slice(tau);
    const auto gm = slice(-tau);
    for (int n1 = 0; n1 < L; ++n1) {
      for (int n2 = 0; n2 < L; ++n2) {
        const int mi = ((L - n1) % L) * L + (L - n2) % L;
        const cplx ph = std::polar(1.0, k.k0 * tau + k.k.dot(spec.cell_position(n1, n2)));
        sum += rule.weights(i) * ph * hadamard3(gp[n1 * L + n2], gp[n1 * L + n2], gm[mi]);
      }
    }
  }
  return U * U * sum;
}

}  // namespace

double fermi(double eps, double beta) { return 0.5 * (1.0 - std::tanh(0.5 * beta * eps)); }

double fermi_divided_difference(double e1, double e2, double beta) {
  const double a = 0.5 * beta * e1, b = 0.5 * beta * e2;
  return -0.25 * beta * std::exp(log_sinhc(a - b) - log_cosh(a) - log_cosh(b));
}

Mat2c bubble_ph(const MomentumPoint& P, double beta, const LatticeSpec& spec) {
  const BandTable A(spec, beta, Vec2d::Zero());
  const auto sp = split(P.k, spec);
  const BandTable B(spec, beta, sp.rest);
  return bubble_ph_tables(A, B, sp.m1, sp.m2, bosonic(P.k0, beta), beta);
}

Mat2c bubble_pp(const MomentumPoint& P, double beta, const LatticeSpec& spec) {
  const BandTable A(spec, beta, Vec2d::Zero());
  const auto sp = split(P.k, spec);
  const BandTable B(spec, beta, sp.rest);
  return bubble_pp_tables(A, B, sp.m1, sp.m2, bosonic(P.k0, beta), beta);
}

std::vector<Mat2c> sunset_spectral(const Vec2d& k, const std::vector<double>& k0s, double beta,
                                   const LatticeSpec& spec, double U) {
  const int L = spec.L;
  const BandTable G(spec, beta, Vec2d::Zero());
  const BandTable R(spec, beta, -k);
  std::vector<Mat2c> out(k0s.size(), Mat2c::Zero());
  for (int p = 0; p < spec.cells(); ++p) {
    for (int q = 0; q < spec.cells(); ++q) {
      const int r = R.label(p / L + q / L, p % L + q % L);
      for (const auto& l1 : G.levels[p]) {
        for (const auto& l2 : G.levels[q]) {
          const Mat2c m12 = l1.P.cwiseProduct(l2.P);
          for (const auto& l3 : R.levels[r]) {
            const double num = (1 - l1.n) * (1 - l2.n) * l3.n + l1.n * l2.n * (1 - l3.n);
            if (num == 0.0) continue;
            const double E = l1.e + l2.e - l3.e;
            const Mat2c m = m12.cwiseProduct(l3.P.transpose());
            for (std::size_t j = 0; j < k0s.size(); ++j) out[j] -= (num / cplx(E, -k0s[j])) * m;
          }
        }
      }
    }
  }
  const double scale = U * U / (static_cast<double>(spec.cells()) * spec.cells());
  for (auto& m : out) m *= scale;
  return out;
}

Mat2c sunset_spectral(const MomentumPoint& k, double beta, const LatticeSpec& spec, double U) {
  return sunset_spectral(k.k, std::vector<double>{k.k0}, beta, spec, U)[0];
}

Mat2c sunset_position(const MomentumPoint& k, double beta, const LatticeSpec& spec, double U, int panels,
                      int order) {
  return sunset_position_impl(k, beta, spec, U, panels, order, {});
}

Mat2c sunset_above_position(int h, const MomentumPoint& k, double beta, const LatticeSpec& spec,
                            const CutoffSpec& cut, double U, int panels, int order) {
  std::vector<LowTerm> low;
  if (h >= h_beta(beta, 1.0, cut)) {
    const BandTable T(spec, beta, Vec2d::Zero());
    for (const auto& p : low_support(h, beta, T, spec, cut, Vec2d::Zero()))
      low.push_back({{p.k0, grid_momentum(spec, {p.label / spec.L, p.label % spec.L})}, p.s});
  }
  return sunset_position_impl(k, beta, spec, U, panels, order, low);
}

// ---------------------------------------------------------------------------------------------

SecondOrderKernel::SecondOrderKernel(double U, double beta, const LatticeSpec& spec, const CutoffSpec& cut)
    : U_(U), beta_(beta), spec_(spec), cut_(cut), floor_(h_beta(beta, 1.0, cut)) {
  cut.validate();
}

Mat2c SecondOrderKernel::total(const MomentumPoint& k) const { return above(floor_ - 1, k); }

Mat2c SecondOrderKernel::above(int h, const MomentumPoint& k) const {
  if (U_ == 0.0) return Mat2c::Zero();
  h = std::max(h, floor_ - 1);
  const auto key = std::make_tuple(h, k.k0, k.k(0), k.k(1));
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  const Mat2c w = above_uncached(h, k);
  std::lock_guard<std::mutex> lock(mutex_);
  cache_.emplace(key, w);
  return w;
}

Mat2c SecondOrderKernel::scale(int h, const MomentumPoint& k) const {
  if (h > 0 || h < floor_) return Mat2c::Zero();
  if (h == 0) return above(0, k);
  return above(h, k) - above(h + 1, k);
}

// sunset[g - s] = S[ggg] - 2 S[sgg] - S[ggs] + 2 S[sgs] + S[ss(g - s)], S[abc] = sum a(p) b(q) c(p+q-k)^T.
Mat2c SecondOrderKernel::above_uncached(int h, const MomentumPoint& k) const {
  const Mat2c full = sunset_spectral(k, beta_, spec_, U_);
  if (h < floor_ || U_ == 0.0) return full;
  const int L = spec_.L;
  const BandTable G(spec_, beta_, Vec2d::Zero());
  const BandTable R(spec_, beta_, -k.k);  // labels of D_L - k
  const auto low = low_support(h, beta_, G, spec_, cut_, Vec2d::Zero());
  const auto low_r = low_support(h, beta_, R, spec_, cut_, -k.k);
  if (low.empty() && low_r.empty()) return full;
  const double norm = beta_ * spec_.cells();

  Mat2c sgg = Mat2c::Zero();  // sum_p s(p) o Pi_ph(p - k); q + p - k lies in D_L - k
  for (const auto& p : low) {
    const double P0 = bosonic(p.k0 - k.k0, beta_);
    sgg += p.s.cwiseProduct(bubble_ph_tables(G, R, p.label / L, p.label % L, P0, beta_));
  }
  Mat2c ggs = Mat2c::Zero();  // sum_r s(r)^T o Pi_pp(r + k); r + k is on D_L with the same label
  for (const auto& r : low_r) {
    const double P0 = bosonic(r.k0 + k.k0, beta_);
    ggs += r.s.transpose().cwiseProduct(bubble_pp_tables(G, G, r.label / L, r.label % L, P0, beta_));
  }
  Mat2c sgs = Mat2c::Zero();  // q = r + k - p on D_L
  for (const auto& p : low) {
    for (const auto& r : low_r) {
      const int q = G.label(r.label / L - p.label / L, r.label % L - p.label % L);
      sgs += hadamard3(p.s, G.propagator(q, r.k0 + k.k0 - p.k0), r.s);
    }
  }
  // Spatial distances of D_L - k to both Fermi points.
  const double radius = cut_.a0 * std::pow(cut_.gamma, h + 1);
  std::vector<double> dist[2];
  for (int i = 0; i < 2; ++i) {
    dist[i].resize(spec_.cells());
    for (int r = 0; r < spec_.cells(); ++r)
      dist[i][r] = norm_mod_dual(grid_momentum(spec_, {r / L, r % L}) - k.k - fermi_point(i == 0 ? 1 : -1).p);
  }
  Mat2c ssg = Mat2c::Zero();  // r = p + q - k on D_L - k, weighted by 1 - chi_h(r)
  for (const auto& p : low) {
    for (const auto& q : low) {
      const int r = R.label(p.label / L + q.label / L, p.label % L + q.label % L);
      const double r0 = p.k0 + q.k0 - k.k0;
      double w = 1.0;
      for (const auto& d : dist)
        if (d[r] < radius) w -= chi_h(std::sqrt(r0 * r0 + d[r] * d[r]), h, cut_);
      if (w == 0.0) continue;
      ssg += w * hadamard3(p.s, q.s, R.propagator(r, r0));
    }
  }
  const double u2 = U_ * U_;
  return full + u2 * ((-2.0 * sgg - ggs) / norm + (2.0 * sgs + ssg) / (norm * norm));
}

// ---------------------------------------------------------------------------------------------

const Mat2c& KernelGrid::at(int m1, int m2, int n0) const {
  const int L = spec.L;
  m1 = ((m1 % L) + L) % L;
  m2 = ((m2 % L) + L) % L;
  return values.at(static_cast<std::size_t>((n0 + frequencies) * L * L + m1 * L + m2));
}

MomentumPoint KernelGrid::momentum(int m1, int m2, int n0) const {
  return {matsubara(beta, n0), grid_momentum(spec, wrap({m1, m2}, spec.L))};
}

KernelGrid second_order_kernel(const SecondOrderKernel& kernel, std::optional<int> h, int frequencies, int workers) {
  KernelGrid g;
  g.scale = h;
  g.beta = kernel.beta();
  g.U = kernel.U();
  g.spec = kernel.lattice();
  g.frequencies = frequencies;
  const int L = g.spec.L, N = L * L;
  g.values.assign(static_cast<std::size_t>(2 * frequencies * N), Mat2c::Zero());
  std::vector<double> k0s;
  for (int n0 = -frequencies; n0 < frequencies; ++n0) k0s.push_back(matsubara(g.beta, n0));
  parallel_for(N, workers, [&](int m) {
    const Vec2d k = grid_momentum(g.spec, {m / L, m % L});
    if (!h) {
      const auto w = sunset_spectral(k, k0s, g.beta, g.spec, g.U);
      for (int f = 0; f < 2 * frequencies; ++f) g.values[f * N + m] = w[f];
      return;
    }
    for (int f = 0; f < 2 * frequencies; ++f) g.values[f * N + m] = kernel.scale(*h, {k0s[f], k});
  });
  return g;
}

std::vector<Check> symmetry_relations(const KernelGrid& g, double tol) {
  const int L = g.spec.L, F = g.frequencies;
  const Vec2d d12 = g.spec.d1 - g.spec.d2;
  double rot = 0, conj = 0, refl1 = 0, refl2 = 0, parity = 0, time = 0, item_i = 0;
  for (int n0 = -F; n0 < F; ++n0) {
    for (int m1 = 0; m1 < L; ++m1) {
      for (int m2 = 0; m2 < L; ++m2) {
        const Mat2c& W = g.at(m1, m2, n0);
        const Vec2d k = grid_momentum(g.spec, {m1, m2});
        // rotation
        const GridIndex t = rotate_T1_inverse({m1, m2}, L);
        const Mat2c& Wt = g.at(t.n1, t.n2, n0);
        const cplx ph = std::polar(1.0, k.dot(d12));
        rot = std::max({rot, std::abs(W(0, 0) - Wt(0, 0)), std::abs(W(1, 1) - Wt(1, 1)),
                        std::abs(W(0, 1) - ph * Wt(0, 1)), std::abs(W(1, 0) - std::conj(ph) * Wt(1, 0))});
        // W(k) = W(-k)^*
        const Mat2c& Wm = g.at(-m1, -m2, -n0 - 1);
        conj = std::max(conj, (W - Wm.conjugate()).cwiseAbs().maxCoeff());
        // k1 -> -k1 exchanges the sublattices
        const Mat2c& W1 = g.at(-m2, -m1, n0);
        refl1 = std::max({refl1, std::abs(W(0, 0) - W1(1, 1)), std::abs(W(0, 1) - W1(1, 0))});
        // k2 -> -k2
        const Mat2c& W2 = g.at(m2, m1, n0);
        refl2 = std::max(refl2, (W - W2).cwiseAbs().maxCoeff());
        // k -> -k spatially
        const Mat2c& Wp = g.at(-m1, -m2, n0);
        parity = std::max({parity, std::abs(W(0, 0) - Wp(0, 0)), std::abs(W(1, 1) - Wp(1, 1)),
                           std::abs(W(0, 1) - Wp(1, 0))});
        // k0 -> -k0
        const Mat2c& Wk = g.at(m1, m2, -n0 - 1);
        time = std::max({time, std::abs(W(0, 0) + Wk(0, 0)), std::abs(W(1, 1) + Wk(1, 1)),
                         std::abs(W(0, 1) - Wk(0, 1)), std::abs(W(1, 0) - Wk(1, 0))});
        item_i = std::max({item_i, std::abs(W(0, 0) - W(1, 1)), std::abs(W(0, 1) - std::conj(W(1, 0)))});
      }
    }
  }
  auto mk = [tol](std::string n, double v) { return Check{std::move(n), v, tol, v <= tol}; };
  return {mk("rotation", rot),   mk("conjugation", conj), mk("reflection_k1", refl1), mk("reflection_k2", refl2),
          mk("parity", parity),  mk("time_reversal", time), mk("item_i", item_i)};
}

// ---------------------------------------------------------------------------------------------

LocalStructure local_structure(const KernelFn& W, int omega, double beta, double eps) {
  const double ka = kPi / beta, kb = 3 * kPi / beta;
  const Vec2d pF = fermi_point(omega).p;
  LocalStructure s;
  const Mat2c Wpa = W({ka, pF}), Wma = W({-ka, pF}), Wpb = W({kb, pF}), Wmb = W({-kb, pF});
  const Mat2c D1 = (Wpa - Wma) / (2 * ka), D2 = (Wpb - Wmb) / (2 * kb);
  const Mat2c D = (9.0 * D1 - D2) / 8.0;
  s.dk0_aa = D(0, 0);
  s.dk0_ab = D(0, 1);
  const Mat2c E0 = (9.0 * (Wpa + Wma) / 2.0 - (Wpb + Wmb) / 2.0) / 8.0;
  s.w_aa_0 = E0(0, 0);
  s.w_ab_0 = E0(0, 1);
  // Even part in k0, extrapolated to k0 = 0.
  auto even0 = [&](const Vec2d& k) {
    return Mat2c((9.0 * (W({ka, k}) + W({-ka, k})) / 2.0 - (W({kb, k}) + W({-kb, k})) / 2.0) / 8.0);
  };
  auto grad = [&](const Vec2d& e, double h) { return Mat2c((even0(pF + h * e) - even0(pF - h * e)) / (2 * h)); };
  const Vec2d e1(1, 0), e2(0, 1);
  const Mat2c G1 = (4.0 * grad(e1, eps) - grad(e1, 2 * eps)) / 3.0;
  const Mat2c G2 = (4.0 * grad(e2, eps) - grad(e2, 2 * eps)) / 3.0;
  s.d1_aa = G1(0, 0);
  s.d2_aa = G2(0, 0);
  s.d1_ab = G1(0, 1);
  s.d2_ab = G2(0, 1);
  return s;
}

ExtractedCorrections extract_local(const KernelFn& W, int omega, double beta, double eps) {
  ExtractedCorrections c;
  c.local = local_structure(W, omega, beta, eps);
  const cplx z = I * c.local.dk0_aa;
  const cplx d1 = -I * c.local.d1_ab;
  const cplx d2 = -static_cast<double>(omega) * c.local.d2_ab;
  c.z = z.real();
  c.z_imag = z.imag();
  c.delta = 0.5 * (d1.real() + d2.real());
  c.delta_imag = std::max(std::abs(d1.imag()), std::abs(d2.imag()));
  return c;
}

double derivative_step(int h, const CutoffSpec& cut) { return 0.05 * cut.a0 * std::pow(cut.gamma, h); }

Corrections extract_corrections(std::shared_ptr<const SecondOrderKernel> kernel, int h, double reality_tol) {
  const double beta = kernel->beta();
  auto W = [kernel, h](const MomentumPoint& k) { return kernel->scale(h, k); };
  const auto e = extract_local(W, 1, beta, derivative_step(h, kernel->cutoff()));
  if (std::abs(e.z_imag) > reality_tol || std::abs(e.delta_imag) > reality_tol)
    throw std::domain_error("extract_corrections: z or delta not real on scale " + std::to_string(h));
  Corrections c;
  c.z = e.z;
  c.delta = e.delta;
  const double z = e.z, delta = e.delta;
  c.sigma_fn = [kernel, h, z](const MomentumPoint& kp, int omega) {
    const Mat2c w = kernel->scale(h, {kp.k0, kp.k + fermi_point(omega).p});
    return w(0, 0) + I * z * kp.k0;
  };
  c.tau_fn = [kernel, h, delta](const MomentumPoint& kp, int omega) {
    const Mat2c w = kernel->scale(h, {kp.k0, kp.k + fermi_point(omega).p});
    return w(0, 1) - delta * cplx(-omega * kp.k(1), kp.k(0));
  };
  return c;
}

// ---------------------------------------------------------------------------------------------

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = x[i];
    b(i) = y[i];
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  const double res = n > 0 ? (A * c - b).cwiseAbs().maxCoeff() : 0.0;
  return {c(0), c(1), res};
}

bool Lemma2Report::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

Lemma2Report lemma2_verify(double U, const LatticeSpec& spec, const std::vector<double>& betas, const CutoffSpec& cut,
                           int workers) {
  if (!fermi_index(spec.L, 1)) throw std::invalid_argument("lemma2_verify: L must be divisible by 3 (grid lacks p_F)");
  if (betas.size() < 2) throw std::invalid_argument("lemma2_verify: at least two temperatures needed");
  Lemma2Report rep;
  // (i) and the relation families on the middle temperature.
  const double beta_mid = betas[betas.size() / 2];
  const SecondOrderKernel mid(U, beta_mid, spec, cut);
  for (auto& c : symmetry_relations(second_order_kernel(mid, std::nullopt, 4, workers))) rep.checks.push_back(c);

  // (ii): W(pi/beta, p_F) extrapolated linearly in 1/beta.
  for (int omega : {1, -1}) {
    std::vector<double> x, aa_re, aa_im, ab;
    for (double beta : betas) {
      const Mat2c w = sunset_spectral({kPi / beta, fermi_point(omega).p}, beta, spec, U);
      x.push_back(1.0 / beta);
      aa_re.push_back(w(0, 0).real());
      aa_im.push_back(w(0, 0).imag());
      ab.push_back(std::abs(w(0, 1)));
    }
    const double a = std::hypot(fit_linear(x, aa_re).intercept, fit_linear(x, aa_im).intercept);
    const std::string tag = omega > 0 ? "+" : "-";
    rep.checks.push_back({"W_aa(0,p_F^" + tag + ") extrapolated", a, 1e-3, a < 1e-3});
    const double b = *std::max_element(ab.begin(), ab.end());
    rep.checks.push_back({"W_ab(k0,p_F^" + tag + ")", b, 1e-10, b < 1e-10});
  }

  // (iii) on the largest temperature.
  const double beta = *std::max_element(betas.begin(), betas.end());
  auto W = [&](const MomentumPoint& k) { return sunset_spectral(k, beta, spec, U); };
  std::vector<ExtractedCorrections> ex;
  for (int omega : {1, -1}) ex.push_back(extract_local(W, omega, beta, 1e-3));
  for (int i = 0; i < 2; ++i) {
    const int omega = i == 0 ? 1 : -1;
    const auto& l = ex[i].local;
    const std::string tag = omega > 0 ? "+" : "-";
    const double grad_aa = std::max(std::abs(l.d1_aa), std::abs(l.d2_aa));
    rep.checks.push_back({"grad W_aa(0,p_F^" + tag + ")", grad_aa, 1e-10, grad_aa < 1e-10});
    rep.checks.push_back({"Re dk0 W_aa(0,p_F^" + tag + ")", std::abs(l.dk0_aa.real()), 1e-10,
                          std::abs(l.dk0_aa.real()) < 1e-10});
    rep.checks.push_back({"dk0 W_ab(0,p_F^" + tag + ")", std::abs(l.dk0_ab), 1e-10, std::abs(l.dk0_ab) < 1e-10});
    const double re1 = std::abs(l.d1_ab.real()), im2 = std::abs(l.d2_ab.imag());
    rep.checks.push_back({"Re d1 W_ab, Im d2 W_ab (p_F^" + tag + ")", std::max(re1, im2), 1e-10,
                          std::max(re1, im2) < 1e-10});
    // i d1 W_ab = omega d2 W_ab, i.e. alpha_1 = -i omega alpha_2
    const double rel = std::abs(I * l.d1_ab - static_cast<double>(omega) * l.d2_ab);
    const double tol = 1e-8 * std::max(1.0, std::abs(l.d2_ab));
    rep.checks.push_back({"i d1 W_ab = omega d2 W_ab (p_F^" + tag + ")", rel, tol, rel < tol});
    rep.checks.push_back({"z, delta real (p_F^" + tag + ")", std::max(std::abs(ex[i].z_imag), ex[i].delta_imag), 1e-8,
                          std::max(std::abs(ex[i].z_imag), ex[i].delta_imag) < 1e-8});
  }
  // The two Fermi points give the same z and delta.
  const double dz = std::abs(ex[0].z - ex[1].z), dd = std::abs(ex[0].delta - ex[1].delta);
  rep.checks.push_back({"z, delta equal at p_F^+ and p_F^-", std::max(dz, dd), 1e-10, std::max(dz, dd) < 1e-10});
  return rep;
}

UmklappReport umklapp_check(const SecondOrderKernel& kernel) {
  const auto& spec = kernel.lattice();
  const auto& cut = kernel.cutoff();
  UmklappReport rep;
  rep.fermi_difference_not_dual = !is_dual_lattice_vector(fermi_point(1).p - fermi_point(-1).p);
  const double R = cut.a0 * cut.gamma;
  std::vector<Vec2d> near[2];
  for (int m1 = 0; m1 < spec.L; ++m1)
    for (int m2 = 0; m2 < spec.L; ++m2) {
      const Vec2d k = grid_momentum(spec, {m1, m2});
      for (int i = 0; i < 2; ++i)
        if (norm_mod_dual(k - fermi_point(i == 0 ? 1 : -1).p) < R) near[i].push_back(k);
    }
  rep.min_support_separation = std::numeric_limits<double>::infinity();
  Mat2c block = Mat2c::Zero();
  const int nf = std::max(1, static_cast<int>(R * kernel.beta() / (2 * kPi)) + 1);
  for (const auto& k1 : near[0]) {
    for (const auto& k2 : near[1]) {
      rep.min_support_separation = std::min(rep.min_support_separation, norm_mod_dual(k1 - k2));
      if (!is_dual_lattice_vector(k1 - k2)) continue;
      for (int n0 = -nf; n0 < nf; ++n0) block += kernel.total({matsubara(kernel.beta(), n0), k1});
    }
  }
  rep.assembled_max = block.cwiseAbs().maxCoeff();
  return rep;
}

// ---------------------------------------------------------------------------------------------

double flow_beta(int h_min, const CutoffSpec& cut) {
  double beta = 1.0;
  while (h_beta(beta, 1.0, cut) > h_min) beta *= 2;
  return beta;
}

FlowResult second_order_flow(double U, double beta, const LatticeSpec& spec, const CutoffSpec& cut, int h_min) {
  FlowResult res;
  res.beta = beta;
  res.kernel = std::make_shared<const SecondOrderKernel>(U, beta, spec, cut);
  const int lowest = std::max(h_min, res.kernel->floor());
  FlowState state = FlowState::initial();
  for (int h = 0; h >= lowest; --h) {
    const Corrections corr = U == 0.0 ? Corrections{} : extract_corrections(res.kernel, h);
    res.rows.push_back({h, state.zeta, state.c, corr.z, corr.delta});
    res.states.push_back(state);
    res.corrections.push_back(corr);
    state = flow_step(state, corr);
  }
  return res;
}

}  // namespace honeycomb
