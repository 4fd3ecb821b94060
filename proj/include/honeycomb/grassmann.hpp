#pragma once
// Finite Grassmann algebra over at most 16 generators with exact or floating coefficients.

#include "honeycomb/errors.hpp"

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <bit>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace honeycomb::grassmann {

using Rational = boost::multiprecision::cpp_rational;
using Mask = std::uint32_t;
inline constexpr int kMaxGenerators = 16;

struct RationalComplex {
  Rational re{0};
  Rational im{0};

  RationalComplex() = default;
  RationalComplex(int r) : re(r) {}
  RationalComplex(Rational r, Rational i = Rational(0)) : re(std::move(r)), im(std::move(i)) {}

  friend RationalComplex operator+(const RationalComplex& a, const RationalComplex& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend RationalComplex operator-(const RationalComplex& a, const RationalComplex& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend RationalComplex operator-(const RationalComplex& a) { return {-a.re, -a.im}; }
  friend RationalComplex operator*(const RationalComplex& a, const RationalComplex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend RationalComplex operator/(const RationalComplex& a, const RationalComplex& b) {
    const Rational d = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
  }
  RationalComplex& operator+=(const RationalComplex& b) { return *this = *this + b; }
  RationalComplex& operator-=(const RationalComplex& b) { return *this = *this - b; }
  RationalComplex& operator*=(const RationalComplex& b) { return *this = *this * b; }
  friend bool operator==(const RationalComplex& a, const RationalComplex& b) { return a.re == b.re && a.im == b.im; }

  std::complex<double> to_complex() const { return {re.convert_to<double>(), im.convert_to<double>()}; }
};

template <class S>
inline constexpr bool is_exact_v = std::is_same_v<S, Rational> || std::is_same_v<S, RationalComplex>;

template <class S>
double magnitude(const S& x) {
  if constexpr (std::is_same_v<S, Rational>) return std::abs(x.template convert_to<double>());
  else if constexpr (std::is_same_v<S, RationalComplex>) return std::abs(x.to_complex());
  else return std::abs(x);
}

// Dense n x n determinant by elimination; exact types pivot on the first nonzero entry.
template <class S>
S determinant(std::vector<S> a, int n) {
  S det(1);
  for (int c = 0; c < n; ++c) {
    int piv = -1;
    if constexpr (is_exact_v<S>) {
      for (int r = c; r < n; ++r)
        if (!(a[r * n + c] == S(0))) {
          piv = r;
          break;
        }
    } else {
      double best = 0.0;
      for (int r = c; r < n; ++r)
        if (magnitude(a[r * n + c]) > best) {
          best = magnitude(a[r * n + c]);
          piv = r;
        }
    }
    if (piv < 0) return S(0);
    if (piv != c) {
      for (int k = 0; k < n; ++k) std::swap(a[piv * n + k], a[c * n + k]);
      det = S(0) - det;
    }
    const S p = a[c * n + c];
    det = det * p;
    for (int r = c + 1; r < n; ++r) {
      if (a[r * n + c] == S(0)) continue;
      const S f = a[r * n + c] / p;
      for (int k = c; k < n; ++k) a[r * n + k] = a[r * n + k] - f * a[c * n + k];
    }
  }
  return det;
}

// Sign of mono(a) * mono(b) relative to mono(a | b) for disjoint canonical monomials.
inline int reorder_sign(Mask a, Mask b) {
  int swaps = 0;
  for (Mask rest = b; rest; rest &= rest - 1) {
    const int j = std::countr_zero(rest);
    const Mask above = (j >= 31) ? 0u : (~0u << (j + 1));
    swaps += std::popcount(a & above);
  }
  return (swaps % 2 == 0) ? 1 : -1;
}

// Parity of the permutation sorting `order` (distinct integers).
inline int permutation_sign(std::span<const int> order) {
  int inv = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j)
      if (order[i] > order[j]) ++inv;
  return (inv % 2 == 0) ? 1 : -1;
}

template <class S>
class MultilinearForm {
 public:
  explicit MultilinearForm(int num_generators = 0) : n_(num_generators) {
    if (num_generators < 0) throw std::invalid_argument("MultilinearForm: negative generator count");
    if (num_generators > kMaxGenerators) throw CapacityError("MultilinearForm: more than 16 generators");
  }

  static MultilinearForm constant(int n, const S& c) {
    MultilinearForm f(n);
    f.add(0, c);
    return f;
  }

  // Product of the listed generators in the given order, times coeff.
  static MultilinearForm monomial(int n, std::span<const int> ordered, const S& coeff = S(1)) {
    MultilinearForm f(n);
    Mask m = 0;
    for (int g : ordered) {
      if (g < 0 || g >= n) throw std::out_of_range("MultilinearForm::monomial: generator index");
      if (m & (Mask(1) << g)) return f;  // psi^2 = 0
      m |= Mask(1) << g;
    }
    f.add(m, permutation_sign(ordered) > 0 ? coeff : S(0) - coeff);
    return f;
  }

  int num_generators() const { return n_; }
  const std::map<Mask, S>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add(Mask m, const S& c) {
    if (c == S(0)) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second = it->second + c;
      if (it->second == S(0)) terms_.erase(it);
    }
  }

  S coefficient(Mask m) const {
    const auto it = terms_.find(m);
    return it == terms_.end() ? S(0) : it->second;
  }
  S scalar_part() const { return coefficient(0); }

  bool is_even() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return std::popcount(t.first) % 2 == 0; });
  }

  friend MultilinearForm operator+(const MultilinearForm& a, const MultilinearForm& b) {
    check_same(a, b);
    MultilinearForm r = a;
    for (const auto& [m, c] : b.terms_) r.add(m, c);
    return r;
  }
  friend MultilinearForm operator-(const MultilinearForm& a, const MultilinearForm& b) {
    check_same(a, b);
    MultilinearForm r = a;
    for (const auto& [m, c] : b.terms_) r.add(m, S(0) - c);
    return r;
  }
  friend MultilinearForm operator*(const S& s, const MultilinearForm& a) {
    MultilinearForm r(a.n_);
    for (const auto& [m, c] : a.terms_) r.add(m, s * c);
    return r;
  }
  friend MultilinearForm operator*(const MultilinearForm& a, const MultilinearForm& b) {
    check_same(a, b);
    MultilinearForm r(a.n_);
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        if (ma & mb) continue;
        const S p = ca * cb;
        r.add(ma | mb, reorder_sign(ma, mb) > 0 ? p : S(0) - p);
      }
    return r;
  }
  friend bool operator==(const MultilinearForm& a, const MultilinearForm& b) {
    return a.n_ == b.n_ && a.terms_ == b.terms_;
  }

 private:
  static void check_same(const MultilinearForm& a, const MultilinearForm& b) {
    if (a.n_ != b.n_) throw std::invalid_argument("MultilinearForm: generator counts differ");
  }

  int n_;
  std::map<Mask, S> terms_;
};

// Gaussian Grassmann measure with int psi^-_i psi^+_j = pairing(i, j).
// Generator numbering: [0, n_minus) minus fields, [n_minus, n_minus + n_plus) plus fields,
// then n_external fields that are not integrated.
template <class S>
struct GaussianSpec {
  int n_minus = 0;
  int n_plus = 0;
  int n_external = 0;
  std::vector<S> pairing;  // row-major n_minus x n_plus

  GaussianSpec() = default;
  GaussianSpec(int nm, int np, int next = 0) : n_minus(nm), n_plus(np), n_external(next), pairing(nm * np, S(0)) {
    if (total() > kMaxGenerators) throw CapacityError("GaussianSpec: more than 16 generators");
  }

  int total() const { return n_minus + n_plus + n_external; }
  int minus(int i) const { return i; }
  int plus(int j) const { return n_minus + j; }
  int external(int e) const { return n_minus + n_plus + e; }
  bool is_minus(int g) const { return g < n_minus; }
  bool is_plus(int g) const { return g >= n_minus && g < n_minus + n_plus; }
  bool is_integrated(int g) const { return g < n_minus + n_plus; }
  Mask integrated_mask() const { return (Mask(1) << (n_minus + n_plus)) - 1; }

  S& operator()(int i, int j) { return pairing[i * n_plus + j]; }
  const S& operator()(int i, int j) const { return pairing[i * n_plus + j]; }
  // Pairing of an ordered (minus generator, plus generator) couple.
  const S& pair(int gminus, int gplus) const { return (*this)(gminus, gplus - n_minus); }
};

// Fermionic Wick rule: signed determinant of the pairing submatrix, 0 when unbalanced.
template <class S>
S gaussian_moment(std::span<const int> ordered, const GaussianSpec<S>& spec) {
  std::vector<int> mpos, ppos;
  Mask seen = 0;
  for (int p = 0; p < static_cast<int>(ordered.size()); ++p) {
    const int g = ordered[p];
    if (!spec.is_integrated(g)) throw std::invalid_argument("gaussian_moment: external generator in moment");
    if (seen & (Mask(1) << g)) return S(0);
    seen |= Mask(1) << g;
    (spec.is_minus(g) ? mpos : ppos).push_back(p);
  }
  if (mpos.size() != ppos.size()) return S(0);
  const int n = static_cast<int>(mpos.size());
  if (n == 0) return S(1);
  // Reorder to psi^-_{1} psi^+_{1} psi^-_{2} psi^+_{2} ..., whose integral is det[g(m_a, p_b)].
  std::vector<int> order;
  for (int a = 0; a < n; ++a) {
    order.push_back(mpos[a]);
    order.push_back(ppos[a]);
  }
  std::vector<S> m(n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) m[a * n + b] = spec.pair(ordered[mpos[a]], ordered[ppos[b]]);
  const S d = determinant(std::move(m), n);
  return permutation_sign(order) > 0 ? d : S(0) - d;
}

namespace detail {
inline std::vector<int> bits(Mask m) {
  std::vector<int> out;
  for (; m; m &= m - 1) out.push_back(std::countr_zero(m));
  return out;
}
}  // namespace detail

// Integrates out the Gaussian fields; the result only contains external generators.
template <class S>
MultilinearForm<S> expectation(const MultilinearForm<S>& V, const GaussianSpec<S>& spec) {
  if (V.num_generators() != spec.total()) throw std::invalid_argument("expectation: generator counts differ");
  MultilinearForm<S> out(V.num_generators());
  const Mask im = spec.integrated_mask();
  for (const auto& [m, c] : V.terms()) {
    const Mask mi = m & im, me = m & ~im;
    const auto ids = detail::bits(mi);
    const S mom = gaussian_moment<S>(ids, spec);
    if (mom == S(0)) continue;
    const S v = c * mom;
    out.add(me, reorder_sign(mi, me) > 0 ? v : S(0) - v);
  }
  return out;
}

// E(V^k) for k = 0..n.
template <class S>
std::vector<MultilinearForm<S>> moments(const MultilinearForm<S>& V, const GaussianSpec<S>& spec, int n) {
  std::vector<MultilinearForm<S>> out;
  MultilinearForm<S> power = MultilinearForm<S>::constant(V.num_generators(), S(1));
  for (int k = 0; k <= n; ++k) {
    out.push_back(expectation(power, spec));
    if (k < n) power = power * V;
  }
  return out;
}

// E^T(V; n) = d^n/d lambda^n log int P(d psi) e^{lambda V} at lambda = 0, by truncated power series.
template <class S>
MultilinearForm<S> truncated_expectation(const MultilinearForm<S>& V, const GaussianSpec<S>& spec, int n) {
  if (n < 1) throw std::invalid_argument("truncated_expectation: n >= 1 required");
  if (!V.is_even()) throw std::invalid_argument("truncated_expectation: V must be even");
  const int N = V.num_generators();
  const auto mom = moments(V, spec, n);
  // Z(lambda) - 1 = sum_{k>=1} lambda^k mom_k / k!
  std::vector<MultilinearForm<S>> x(n + 1, MultilinearForm<S>(N));
  S fact(1);
  for (int k = 1; k <= n; ++k) {
    fact = fact * S(k);
    x[k] = (S(1) / fact) * mom[k];
  }
  // log(1 + x) = sum_r (-1)^{r+1} x^r / r, truncated at lambda^n.
  std::vector<MultilinearForm<S>> power = x, log_series(n + 1, MultilinearForm<S>(N));
  for (int r = 1; r <= n; ++r) {
    const S coef = (r % 2 == 1 ? S(1) : S(-1)) / S(r);
    for (int k = 0; k <= n; ++k) log_series[k] = log_series[k] + coef * power[k];
    std::vector<MultilinearForm<S>> next(n + 1, MultilinearForm<S>(N));
    for (int a = 1; a <= n; ++a)
      for (int b = 1; a + b <= n; ++b) next[a + b] = next[a + b] + power[a] * x[b];
    power = std::move(next);
  }
  return fact * log_series[n];
}

// Joint cumulant E^T(X_1, ..., X_s) of even forms, via the set-partition formula.
template <class S>
MultilinearForm<S> truncated_expectation_joint(std::span<const MultilinearForm<S>> X, const GaussianSpec<S>& spec) {
  const int s = static_cast<int>(X.size());
  if (s < 1 || s > 8) throw CapacityError("truncated_expectation_joint: 1 <= s <= 8 supported");
  for (const auto& x : X)
    if (!x.is_even()) throw std::invalid_argument("truncated_expectation_joint: forms must be even");
  const int N = X[0].num_generators();
  MultilinearForm<S> total(N);
  std::vector<int> block(s, 0);
  // Each element joins an existing block or opens a new one.
  auto recurse = [&](auto&& self, int i, int nblocks) -> void {
    if (i == s) {
      MultilinearForm<S> prod = MultilinearForm<S>::constant(N, S(1));
      for (int b = 0; b < nblocks; ++b) {
        MultilinearForm<S> p = MultilinearForm<S>::constant(N, S(1));
        for (int k = 0; k < s; ++k)
          if (block[k] == b) p = p * X[k];
        prod = prod * expectation(p, spec);
      }
      S w(1);
      for (int k = 1; k < nblocks; ++k) w = w * S(k);
      if ((nblocks - 1) % 2 == 1) w = S(0) - w;
      total = total + w * prod;
      return;
    }
    for (int b = 0; b <= nblocks; ++b) {
      block[i] = b;
      self(self, i + 1, std::max(nblocks, b + 1));
    }
  };
  recurse(recurse, 0, 0);
  return total;
}

// --- BBF tree formula (floating point) -----------------------------------------------------

using cplx = std::complex<double>;

struct AnchoredLine {
  int minus_field;  // positions in the concatenated cluster list
  int plus_field;
};

struct BbfReport {
  cplx value;
  int trees = 0;  // anchored tree graphs with a balanced remainder
};

// Sum over anchored trees T of (line propagators) * int dP_T(t) det G^T(t), with the sign
// of the field permutation included; s <= 3 clusters of integrated generators.
BbfReport bbf_evaluate(const std::vector<std::vector<int>>& clusters, const GaussianSpec<cplx>& spec);

// Interpolation matrix t_{ii'} = min of the line parameters along the tree path from i to i'.
Eigen::MatrixXd bbf_interpolation(int s, const std::vector<std::pair<int, int>>& tree_edges,
                                  const std::vector<double>& w);

// Truncated expectation of the cluster monomials by the partition formula (reference route).
cplx cluster_truncated_expectation(const std::vector<std::vector<int>>& clusters, const GaussianSpec<cplx>& spec);

struct GramHadamardResult {
  cplx det;
  double bound;
  bool ok;
};
// Columns of F and G are the vectors f_a, g_b; det is taken of (f_a, g_b) = f_a^* . g_b.
GramHadamardResult gram_hadamard_check(const Eigen::MatrixXcd& F, const Eigen::MatrixXcd& G);

}  // namespace honeycomb::grassmann
