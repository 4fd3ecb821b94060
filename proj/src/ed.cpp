#include "honeycomb/ed.hpp"
#include "honeycomb/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace honeycomb::ed {

namespace {

double parity_below(State s, int mode) {
  return (std::popcount(s & ((State{1} << mode) - 1)) & 1) ? -1.0 : 1.0;
}

struct Bond {
  int a, b;
};

std::vector<Bond> bonds(const ClusterModel& m) {
  std::vector<Bond> out;
  const int L = m.L;
  auto w = [L](int x) { return ((x % L) + L) % L; };
  for (int n1 = 0; n1 < L; ++n1)
    for (int n2 = 0; n2 < L; ++n2)
      for (auto [m1, m2] : {std::pair{n1, n2}, {n1, n2 - 1}, {n1 - 1, n2}})
        out.push_back({0 * L * L + n1 * L + n2, L * L + w(m1) * L + w(m2)});
  return out;
}

// Calls emit(target, amplitude) for every term of H acting on |s>.
template <class Emit>
void hamiltonian_action(const ClusterModel& m, const std::vector<Bond>& bs, State s, Emit&& emit) {
  const int S = m.sites();
  double diag = 0.0;
  for (int i = 0; i < S; ++i) {
    const double nu = (s >> i) & 1u, nd = (s >> (i + S)) & 1u;
    diag += (nu - 0.5) * (nd - 0.5);
  }
  emit(s, m.U * diag);
  for (const auto& bd : bs)
    for (int spin = 0; spin < 2; ++spin) {
      const int a = bd.a + spin * S, b = bd.b + spin * S;
      for (auto [i, j] : {std::pair{a, b}, {b, a}}) {
        FermionTerm t{-1.0, {{i, true}, {j, false}}};
        State out;
        double sign;
        if (apply_term(t, s, out, sign)) emit(out, -sign);
      }
    }
}

std::vector<State> sector_states(int S, int nu, int nd) {
  std::vector<State> ups, downs;
  for (State x = 0; x < (State{1} << S); ++x) {
    if (std::popcount(x) == nu) ups.push_back(x);
    if (std::popcount(x) == nd) downs.push_back(x);
  }
  std::vector<State> out;
  for (State d : downs)
    for (State u : ups) out.push_back(u | (d << S));
  std::sort(out.begin(), out.end());
  return out;
}

int index_of(const std::vector<State>& states, State s) {
  auto it = std::lower_bound(states.begin(), states.end(), s);
  if (it == states.end() || *it != s) return -1;
  return static_cast<int>(it - states.begin());
}

Eigen::SparseMatrix<double> operator_matrix(const FermionOperator& op, const std::vector<State>& from,
                                            const std::vector<State>& to) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < static_cast<int>(from.size()); ++c)
    for (const auto& t : op) {
      State out;
      double sign;
      if (!apply_term(t, from[c], out, sign)) continue;
      const int r = index_of(to, out);
      if (r < 0) throw std::logic_error("operator_matrix: target outside sector");
      trip.emplace_back(r, c, t.coeff * sign);
    }
  Eigen::SparseMatrix<double> M(static_cast<int>(to.size()), static_cast<int>(from.size()));
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

// Translation of a basis state by (d1, d2) cells, with the fermionic reordering sign.
State translate(const ClusterModel& m, State s, int d1, int d2, double& sign) {
  const int L = m.L;
  std::vector<int> images;
  for (int mode = 0; mode < m.modes(); ++mode) {
    if (!((s >> mode) & 1u)) continue;
    const int spin = mode / m.sites(), rest = mode % m.sites();
    const int rho = rest / (L * L), n1 = (rest % (L * L)) / L, n2 = rest % L;
    images.push_back(m.mode(spin, rho, (n1 + d1) % L, (n2 + d2) % L));
  }
  int inv = 0;
  for (std::size_t a = 0; a < images.size(); ++a)
    for (std::size_t b = a + 1; b < images.size(); ++b)
      if (images[a] > images[b]) ++inv;
  sign = (inv & 1) ? -1.0 : 1.0;
  State out = 0;
  for (int i : images) out |= State{1} << i;
  return out;
}

double character(int L, int kappa, int d1, int d2) {
  const int k1 = kappa / L, k2 = kappa % L;
  return std::cos(2 * kPi * (k1 * d1 + k2 * d2) / L);
}

Eigen::SparseMatrix<double> sector_hamiltonian(const ClusterModel& m, const std::vector<State>& states) {
  const int dim = static_cast<int>(states.size());
  const auto bs = bonds(m);
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < dim; ++c)
    hamiltonian_action(m, bs, states[c], [&](State out, double amp) {
      if (amp != 0.0) trip.emplace_back(index_of(states, out), c, amp);
    });
  Eigen::SparseMatrix<double> H(dim, dim);
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

std::vector<Block> diagonalize_sector(const ClusterModel& m, int nu, int nd) {
  const auto states = sector_states(m.sites(), nu, nd);
  const int dim = static_cast<int>(states.size());
  const auto H = sector_hamiltonian(m, states);

  const int L = m.L;
  const int nk = m.use_momentum ? L * L : 1;
  std::vector<std::vector<Eigen::Triplet<double>>> cols(nk);
  std::vector<int> ncols(nk, 0);
  if (!m.use_momentum) {
    for (int c = 0; c < dim; ++c) cols[0].emplace_back(c, c, 1.0);
    ncols[0] = dim;
  } else {
    std::vector<char> seen(dim, 0);
    for (int c = 0; c < dim; ++c) {
      if (seen[c]) continue;
      std::vector<std::pair<int, double>> orbit;  // (index, sign) for each translation d
      for (int d1 = 0; d1 < L; ++d1)
        for (int d2 = 0; d2 < L; ++d2) {
          double sign;
          const int r = index_of(states, translate(m, states[c], d1, d2, sign));
          orbit.emplace_back(r, sign);
          seen[r] = 1;
        }
      for (int k = 0; k < nk; ++k) {
        std::map<int, double> v;
        for (int d = 0; d < L * L; ++d) v[orbit[d].first] += character(L, k, d / L, d % L) * orbit[d].second;
        double norm = 0;
        for (auto& [i, x] : v) norm += x * x;
        if (norm < 1e-10) continue;
        norm = std::sqrt(norm);
        for (auto& [i, x] : v)
          if (x != 0.0) cols[k].emplace_back(i, ncols[k], x / norm);
        ++ncols[k];
      }
    }
  }
  std::vector<Block> out;
  for (int k = 0; k < nk; ++k) {
    if (ncols[k] == 0) continue;
    Block b;
    b.n_up = nu;
    b.n_down = nd;
    b.momentum = k;
    b.states = states;
    b.B.resize(dim, ncols[k]);
    b.B.setFromTriplets(cols[k].begin(), cols[k].end());
    const Eigen::MatrixXd Hb = Eigen::MatrixXd(b.B.transpose() * (H * b.B));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hb, m.eigenvectors ? Eigen::ComputeEigenvectors
                                                                          : Eigen::EigenvaluesOnly);
    b.energies = es.eigenvalues();
    if (m.eigenvectors) b.vectors = es.eigenvectors();
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace

int ClusterModel::mode(int spin, int rho, int n1, int n2) const {
  auto w = [this](int x) { return ((x % L) + L) % L; };
  return spin * sites() + rho * L * L + w(n1) * L + w(n2);
}

void ClusterModel::validate() const {
  if (L != 1 && L != 2) throw CapacityError("ClusterModel: L_cells must be 1 or 2");
}

bool apply_term(const FermionTerm& t, State s, State& out, double& sign) {
  sign = 1.0;
  for (auto it = t.ops.rbegin(); it != t.ops.rend(); ++it) {
    const auto [mode, dag] = *it;
    const State bit = State{1} << mode;
    if (dag == static_cast<bool>(s & bit)) return false;
    sign *= parity_below(s, mode);
    s ^= bit;
  }
  out = s;
  return true;
}

Eigen::SparseMatrix<double> build_hamiltonian(const ClusterModel& m) {
  m.validate();
  const auto bs = bonds(m);
  const State dim = State{1} << m.modes();
  std::vector<Eigen::Triplet<double>> trip;
  for (State s = 0; s < dim; ++s)
    hamiltonian_action(m, bs, s, [&](State out, double amp) {
      if (amp != 0.0) trip.emplace_back(static_cast<int>(out), static_cast<int>(s), amp);
    });
  Eigen::SparseMatrix<double> H(static_cast<int>(dim), static_cast<int>(dim));
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

Eigen::MatrixXd block_hamiltonian(const ClusterModel& m, const Block& b) {
  const auto H = sector_hamiltonian(m, b.states);
  return Eigen::MatrixXd(b.B.transpose() * (H * b.B));
}

std::vector<Block> sector_blocks(const ClusterModel& m, int n_up, int n_down) {
  m.validate();
  if (n_up < 0 || n_down < 0 || n_up > m.sites() || n_down > m.sites())
    throw std::invalid_argument("sector_blocks: particle numbers out of range");
  return diagonalize_sector(m, n_up, n_down);
}

FermionOperator total_spin_squared(const ClusterModel& m) {
  const int S = m.sites();
  FermionOperator op;
  // S^2 = Sz^2 + (S+S- + S-S+)/2 with S+ = sum c+_up c_down
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < S; ++j) {
      for (int si = 0; si < 2; ++si)
        for (int sj = 0; sj < 2; ++sj) {
          const double c = 0.25 * (si == sj ? 1.0 : -1.0);
          op.push_back({c, {{i + si * S, true}, {i + si * S, false}, {j + sj * S, true}, {j + sj * S, false}}});
        }
      op.push_back({0.5, {{i, true}, {i + S, false}, {j + S, true}, {j, false}}});
      op.push_back({0.5, {{i + S, true}, {i, false}, {j, true}, {j + S, false}}});
    }
  return op;
}

namespace {

// Spin flip: up modes <-> down modes.
State spin_flip(const ClusterModel& m, State s, double& sign) {
  std::vector<int> images;
  for (int mode = 0; mode < m.modes(); ++mode)
    if ((s >> mode) & 1u) images.push_back((mode + m.sites()) % m.modes());
  int inv = 0;
  for (std::size_t a = 0; a < images.size(); ++a)
    for (std::size_t b = a + 1; b < images.size(); ++b)
      if (images[a] > images[b]) ++inv;
  sign = (inv & 1) ? -1.0 : 1.0;
  State out = 0;
  for (int i : images) out |= State{1} << i;
  return out;
}

// Hole-particle map c+_a -> c_a, c+_b -> -c_b, with the empty state sent to the filled one.
State hole_particle(const ClusterModel& m, State s, double& sign) {
  const State full = (State{1} << m.modes()) - 1;
  FermionTerm t;
  double eta = 1.0;
  for (int mode = 0; mode < m.modes(); ++mode)
    if ((s >> mode) & 1u) {
      t.ops.push_back({mode, false});
      if ((mode % m.sites()) >= m.cells()) eta = -eta;
    }
  State out;
  apply_term(t, full, out, sign);
  sign *= eta;
  return out;
}

// Copies of the blocks of one sector carried to the image sector by a symmetry of H.
std::vector<Block> mirror_blocks(const ClusterModel& m, const std::vector<Block>& src, bool flip, bool ph) {
  std::vector<Block> out;
  if (src.empty()) return out;
  const auto& from = src[0].states;
  std::vector<std::pair<State, double>> image(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) {
    double s1 = 1.0, s2 = 1.0;
    State x = from[i];
    if (flip) x = spin_flip(m, x, s1);
    if (ph) x = hole_particle(m, x, s2);
    image[i] = {x, s1 * s2};
  }
  std::vector<State> to;
  for (auto& p : image) to.push_back(p.first);
  std::sort(to.begin(), to.end());
  Eigen::SparseMatrix<double> P(static_cast<int>(to.size()), static_cast<int>(from.size()));
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < from.size(); ++i) trip.emplace_back(index_of(to, image[i].first), i, image[i].second);
  P.setFromTriplets(trip.begin(), trip.end());
  for (const auto& b : src) {
    Block c;
    c.n_up = std::popcount(to[0] & ((State{1} << m.sites()) - 1));
    c.n_down = std::popcount(to[0] >> m.sites());
    c.momentum = -1;  // label not tracked through the map
    c.states = to;
    c.B = P * b.B;
    c.energies = b.energies;
    c.vectors = b.vectors;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

ExactDiagonalization::ExactDiagonalization(const ClusterModel& m, int workers) : model_(m) {
  m.validate();
  const int S = m.sites();
  // Sectors related by spin flip or the hole-particle map share their spectra; diagonalize one per class.
  auto image = [S](std::pair<int, int> p, bool flip, bool ph) {
    if (flip) std::swap(p.first, p.second);
    if (ph) p = {S - p.first, S - p.second};
    return p;
  };
  std::vector<std::pair<int, int>> reps;
  for (int nu = 0; nu <= S; ++nu)
    for (int nd = 0; nd <= S; ++nd) {
      std::pair<int, int> p{nu, nd};
      if (p == std::min({p, image(p, true, false), image(p, false, true), image(p, true, true)})) reps.push_back(p);
    }
  // largest sectors first for load balance
  std::sort(reps.begin(), reps.end(), [S](auto a, auto b) {
    auto size = [S](auto p) { return std::abs(2 * p.first - S) + std::abs(2 * p.second - S); };
    return size(a) < size(b);
  });
  std::vector<std::vector<Block>> per(reps.size());
  parallel_for(static_cast<int>(reps.size()), workers,
               [&](int i) { per[i] = diagonalize_sector(m, reps[i].first, reps[i].second); });
  e0_ = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < reps.size(); ++i) {
    std::vector<std::pair<int, int>> done{reps[i]};
    for (auto [flip, ph] : {std::pair{true, false}, {false, true}, {true, true}}) {
      const auto q = image(reps[i], flip, ph);
      if (std::find(done.begin(), done.end(), q) != done.end()) continue;
      done.push_back(q);
      for (auto& b : mirror_blocks(m, per[i], flip, ph)) blocks_.push_back(std::move(b));
    }
    for (auto& b : per[i]) {
      e0_ = std::min(e0_, b.energies.minCoeff());
      blocks_.push_back(std::move(b));
    }
  }
}

Eigen::VectorXd ExactDiagonalization::spectrum() const {
  std::vector<double> all;
  for (const auto& b : blocks_) all.insert(all.end(), b.energies.data(), b.energies.data() + b.energies.size());
  std::sort(all.begin(), all.end());
  return Eigen::Map<Eigen::VectorXd>(all.data(), static_cast<Eigen::Index>(all.size()));
}

double ExactDiagonalization::log_partition(double beta) const {
  double z = 0.0;
  for (const auto& b : blocks_) z += (-beta * (b.energies.array() - e0_)).exp().sum();
  return -beta * e0_ + std::log(z);
}

double ExactDiagonalization::specific_free_energy(double beta) const {
  return -log_partition(beta) / (beta * model_.cells());
}

double ExactDiagonalization::density(double beta) const {
  double z = 0.0, n = 0.0;
  for (const auto& b : blocks_) {
    const double w = (-beta * (b.energies.array() - e0_)).exp().sum();
    z += w;
    n += w * (b.n_up + b.n_down);
  }
  return n / z / model_.sites();
}

namespace {
Eigen::VectorXd sector_vector(const Block& b, int col) { return b.B * b.vectors.col(col); }
}  // namespace

double ExactDiagonalization::ground_spin_squared() const {
  const auto op = total_spin_squared(model_);
  double acc = 0.0;
  int count = 0;
  for (const auto& b : blocks_) {
    if (b.energies.minCoeff() > e0_ + 1e-8) continue;
    Eigen::MatrixXd W = b.vectors;
    if (W.size() == 0) W = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(block_hamiltonian(model_, b)).eigenvectors();
    const auto S2 = operator_matrix(op, b.states, b.states);
    for (int n = 0; n < b.energies.size(); ++n) {
      if (b.energies(n) > e0_ + 1e-8) continue;
      const Eigen::VectorXd psi = b.B * W.col(n);
      acc += psi.dot(S2 * psi);
      ++count;
    }
  }
  return acc / count;
}

double ExactDiagonalization::ground_spin() const {
  const double x = std::max(0.0, ground_spin_squared());
  return 0.5 * (std::sqrt(1.0 + 4.0 * x) - 1.0);
}

double ExactDiagonalization::thermal_expectation(const FermionOperator& op, double beta) const {
  if (!model_.eigenvectors) throw std::logic_error("thermal_expectation: model built without eigenvectors");
  double z = 0.0, acc = 0.0;
  const Block* cached_for = nullptr;
  Eigen::SparseMatrix<double> O;
  for (const auto& b : blocks_) {
    const Eigen::ArrayXd w = (-beta * (b.energies.array() - e0_)).exp();
    z += w.sum();
    for (int n = 0; n < b.energies.size(); ++n) {
      if (w(n) < 1e-18) continue;
      if (!cached_for || cached_for->n_up != b.n_up || cached_for->n_down != b.n_down) {
        O = operator_matrix(op, b.states, b.states);
        cached_for = &b;
      }
      const Eigen::VectorXd psi = sector_vector(b, n);
      acc += w(n) * psi.dot(O * psi);
    }
  }
  return acc / z;
}

std::vector<std::vector<Mat2c>> ExactDiagonalization::two_point_k(double beta, const std::vector<double>& taus,
                                                                  int workers) const {
  for (double t : taus)
    if (!(t > -beta && t <= beta)) throw std::invalid_argument("two_point_k: tau in (-beta, beta] required");
  if (!model_.eigenvectors) throw std::logic_error("two_point_k: model built without eigenvectors");
  const int L = model_.L, nk = L * L;
  const double cut = 40.0 / beta;
  double z = 0.0;
  for (const auto& b : blocks_) z += (-beta * (b.energies.array() - e0_)).exp().sum();

  // group blocks by sector
  std::map<std::pair<int, int>, std::vector<int>> by_sector;
  for (int i = 0; i < static_cast<int>(blocks_.size()); ++i)
    by_sector[{blocks_[i].n_up, blocks_[i].n_down}].push_back(i);
  std::vector<std::pair<int, int>> sources;
  for (auto& [key, v] : by_sector)
    if (key.first >= 1) sources.push_back(key);

  std::vector<std::vector<Mat2c>> result(taus.size(), std::vector<Mat2c>(nk, Mat2c::Zero()));
  std::mutex mtx;
  parallel_for(static_cast<int>(sources.size()), workers, [&](int si) {
    const auto key = sources[si];
    const auto& src_blocks = by_sector.at(key);
    const auto& tgt_blocks = by_sector.at({key.first - 1, key.second});
    const auto& src_states = blocks_[src_blocks[0]].states;
    const auto& tgt_states = blocks_[tgt_blocks[0]].states;
    std::vector<std::vector<Mat2c>> local(taus.size(), std::vector<Mat2c>(nk, Mat2c::Zero()));
    for (int k = 0; k < nk; ++k) {
      const int k1 = k / L, k2 = k % L;
      std::array<Eigen::SparseMatrix<double>, 2> C;
      for (int rho = 0; rho < 2; ++rho) {
        FermionOperator op;
        for (int n1 = 0; n1 < L; ++n1)
          for (int n2 = 0; n2 < L; ++n2)
            op.push_back({std::cos(2 * kPi * (k1 * n1 + k2 * n2) / L) / L, {{model_.mode(0, rho, n1, n2), false}}});
        C[rho] = operator_matrix(op, src_states, tgt_states);
      }
      for (int ti : tgt_blocks)
        for (int sj : src_blocks) {
          const Block& t = blocks_[ti];
          const Block& s = blocks_[sj];
          std::array<Eigen::SparseMatrix<double>, 2> X;
          bool any = false;
          for (int rho = 0; rho < 2; ++rho) {
            X[rho] = t.B.transpose() * C[rho] * s.B;
            X[rho].prune(1e-14);
            any = any || X[rho].nonZeros() > 0;
          }
          if (!any) continue;
          const Eigen::Index nt = t.energies.size(), ns = s.energies.size();
          Eigen::Index a = 0, bcount = 0;
          while (a < nt && t.energies(a) - e0_ <= cut) ++a;
          while (bcount < ns && s.energies(bcount) - e0_ <= cut) ++bcount;
          if (a == 0 && bcount == 0) continue;
          // R1: rows n < a, all m;  R2: rows n >= a, columns m < b
          std::array<Eigen::MatrixXd, 2> R1, R2;
          for (int rho = 0; rho < 2; ++rho) {
            R1[rho] = t.vectors.leftCols(a).transpose() * (X[rho] * s.vectors);
            R2[rho] = (t.vectors.rightCols(nt - a).transpose() * X[rho]) * s.vectors.leftCols(bcount);
          }
          const Eigen::ArrayXd En = t.energies.array() - e0_;
          const Eigen::ArrayXd Em = s.energies.array() - e0_;
          for (std::size_t it = 0; it < taus.size(); ++it) {
            const double tau = taus[it];
            auto weight = [&](double en, double em) {
              return tau > 0 ? std::exp(-(beta - tau) * en - tau * em) : -std::exp(-(beta + tau) * em + tau * en);
            };
            Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
            for (Eigen::Index n = 0; n < a; ++n)
              for (Eigen::Index mm = 0; mm < ns; ++mm) {
                const double w = weight(En(n), Em(mm));
                for (int r = 0; r < 2; ++r)
                  for (int rp = 0; rp < 2; ++rp) acc(r, rp) += w * R1[r](n, mm) * R1[rp](n, mm);
              }
            for (Eigen::Index n = 0; n < nt - a; ++n)
              for (Eigen::Index mm = 0; mm < bcount; ++mm) {
                const double w = weight(En(a + n), Em(mm));
                for (int r = 0; r < 2; ++r)
                  for (int rp = 0; rp < 2; ++rp) acc(r, rp) += w * R2[r](n, mm) * R2[rp](n, mm);
              }
            local[it][k] += acc.cast<cplx>();
          }
        }
    }
    std::lock_guard<std::mutex> lock(mtx);
    for (std::size_t it = 0; it < taus.size(); ++it)
      for (int k = 0; k < nk; ++k) result[it][k] += local[it][k];
  });
  for (auto& row : result)
    for (auto& g : row) g /= z;
  return result;
}

std::vector<Mat2c> ExactDiagonalization::two_point(int n1, int n2, double beta, const std::vector<double>& taus,
                                                   int workers) const {
  return position_from_momentum(two_point_k(beta, taus, workers), model_.L, n1, n2);
}

std::vector<Mat2c> position_from_momentum(const std::vector<std::vector<Mat2c>>& gk, int L, int n1, int n2) {
  std::vector<Mat2c> out(gk.size(), Mat2c::Zero());
  for (std::size_t it = 0; it < gk.size(); ++it)
    for (int k = 0; k < L * L; ++k) {
      const double phase = std::cos(2 * kPi * ((k / L) * n1 + (k % L) * n2) / L);
      out[it] += phase * gk[it][k] / static_cast<double>(L * L);
    }
  return out;
}

double thermal_time_ordered(const ClusterModel& m, const std::vector<Insertion>& ins, double beta) {
  if (m.L != 1) throw CapacityError("thermal_time_ordered: full Fock-space evaluation needs L = 1");
  const Eigen::MatrixXd H = Eigen::MatrixXd(build_hamiltonian(m));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const Eigen::VectorXd E = es.eigenvalues().array() - es.eigenvalues().minCoeff();
  const Eigen::MatrixXd& V = es.eigenvectors();
  const int dim = static_cast<int>(H.rows());
  auto evolve = [&](double t) -> Eigen::MatrixXd {
    return V * (-t * E.array()).exp().matrix().asDiagonal() * V.transpose();
  };

  std::vector<int> order(ins.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (ins[a].x0 != ins[b].x0) return ins[a].x0 > ins[b].x0;
    return ins[a].eps > ins[b].eps;  // creation to the left at equal times
  });
  int inv = 0;
  for (std::size_t a = 0; a < order.size(); ++a)
    for (std::size_t b = a + 1; b < order.size(); ++b)
      if (order[a] > order[b]) ++inv;

  Eigen::MatrixXd prod = evolve(beta - (ins.empty() ? 0.0 : ins[order[0]].x0));
  for (std::size_t p = 0; p < order.size(); ++p) {
    const auto& x = ins[order[p]];
    if (x.x0 < 0 || x.x0 >= beta) throw std::invalid_argument("thermal_time_ordered: times in [0, beta)");
    const int mode = m.mode(x.spin, x.sublattice, x.n1, x.n2);
    Eigen::MatrixXd O = Eigen::MatrixXd::Zero(dim, dim);
    for (State s = 0; s < static_cast<State>(dim); ++s) {
      State out;
      double sign;
      if (apply_term({1.0, {{mode, x.eps > 0}}}, s, out, sign)) O(out, s) = sign;
    }
    const double next = p + 1 < order.size() ? ins[order[p + 1]].x0 : 0.0;
    prod = prod * O * evolve(x.x0 - next);
  }
  const double z = (-beta * E.array()).exp().sum();
  return ((inv & 1) ? -1.0 : 1.0) * prod.trace() / z;
}

}  // namespace honeycomb::ed
