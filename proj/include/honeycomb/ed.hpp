#pragma once
// Exact diagonalization of the half-filled Hubbard model on a periodic L x L honeycomb cluster.
// Modes: spin * 2L^2 + rho * L^2 + n1 * L + n2; a(n1,n2) bonds to b(n1,n2), b(n1,n2-1), b(n1-1,n2).

#include "honeycomb/errors.hpp"
#include "honeycomb/free_theory.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <vector>

namespace honeycomb::ed {

using State = std::uint32_t;

struct ClusterModel {
  int L = 2;
  double U = 0.0;
  bool use_momentum = true;  // block sectors by crystal momentum as well as (N_up, N_down)
  bool eigenvectors = true;  // false: spectrum only (thermodynamics, ground-state spin)

  int sites() const { return 2 * L * L; }
  int modes() const { return 2 * sites(); }
  int cells() const { return L * L; }
  int mode(int spin, int rho, int n1, int n2) const;
  void validate() const;  // CapacityError unless L in {1, 2}
};

// Product of creation/annihilation operators, applied right to left.
struct FermionTerm {
  double coeff = 1.0;
  std::vector<std::pair<int, bool>> ops;  // (mode, dagger)
};
using FermionOperator = std::vector<FermionTerm>;

// Applies a product of operators to a basis state; returns false when the result vanishes.
bool apply_term(const FermionTerm& t, State s, State& out, double& sign);

// Full Fock-space Hamiltonian, 2^modes square.
Eigen::SparseMatrix<double> build_hamiltonian(const ClusterModel& m);

FermionOperator total_spin_squared(const ClusterModel& m);

struct Block {
  int n_up = 0, n_down = 0;
  int momentum = 0;                 // kappa1 * L + kappa2
  std::vector<State> states;        // sector basis
  Eigen::SparseMatrix<double> B;    // sector basis -> block basis (orthonormal columns)
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;          // block-basis eigenvectors; empty for spectrum-only models
};

// Block Hamiltonian in the block basis.
Eigen::MatrixXd block_hamiltonian(const ClusterModel& m, const Block& b);

// Eigen-decomposition of one (N_up, N_down) sector, split by momentum when the model asks for it.
std::vector<Block> sector_blocks(const ClusterModel& m, int n_up, int n_down);

class ExactDiagonalization {
 public:
  explicit ExactDiagonalization(const ClusterModel& m, int workers = 1);

  const ClusterModel& model() const { return model_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  double ground_energy() const { return e0_; }
  Eigen::VectorXd spectrum() const;  // sorted

  double log_partition(double beta) const;
  double specific_free_energy(double beta) const;  // -(beta |Lambda|)^{-1} log Z, |Lambda| = cells
  double density(double beta) const;               // <N> / sites
  // S(S+1) averaged over the degenerate ground manifold, and the corresponding S.
  double ground_spin_squared() const;
  double ground_spin() const;

  // Thermal average of a (N_up, N_down)-conserving operator.
  double thermal_expectation(const FermionOperator& op, double beta) const;

  // k-resolved spin-up <T c_{k rho}(tau) c+_{k rho'}(0)> for every cluster momentum; tau in (-beta, beta],
  // tau = 0 taken as 0^-.  Result[t][k] is 2x2.
  std::vector<std::vector<Mat2c>> two_point_k(double beta, const std::vector<double>& taus, int workers = 1) const;
  // <T c_{x rho}(tau) c+_{0 rho'}(0)> for cell displacement x, assembled from two_point_k.
  std::vector<Mat2c> two_point(int n1, int n2, double beta, const std::vector<double>& taus, int workers = 1) const;

 private:
  ClusterModel model_;
  std::vector<Block> blocks_;
  double e0_ = 0.0;
};

// Position-space assembly of a two_point_k result: (1/|Lambda|) sum_k e^{ik.x} G_k.
std::vector<Mat2c> position_from_momentum(const std::vector<std::vector<Mat2c>>& gk, int L, int n1, int n2);

// Time-ordered thermal correlation of arbitrary insertions by full Fock-space evaluation
// (L = 1 only, CapacityError otherwise).  Equal times: creation operators stand to the left.
double thermal_time_ordered(const ClusterModel& m, const std::vector<Insertion>& ins, double beta);

}  // namespace honeycomb::ed
