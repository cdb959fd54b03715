#pragma once

#include <array>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "spinsq/rng.hpp"
#include "spinsq/types.hpp"

namespace spinsq {

/// Largest qubit count accepted by the dense state-vector backend.
inline constexpr int kDenseMaxQubits = 14;

/// Joint outcome probabilities of a two-qubit measurement along one axis,
/// ordered (+,+), (+,-), (-,+), (-,-).
using PairProbabilities = std::array<double, 4>;

/// Benchmark N-qubit state: exact moments of the collective spin, one- and
/// two-qubit expectations, and samplers for the three measurement patterns.
///
/// Outcome encoding is integral throughout: a total-spin outcome m is
/// reported as 2m, a single-qubit outcome s = +-1/2 as 2s = +-1. Index k of
/// `total_spin_distribution` is the probability of 2m = 2k - N (k qubits up).
///
/// Qubit i "up" is the +1 eigenvector of sigma_alpha^(i); along z that is |0>.
///
/// Instances are immutable after construction and safe for concurrent reads.
class StateModel {
 public:
  virtual ~StateModel() = default;
  StateModel(const StateModel&) = delete;
  StateModel& operator=(const StateModel&) = delete;

  int num_qubits() const { return n_; }
  virtual std::string describe() const = 0;

  /// <J_d^order> for order in 1..4; throws std::out_of_range otherwise.
  double moment(Direction d, int order) const;
  /// <sigma_d^(i)>.
  double single_expectation(Direction d, int qubit) const;
  /// <sigma_d^(i) sigma_d^(j)> for i != j.
  double pair_correlation(Direction d, int i, int j) const;

  const std::vector<double>& total_spin_distribution(Direction d) const {
    return dist_[index_of(d)];
  }

  /// Two binary +-1 variables are fully described by their means and the
  /// mean of their product: P(a, b) = (1 + a E_i + b E_j + a b C_ij) / 4.
  PairProbabilities pair_probabilities(Direction d, int i, int j) const;

  int sample_total_spin(Direction d, Rng& rng) const;
  std::array<int, 2> sample_pair(Direction d, int i, int j, Rng& rng) const;
  int sample_single(Direction d, int qubit, Rng& rng) const;

 protected:
  explicit StateModel(int num_qubits);

  /// Called once from the derived constructor with the three J_alpha outcome
  /// distributions (length N + 1 each).
  void install_distributions(std::array<std::vector<double>, 3> dists);

  virtual double moment_impl(Direction d, int order) const = 0;
  virtual double single_impl(Direction d, int qubit) const = 0;
  virtual double pair_impl(Direction d, int i, int j) const = 0;

 private:
  void check_qubit(int qubit) const;

  int n_;
  std::array<std::vector<double>, 3> dist_;
  std::array<std::vector<double>, 3> cdf_;
};

using StatePtr = std::shared_ptr<const StateModel>;

/// Symmetric Dicke state |D_{N,m}> with m excitations (qubits in |1>).
///
/// J_z outcomes are deterministic (N/2 - m). The J_x and J_y distributions
/// come from the exact rotation of |j = N/2, m_z = N/2 - m> inside the
/// (N+1)-dimensional symmetric subspace; the two coincide because the state
/// is invariant under rotations about z up to a phase.
class DickeState final : public StateModel {
 public:
  DickeState(int num_qubits, int excitations);

  int excitations() const { return m_; }
  std::string describe() const override;

 protected:
  double moment_impl(Direction d, int order) const override;
  double single_impl(Direction d, int qubit) const override;
  double pair_impl(Direction d, int i, int j) const override;

 private:
  int m_;
};

/// Tensor product of N/2 two-qubit singlets on qubit pairs (0,1), (2,3), ...
/// Every collective moment vanishes.
class ManyBodySinglet final : public StateModel {
 public:
  explicit ManyBodySinglet(int num_qubits);

  std::string describe() const override;
  static bool partners(int i, int j) { return i / 2 == j / 2; }

 protected:
  double moment_impl(Direction d, int order) const override;
  double single_impl(Direction d, int qubit) const override;
  double pair_impl(Direction d, int i, int j) const override;
};

/// rho = p |base><base| + (1 - p) 1 / 2^N. Every functional is the convex
/// combination of the base value and the maximally mixed value.
class DepolarizedMixture final : public StateModel {
 public:
  DepolarizedMixture(StatePtr base, double visibility);

  const StateModel& base() const { return *base_; }
  double visibility() const { return p_; }
  std::string describe() const override;

  /// <J^order> of the maximally mixed N-qubit state.
  static double maximally_mixed_moment(int num_qubits, int order);

 protected:
  double moment_impl(Direction d, int order) const override;
  double single_impl(Direction d, int qubit) const override;
  double pair_impl(Direction d, int i, int j) const override;

 private:
  StatePtr base_;
  double p_;
};

/// Explicit 2^N state vector. Basis index bit i is qubit i (1 = |1>).
/// Everything is computed from the amplitudes, independently of the closed
/// forms used by the analytic models, so this class doubles as an oracle.
class DenseState final : public StateModel {
 public:
  DenseState(int num_qubits, std::vector<std::complex<double>> amplitudes);

  static DenseState dicke(int num_qubits, int excitations);
  static DenseState singlet(int num_qubits);

  const std::vector<std::complex<double>>& amplitudes() const { return amps_; }
  std::string describe() const override;

 protected:
  double moment_impl(Direction d, int order) const override;
  double single_impl(Direction d, int qubit) const override;
  double pair_impl(Direction d, int i, int j) const override;

 private:
  std::vector<std::complex<double>> amps_;
  std::array<std::vector<double>, 3> single_;
  std::array<std::vector<double>, 3> pair_;  // row-major N x N
};

/// Parses "dicke:N:m[:p]" or "singlet:N[:p]". A trailing p wraps the state
/// in a DepolarizedMixture. Throws std::invalid_argument on bad input.
StatePtr parse_state(const std::string& spec);

}  // namespace spinsq
