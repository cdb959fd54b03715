#pragma once

#include <array>
#include <vector>

#include "spinsq/states.hpp"
#include "spinsq/types.hpp"

namespace spinsq {

/// The sums over qubits the variance formulas consume, for one direction.
struct MomentAggregates {
  double j1 = 0.0, j2 = 0.0, j3 = 0.0, j4 = 0.0;  // <J^n>
  double sum_single_sq = 0.0;  // sum_i <s_i>^2
  double sum_pair = 0.0;       // sum_{i != j} <s_i s_j>
  double sum_pair_sq = 0.0;    // sum_{i != j} <s_i s_j>^2
  double mixed = 0.0;          // sum_{i != j} <s_i s_j> (<s_i> + <s_j>)

  double moment(int order) const;
};

using DirectionAggregates = std::array<MomentAggregates, 3>;

struct DirectionMoments {
  std::array<double, 4> moments{};  // <J^1> .. <J^4>
  std::vector<double> single;       // length N
  std::vector<double> pair;         // N x N row-major, unit diagonal
  MomentAggregates aggregates;
};

/// Every state functional the variance engine reads, for all three axes.
struct MomentTable {
  int n = 0;
  std::array<DirectionMoments, 3> dir;

  const DirectionMoments& operator[](Direction d) const { return dir[index_of(d)]; }
  const MomentAggregates& agg(Direction d) const { return dir[index_of(d)].aggregates; }
  DirectionAggregates aggregates() const {
    return {dir[0].aggregates, dir[1].aggregates, dir[2].aggregates};
  }
  double pair(Direction d, int i, int j) const {
    return dir[index_of(d)].pair[static_cast<std::size_t>(i) * n + j];
  }

  /// Throws std::logic_error naming the first violated invariant.
  void validate(double tol = 1e-9) const;
};

MomentTable moment_table(const StateModel& state);

/// Table of p * base + (1 - p) * (maximally mixed state); matches
/// moment_table(DepolarizedMixture(base, p)) without building the state.
MomentTable depolarize(const MomentTable& base, double visibility);

/// Same mixing applied directly to the aggregates of one direction.
MomentAggregates depolarize(const MomentAggregates& base, int n, double visibility);

/// Recomputes the aggregates from the per-qubit entries.
MomentAggregates aggregate(const std::array<double, 4>& moments, const std::vector<double>& single,
                           const std::vector<double>& pair, int n);

}  // namespace spinsq
