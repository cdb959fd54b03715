#include "spinsq/moment_table.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spinsq {

double MomentAggregates::moment(int order) const {
  switch (order) {
    case 1:
      return j1;
    case 2:
      return j2;
    case 3:
      return j3;
    case 4:
      return j4;
    default:
      throw std::out_of_range("moment order " + std::to_string(order) +
                              " out of range (supported: 1..4)");
  }
}

MomentAggregates aggregate(const std::array<double, 4>& moments, const std::vector<double>& single,
                           const std::vector<double>& pair, int n) {
  MomentAggregates a;
  a.j1 = moments[0];
  a.j2 = moments[1];
  a.j3 = moments[2];
  a.j4 = moments[3];
  for (int i = 0; i < n; ++i) {
    const double ei = single[static_cast<std::size_t>(i)];
    a.sum_single_sq += ei * ei;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double c = pair[static_cast<std::size_t>(i) * n + j];
      a.sum_pair += c;
      a.sum_pair_sq += c * c;
      a.mixed += c * (ei + single[static_cast<std::size_t>(j)]);
    }
  }
  return a;
}

MomentTable moment_table(const StateModel& state) {
  MomentTable t;
  t.n = state.num_qubits();
  const int n = t.n;
  for (Direction d : kDirections) {
    DirectionMoments& dm = t.dir[index_of(d)];
    for (int k = 1; k <= 4; ++k) dm.moments[static_cast<std::size_t>(k - 1)] = state.moment(d, k);
    dm.single.resize(static_cast<std::size_t>(n));
    dm.pair.assign(static_cast<std::size_t>(n) * n, 1.0);
    for (int i = 0; i < n; ++i) {
      dm.single[static_cast<std::size_t>(i)] = state.single_expectation(d, i);
      for (int j = i + 1; j < n; ++j) {
        const double c = state.pair_correlation(d, i, j);
        dm.pair[static_cast<std::size_t>(i) * n + j] = c;
        dm.pair[static_cast<std::size_t>(j) * n + i] = c;
      }
    }
    dm.aggregates = aggregate(dm.moments, dm.single, dm.pair, n);
  }
  return t;
}

MomentTable depolarize(const MomentTable& base, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("visibility p must lie in [0, 1]");
  MomentTable t = base;
  const int n = base.n;
  for (Direction d : kDirections) {
    DirectionMoments& dm = t.dir[index_of(d)];
    for (int k = 1; k <= 4; ++k) {
      auto& mk = dm.moments[static_cast<std::size_t>(k - 1)];
      mk = p * mk + (1.0 - p) * DepolarizedMixture::maximally_mixed_moment(n, k);
    }
    for (double& e : dm.single) e *= p;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j) dm.pair[static_cast<std::size_t>(i) * n + j] *= p;
      }
    }
    dm.aggregates = aggregate(dm.moments, dm.single, dm.pair, n);
  }
  return t;
}

MomentAggregates depolarize(const MomentAggregates& base, int n, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("visibility p must lie in [0, 1]");
  const auto mix = [&](double v, int order) {
    return p * v + (1.0 - p) * DepolarizedMixture::maximally_mixed_moment(n, order);
  };
  MomentAggregates a;
  a.j1 = mix(base.j1, 1);
  a.j2 = mix(base.j2, 2);
  a.j3 = mix(base.j3, 3);
  a.j4 = mix(base.j4, 4);
  // Single-qubit and pair expectations scale linearly with p.
  a.sum_single_sq = p * p * base.sum_single_sq;
  a.sum_pair = p * base.sum_pair;
  a.sum_pair_sq = p * p * base.sum_pair_sq;
  a.mixed = p * p * base.mixed;
  return a;
}

void MomentTable::validate(double tol) const {
  auto fail = [](const std::string& what, Direction d) {
    throw std::logic_error("moment table invariant violated (" + std::string(1, to_char(d)) +
                           "): " + what);
  };
  double total_j2 = 0.0;
  for (Direction d : kDirections) {
    const DirectionMoments& dm = (*this)[d];
    for (double e : dm.single) {
      if (std::abs(e) > 1.0 + tol) fail("|<sigma_i>| > 1", d);
    }
    for (int i = 0; i < n; ++i) {
      if (std::abs(pair(d, i, i) - 1.0) > tol) fail("pair diagonal != 1", d);
      for (int j = 0; j < n; ++j) {
        const double c = pair(d, i, j);
        if (std::abs(c) > 1.0 + tol) fail("|<sigma_i sigma_j>| > 1", d);
        if (std::abs(c - pair(d, j, i)) > tol) fail("pair correlations not symmetric", d);
      }
    }
    const double j2 = dm.moments[1];
    const double scale = std::max(1.0, std::abs(j2));
    if (std::abs(j2 - (0.25 * n + 0.25 * dm.aggregates.sum_pair)) > tol * scale) {
      fail("<J^2> != N/4 + sum_{i!=j} <s_i s_j> / 4", d);
    }
    if (j2 < dm.moments[0] * dm.moments[0] - tol * scale) fail("<J^2> < <J>^2", d);
    total_j2 += j2;
  }
  if (total_j2 > 0.25 * n * (n + 2) * (1.0 + tol)) fail("sum_a <J_a^2> > N(N+2)/4", Direction::Z);
}

}  // namespace spinsq
