#pragma once

// Exact laws of the estimators by exhaustive enumeration of every possible
// data set. The estimators here are written from their textbook definitions
// (per-run sums, double sums over distinct runs) rather than the factored
// integer kernels the library uses.

#include <functional>
#include <utility>
#include <vector>

#include "oracle.hpp"

namespace oracle {

struct EstimatorLaws {
  Exact second_moment;  // <J^2> estimate
  Exact variance;       // (dJ)^2 or <J>^2 estimate, depending on the scheme
};

// Total spin: K i.i.d. draws of m.
inline EstimatorLaws enumerate_ts(const std::vector<double>& p, int n, int k) {
  const auto dist = total_spin_distribution(p, n);
  EstimatorLaws out;
  std::vector<double> ms(static_cast<std::size_t>(k));
  std::function<void(int, long double)> rec = [&](int r, long double prob) {
    if (prob == 0) return;
    if (r == k) {
      double mean = 0, sq = 0;
      for (double m : ms) mean += m, sq += m * m;
      mean /= k;
      double ss = 0;
      for (double m : ms) ss += (m - mean) * (m - mean);
      out.second_moment.add(prob, sq / k);
      out.variance.add(prob, ss / (k - 1));
      return;
    }
    for (int up = 0; up <= n; ++up) {
      ms[static_cast<std::size_t>(r)] = 0.5 * (2 * up - n);
      rec(r + 1, prob * dist[static_cast<std::size_t>(up)]);
    }
  };
  rec(0, 1.0L);
  return out;
}

// All ordered pairs i != j, K joint runs each. variance = (dJ)^2 estimate.
inline EstimatorLaws enumerate_ap(const std::vector<double>& p, int n, int k) {
  std::vector<std::pair<int, int>> slots;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) slots.emplace_back(i, j);
  std::vector<std::array<double, 4>> law;
  for (auto [i, j] : slots) law.push_back(joint(p, i, j));
  const int records = static_cast<int>(slots.size()) * k;
  std::vector<long long> a(static_cast<std::size_t>(k), 0), b(static_cast<std::size_t>(k), 0);
  long long s = 0;
  EstimatorLaws out;
  std::function<void(int, long double)> rec = [&](int r, long double prob) {
    if (prob == 0) return;
    if (r == records) {
      const double j2 = n / 4.0 + static_cast<double>(s) / (4.0 * k);
      double cross = 0;
      for (int x = 0; x < k; ++x)
        for (int y = 0; y < k; ++y)
          if (x != y) cross += static_cast<double>(a[x] * b[y]);
      const double jsq = cross / (4.0 * (n - 1) * (n - 1) * k * (k - 1));
      out.second_moment.add(prob, j2);
      out.variance.add(prob, j2 - jsq);
      return;
    }
    const auto& pr = law[static_cast<std::size_t>(r / k)];
    const int rep = r % k;
    for (int o = 0; o < 4; ++o) {
      const int u = o & 2 ? -1 : 1;
      const int v = o & 1 ? -1 : 1;
      s += u * v, a[rep] += u, b[rep] += v;
      rec(r + 1, prob * pr[static_cast<std::size_t>(o)]);
      s -= u * v, a[rep] -= u, b[rep] -= v;
    }
  };
  rec(0, 1.0L);
  return out;
}

// All N^2 cells (i, j), K/2 runs of qubit i and K/2 separate runs of qubit j.
// variance = <J>^2 estimate.
inline Exact enumerate_split(const std::vector<double>& p, int n, int k) {
  const int reps = k / 2;
  std::vector<double> up(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) up[static_cast<std::size_t>(q)] = prob_up(p, q);
  const int records = n * n * reps;
  long long s = 0;
  Exact out;
  std::function<void(int, long double)> rec = [&](int r, long double prob) {
    if (prob == 0) return;
    if (r == records) {
      out.add(prob, static_cast<double>(s) / (2.0 * k));
      return;
    }
    const int cell = r / reps;
    const double pi = up[static_cast<std::size_t>(cell / n)];
    const double pj = up[static_cast<std::size_t>(cell % n)];
    for (int o = 0; o < 4; ++o) {
      const int u = o & 2 ? -1 : 1;
      const int v = o & 1 ? -1 : 1;
      const double w = (u > 0 ? pi : 1 - pi) * (v > 0 ? pj : 1 - pj);
      s += u * v;
      rec(r + 1, prob * w);
      s -= u * v;
    }
  };
  rec(0, 1.0L);
  return out;
}

// L slots with a uniformly drawn ordered pair i != j, K joint runs per slot.
inline EstimatorLaws enumerate_rp(const std::vector<double>& p, int n, int l, int k) {
  std::vector<std::array<double, 4>> law;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) law.push_back(joint(p, i, j));
  const double pick = 1.0 / static_cast<double>(law.size());
  std::vector<long long> a(static_cast<std::size_t>(l), 0), b(static_cast<std::size_t>(l), 0);
  long long s = 0;
  EstimatorLaws out;
  std::function<void(int, int, int, long double)> rec = [&](int slot, int cell, int rep,
                                                           long double prob) {
    if (prob == 0) return;
    if (slot == l) {
      const double j2 =
          n / 4.0 + static_cast<double>(n) * (n - 1) * static_cast<double>(s) / (4.0 * k * l);
      double cross = 0;
      for (int x = 0; x < l; ++x)
        for (int y = 0; y < l; ++y)
          if (x != y) cross += static_cast<double>(a[x] * b[y]);
      const double jsq =
          l > 1 ? static_cast<double>(n) * n * cross / (4.0 * k * k * l * (l - 1)) : 0.0;
      out.second_moment.add(prob, j2);
      out.variance.add(prob, j2 - jsq);
      return;
    }
    if (cell < 0) {
      for (std::size_t c = 0; c < law.size(); ++c) rec(slot, static_cast<int>(c), 0, prob * pick);
      return;
    }
    if (rep == k) {
      rec(slot + 1, -1, 0, prob);
      return;
    }
    for (int o = 0; o < 4; ++o) {
      const int u = o & 2 ? -1 : 1;
      const int v = o & 1 ? -1 : 1;
      s += u * v, a[slot] += u, b[slot] += v;
      rec(slot, cell, rep + 1, prob * law[static_cast<std::size_t>(cell)][static_cast<std::size_t>(o)]);
      s -= u * v, a[slot] -= u, b[slot] -= v;
    }
  };
  rec(0, -1, 0, 1.0L);
  return out;
}

// L slots with a uniform cell (i, j) over N^2, K/2 separate runs per qubit.
inline Exact enumerate_rsplit(const std::vector<double>& p, int n, int l, int k) {
  const int reps = k / 2;
  std::vector<double> up(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) up[static_cast<std::size_t>(q)] = prob_up(p, q);
  const double pick = 1.0 / (static_cast<double>(n) * n);
  long long s = 0;
  Exact out;
  std::function<void(int, int, int, long double)> rec = [&](int slot, int cell, int rep,
                                                           long double prob) {
    if (prob == 0) return;
    if (slot == l) {
      out.add(prob, static_cast<double>(n) * n * static_cast<double>(s) / (2.0 * k * l));
      return;
    }
    if (cell < 0) {
      for (int c = 0; c < n * n; ++c) rec(slot, c, 0, prob * pick);
      return;
    }
    if (rep == reps) {
      rec(slot + 1, -1, 0, prob);
      return;
    }
    const double pi = up[static_cast<std::size_t>(cell / n)];
    const double pj = up[static_cast<std::size_t>(cell % n)];
    for (int o = 0; o < 4; ++o) {
      const int u = o & 2 ? -1 : 1;
      const int v = o & 1 ? -1 : 1;
      s += u * v;
      rec(slot, cell, rep + 1, prob * (u > 0 ? pi : 1 - pi) * (v > 0 ? pj : 1 - pj));
      s -= u * v;
    }
  };
  rec(0, -1, 0, 1.0L);
  return out;
}

}  // namespace oracle
