#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "spinsq/types.hpp"
#include "spinsq/variance.hpp"

namespace spinsq {

enum class ViolationSide { Above, Below };

std::string to_string(ViolationSide s);

/// Value every fully separable state respects. Entanglement is signalled by
/// a parameter on `side` of `bound`. Kind A is a bound for all states and
/// only serves as a consistency check.
struct SeparableBound {
  Parameter parameter;
  int n = 0;
  double bound = 0.0;
  ViolationSide side = ViolationSide::Above;
};

SeparableBound separable_bound(const Parameter& parameter, int n);

/// One-sided Cantelli bound V / (V + t^2) on P(X - E[X] >= t); by symmetry
/// also on P(X - E[X] <= -t).
double cantelli_bound(double variance, double t);

struct PValueBound {
  double value = 1.0;  // 1 when there is no violation
  bool violation = false;
  double margin = 0.0;  // |estimate - bound| on the violating side, else 0
};

/// Upper bound on the p-value of the separability hypothesis given an
/// estimate and the estimator variance under the null.
PValueBound p_value_bound(double estimate, const SeparableBound& bound, double variance);

/// Visibility above which the noisy half-filled Dicke state violates the
/// kind-C inequality: (N-1)/(2N-1).
double critical_noise(int n);

struct UnitIntervalMax {
  double argmax = 0.0;
  double value = 0.0;
};

/// Maximizes f on [0, 1]: grid of step 1e-3, then golden-section refinement
/// to 1e-6 around the best grid point. Grid points are evaluated in
/// parallel; the result does not depend on the thread count.
UnitIntervalMax maximize_on_unit_interval(const std::function<double(double)>& f);

/// Largest variance over the family p |D_{N,N/2}><D_{N,N/2}| + (1-p) 1/2^N.
UnitIntervalMax max_variance_over_noise(Scheme scheme, const Parameter& parameter, int n,
                                        const Budget& budget, const VarianceOptions& opts = {});

struct SampleSizeResult {
  Scheme scheme = Scheme::TS;
  Parameter parameter;
  int n = 0;
  double t = 0.0;
  double gamma = 0.0;
  double worst_case_p = 0.0;
  double worst_case_variance = 0.0;
  /// K (TS, AP1, AP2), L (RP1 with K = 1) or the product K L (RP2).
  std::int64_t budget = 0;
  Budget detail;
  std::int64_t total_preparations = 0;
  double bound_at_budget = 0.0;
  /// Bound at the previous grid point, or NaN when `budget` is the minimum.
  double bound_at_previous = 0.0;
};

/// Budget grid of a scheme: index i >= 1 maps to the i-th smallest valid
/// budget (TS/AP1: K = i + 1; AP2: K = 2i; RP1: K = 1, L = i + 1;
/// RP2: K = 2, L = i + 1).
Budget budget_at(Scheme scheme, std::int64_t index);
std::int64_t reported_budget(Scheme scheme, const Budget& budget);

/// Smallest budget whose worst-case Cantelli bound is at most 1 - gamma.
SampleSizeResult required_budget(Scheme scheme, const Parameter& parameter, int n, double t,
                                 double gamma);

/// Margin rules: a plain number, "<f>halfN" (f N/2) or "<f>N" (f N).
double parse_t_rule(const std::string& rule, int n);

}  // namespace spinsq
