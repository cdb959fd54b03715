#pragma once

#include <array>
#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>

#include "spinsq/moment_table.hpp"
#include "spinsq/types.hpp"

namespace spinsq {

using Rational = boost::multiprecision::cpp_rational;

/// Raised for estimator/budget combinations without an analytic variance
/// (the random-pairs variance estimator with K != 1).
class UnsupportedAnalyticCase : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Building blocks. `a` holds the aggregates of one direction.

double var_J2_ts(const MomentAggregates& a, int k);
double var_deltaJ2_ts(const MomentAggregates& a, int k);
double var_J2_ap(const MomentAggregates& a, int n, int k);
double var_deltaJ2_ap(const MomentAggregates& a, int n, int k);
double var_Jsq_split(const MomentAggregates& a, int n, int k);
double var_J2_rp(const MomentAggregates& a, int n, int l, int k);
/// K = 1 only; other K throw UnsupportedAnalyticCase.
double var_deltaJ2_rp(const MomentAggregates& a, int n, int l, int k = 1);
double var_Jsq_rsplit(const MomentAggregates& a, int n, int l, int k);

/// var_J2_rp and var_Jsq_rsplit treat the K runs of one random slot as if
/// each had its own pair. Runs sharing a slot are correlated through the
/// pair draw unless all pairs look alike (permutation-symmetric states), so
/// for K > 1 (K > 2 for the split) the formulas miss a term. These add it.
double var_J2_rp_exact(const MomentAggregates& a, int n, int l, int k);
double var_Jsq_rsplit_exact(const MomentAggregates& a, int n, int l, int k);

inline double var_J2_ts(const MomentTable& t, Direction d, int k) { return var_J2_ts(t.agg(d), k); }
inline double var_deltaJ2_ts(const MomentTable& t, Direction d, int k) {
  return var_deltaJ2_ts(t.agg(d), k);
}
inline double var_J2_ap(const MomentTable& t, Direction d, int k) {
  return var_J2_ap(t.agg(d), t.n, k);
}
inline double var_deltaJ2_ap(const MomentTable& t, Direction d, int k) {
  return var_deltaJ2_ap(t.agg(d), t.n, k);
}
inline double var_Jsq_split(const MomentTable& t, Direction d, int k) {
  return var_Jsq_split(t.agg(d), t.n, k);
}
inline double var_J2_rp(const MomentTable& t, Direction d, int l, int k) {
  return var_J2_rp(t.agg(d), t.n, l, k);
}
inline double var_deltaJ2_rp(const MomentTable& t, Direction d, int l, int k = 1) {
  return var_deltaJ2_rp(t.agg(d), t.n, l, k);
}
inline double var_Jsq_rsplit(const MomentTable& t, Direction d, int l, int k) {
  return var_Jsq_rsplit(t.agg(d), t.n, l, k);
}

struct VarianceOptions {
  /// Use the *_exact random-slot forms instead of the plain ones.
  bool exact_random_slots = false;
};

struct VarianceReport {
  Scheme scheme = Scheme::TS;
  Parameter parameter;
  int n = 0;
  Budget budget;
  double value = 0.0;
  /// Weighted per-direction terms; they sum to `value`.
  std::array<double, 3> contributions{};
  std::array<MomentAggregates, 3> aggregates{};
};

/// Variance of the <J_d^2> estimate of a scheme.
double var_second_moment(const MomentAggregates& a, Scheme scheme, int n, const Budget& budget,
                         const VarianceOptions& opts = {});
/// Variance of the (dJ_d)^2 estimate of a scheme.
double var_variance(const MomentAggregates& a, Scheme scheme, int n, const Budget& budget,
                    const VarianceOptions& opts = {});

VarianceReport var_parameter(const DirectionAggregates& aggregates, int n, Scheme scheme,
                             const Parameter& parameter, const Budget& budget,
                             const VarianceOptions& opts = {});
VarianceReport var_parameter(const MomentTable& t, Scheme scheme, const Parameter& parameter,
                             const Budget& budget, const VarianceOptions& opts = {});

/// Exact parameter value of the state described by the table.
double parameter_value(const MomentTable& t, const Parameter& parameter);
double parameter_value(const DirectionAggregates& aggregates, int n, const Parameter& parameter);

enum class StateFamily { Singlet, DickeHalf };

std::string to_string(StateFamily f);

/// Polynomial closed forms for the singlet (parameters B and D) and the
/// half-filled Dicke state (parameter C). Throws std::invalid_argument for
/// other combinations or odd N.
Rational closed_form_exact(Scheme scheme, const Parameter& parameter, StateFamily family, int n,
                           const Budget& budget);
double closed_form(Scheme scheme, const Parameter& parameter, StateFamily family, int n,
                   const Budget& budget);

}  // namespace spinsq
