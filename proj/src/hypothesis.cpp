#include "spinsq/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "spinsq/schemes.hpp"

namespace spinsq {

std::string to_string(ViolationSide s) { return s == ViolationSide::Above ? "above" : "below"; }

SeparableBound separable_bound(const Parameter& parameter, int n) {
  if (n < 2) throw std::invalid_argument("separable bounds need N >= 2 (got " + std::to_string(n) + ")");
  const double nn = n;
  SeparableBound b;
  b.parameter = parameter;
  b.n = n;
  switch (parameter.kind) {
    case ParameterKind::A:
      b.bound = nn * (nn + 2.0) / 4.0;
      b.side = ViolationSide::Above;
      break;
    case ParameterKind::B:
      b.bound = nn / 2.0;
      b.side = ViolationSide::Below;
      break;
    case ParameterKind::C:
      b.bound = nn / 2.0;
      b.side = ViolationSide::Above;
      break;
    case ParameterKind::D:
      b.bound = nn * (nn - 2.0) / 4.0;
      b.side = ViolationSide::Below;
      break;
  }
  return b;
}

double cantelli_bound(double variance, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("Cantelli margin t must be positive");
  if (!(variance >= 0.0)) throw std::invalid_argument("variance must be non-negative");
  return variance / (variance + t * t);
}

PValueBound p_value_bound(double estimate, const SeparableBound& bound, double variance) {
  PValueBound r;
  const double signed_margin =
      bound.side == ViolationSide::Above ? estimate - bound.bound : bound.bound - estimate;
  if (!(signed_margin > 0.0)) return r;
  r.violation = true;
  r.margin = signed_margin;
  r.value = cantelli_bound(variance, signed_margin);
  return r;
}

double critical_noise(int n) {
  if (n < 2) throw std::invalid_argument("critical noise needs N >= 2");
  return (n - 1.0) / (2.0 * n - 1.0);
}

UnitIntervalMax maximize_on_unit_interval(const std::function<double(double)>& f) {
  constexpr int kGrid = 1000;
  std::vector<double> values(kGrid + 1);
  // One serial call first so that a throwing f fails here rather than
  // inside the parallel region.
  values[kGrid] = f(1.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < kGrid; ++i) values[static_cast<std::size_t>(i)] = f(i / double(kGrid));

  int best = 0;
  for (int i = 1; i <= kGrid; ++i) {
    if (values[static_cast<std::size_t>(i)] > values[static_cast<std::size_t>(best)]) best = i;
  }
  UnitIntervalMax out{best / double(kGrid), values[static_cast<std::size_t>(best)]};

  double lo = std::max(0.0, (best - 1) / double(kGrid));
  double hi = std::min(1.0, (best + 1) / double(kGrid));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > 1e-6) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  const double xm = 0.5 * (lo + hi);
  const double fm = f(xm);
  if (fm > out.value) out = {xm, fm};
  return out;
}

UnitIntervalMax max_variance_over_noise(Scheme scheme, const Parameter& parameter, int n,
                                        const Budget& budget, const VarianceOptions& opts) {
  validate_budget(scheme, budget);
  if (n < 2 || n % 2 != 0) {
    throw std::invalid_argument("the noisy Dicke family needs an even N >= 2");
  }
  const DirectionAggregates base = moment_table(DickeState(n, n / 2)).aggregates();
  return maximize_on_unit_interval([&](double p) {
    DirectionAggregates mixed;
    for (std::size_t a = 0; a < 3; ++a) mixed[a] = depolarize(base[a], n, p);
    return var_parameter(mixed, n, scheme, parameter, budget, opts).value;
  });
}

Budget budget_at(Scheme scheme, std::int64_t index) {
  if (index < 1) throw std::invalid_argument("budget grid index starts at 1");
  const int i = static_cast<int>(index);
  switch (scheme) {
    case Scheme::TS:
    case Scheme::AP1:
      return {i + 1, 0};
    case Scheme::AP2:
      return {2 * i, 0};
    case Scheme::RP1:
      return {1, i + 1};
    case Scheme::RP2:
      return {2, i + 1};
  }
  return {};
}

std::int64_t reported_budget(Scheme scheme, const Budget& b) {
  switch (scheme) {
    case Scheme::TS:
    case Scheme::AP1:
    case Scheme::AP2:
      return b.k;
    case Scheme::RP1:
      return b.l;
    case Scheme::RP2:
      return static_cast<std::int64_t>(b.k) * b.l;
  }
  return 0;
}

SampleSizeResult required_budget(Scheme scheme, const Parameter& parameter, int n, double t,
                                 double gamma) {
  if (!(t > 0.0)) throw std::invalid_argument("margin t must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  const double target = 1.0 - gamma;
  auto bound_at = [&](std::int64_t index, UnitIntervalMax* worst) {
    const UnitIntervalMax m = max_variance_over_noise(scheme, parameter, n, budget_at(scheme, index));
    if (worst) *worst = m;
    return cantelli_bound(m.value, t);
  };

  std::int64_t lo = 0;  // last index known to fail (0 = none)
  std::int64_t hi = 1;
  while (bound_at(hi, nullptr) > target) {
    lo = hi;
    if (hi > (std::int64_t{1} << 40)) {
      throw std::logic_error("required_budget: variance does not vanish with the budget");
    }
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (bound_at(mid, nullptr) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  SampleSizeResult r;
  r.scheme = scheme;
  r.parameter = parameter;
  r.n = n;
  r.t = t;
  r.gamma = gamma;
  UnitIntervalMax worst;
  r.bound_at_budget = bound_at(hi, &worst);
  r.worst_case_p = worst.argmax;
  r.worst_case_variance = worst.value;
  r.detail = budget_at(scheme, hi);
  r.budget = reported_budget(scheme, r.detail);
  r.total_preparations = sample_cost(scheme, parameter, n, r.detail);
  r.bound_at_previous =
      hi > 1 ? bound_at(hi - 1, nullptr) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

double parse_t_rule(const std::string& rule, int n) {
  auto number = [&](const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = s.empty() ? 1.0 : std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (!s.empty() && pos != s.size()) {
      throw std::invalid_argument("malformed t rule '" + rule + "'");
    }
    return v;
  };
  double t = 0.0;
  const std::string half = "halfN";
  if (rule.size() >= half.size() && rule.compare(rule.size() - half.size(), half.size(), half) == 0) {
    t = number(rule.substr(0, rule.size() - half.size())) * n / 2.0;
  } else if (!rule.empty() && rule.back() == 'N') {
    t = number(rule.substr(0, rule.size() - 1)) * n;
  } else {
    if (rule.empty()) throw std::invalid_argument("empty t rule");
    t = number(rule);
  }
  if (!(t > 0.0)) throw std::invalid_argument("t rule '" + rule + "' gives a non-positive margin");
  return t;
}

}  // namespace spinsq
