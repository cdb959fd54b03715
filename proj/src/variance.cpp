#include "spinsq/variance.hpp"

#include <algorithm>
#include <string>

namespace spinsq {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void require_k(int k, int min, const char* what) {
  require(k >= min, std::string(what) + " requires K >= " + std::to_string(min) + " (got " +
                        std::to_string(k) + ")");
}

void require_even(int k, const char* what) {
  require(k >= 2 && k % 2 == 0,
          std::string(what) + " requires an even K >= 2 (got " + std::to_string(k) + ")");
}

void require_l(int l, int min, const char* what) {
  require(l >= min, std::string(what) + " requires L >= " + std::to_string(min) + " (got " +
                        std::to_string(l) + ")");
}

}  // namespace

// ------------------------------------------------------------------ total spin

double var_J2_ts(const MomentAggregates& a, int k) {
  require_k(k, 1, "var_J2_ts");
  return (a.j4 - a.j2 * a.j2) / k;
}

double var_deltaJ2_ts(const MomentAggregates& a, int k) {
  require_k(k, 2, "var_deltaJ2_ts");
  const double kk = k;
  const double kk1 = kk * (kk - 1.0);
  const double j1 = a.j1, j2 = a.j2, j3 = a.j3, j4 = a.j4;
  const double v = (j4 - j2 * j2) / kk - 4.0 * j3 * j1 / kk + 2.0 * j2 * j2 / kk1 +
                   4.0 * (2.0 * kk - 3.0) * j2 * j1 * j1 / kk1 -
                   2.0 * (2.0 * kk - 3.0) * j1 * j1 * j1 * j1 / kk1;
  return std::max(v, 0.0);
}

// ------------------------------------------------------------------- all pairs

double var_J2_ap(const MomentAggregates& a, int n, int k) {
  require_k(k, 1, "var_J2_ap");
  return (n * (n - 1.0) - a.sum_pair_sq) / (16.0 * k);
}

double var_deltaJ2_ap(const MomentAggregates& a, int n, int k) {
  require_k(k, 2, "var_deltaJ2_ap");
  // Per run k the data give three sums over the N(N-1) pair slots:
  //   A = sum_P s_{P1},  B = sum_P s_{P2},  C = sum_P s_{P1} s_{P2}.
  // The estimator is N/4 + mean(C) - U / (K (K-1) (N-1)^2) with
  // U = sum_{k != l} A_k B_l, and the runs are i.i.d.
  const double nn = n;
  const double kk = k;
  const double mu = (nn - 1.0) * a.j1;
  const double var_a = (nn - 1.0) * (nn - a.sum_single_sq) / 4.0;
  const double cov_ab = a.j2 - nn / 4.0 - a.j1 * a.j1 + a.sum_single_sq / 4.0;
  const double ea2 = var_a + mu * mu;
  const double eab = cov_ab + mu * mu;
  const double var_c = (nn * (nn - 1.0) - a.sum_pair_sq) / 16.0;
  const double cov_ca = (2.0 * (nn - 1.0) * a.j1 - 0.5 * a.mixed) / 8.0;
  const double pairs = kk * (kk - 1.0);
  const double mu2 = mu * mu;
  const double var_u = pairs * (ea2 * ea2 + eab * eab + (kk - 2.0) * 2.0 * (ea2 + eab) * mu2 +
                                (kk - 2.0) * (kk - 3.0) * mu2 * mu2) -
                       pairs * pairs * mu2 * mu2;
  const double cov_cu = pairs * 2.0 * mu * cov_ca;
  const double c = 1.0 / (pairs * (nn - 1.0) * (nn - 1.0));
  const double v = var_c / kk + c * c * var_u - 2.0 * (c / kk) * cov_cu;
  return std::max(v, 0.0);
}

double var_Jsq_split(const MomentAggregates& a, int n, int k) {
  require_even(k, "var_Jsq_split");
  const double q = a.sum_single_sq;
  return (static_cast<double>(n) * n - q * q) / (8.0 * k);
}

// ---------------------------------------------------------------- random pairs

double var_J2_rp(const MomentAggregates& a, int n, int l, int k) {
  require_l(l, 1, "var_J2_rp");
  require_k(k, 1, "var_J2_rp");
  const double nn = n;
  return (nn * nn * nn * (nn - 2.0) / 16.0 - a.j2 * a.j2 + 0.5 * nn * a.j2) /
         (static_cast<double>(k) * l);
}

double var_J2_rp_exact(const MomentAggregates& a, int n, int l, int k) {
  const double nn = n;
  const double shift = a.j2 - nn / 4.0;
  const double slot = nn * (nn - 1.0) * a.sum_pair_sq / 16.0 - shift * shift;
  return var_J2_rp(a, n, l, k) + (k - 1.0) / (static_cast<double>(k) * l) * slot;
}

double var_deltaJ2_rp(const MomentAggregates& a, int n, int l, int k) {
  if (k != 1) {
    throw UnsupportedAnalyticCase(
        "analytic variance of the random-pairs variance estimator exists only for K = 1 (got K = " +
        std::to_string(k) + "); use Monte Carlo for other K");
  }
  require_l(l, 2, "var_deltaJ2_rp");
  const double nn = n;
  const double ll = l;
  const double j1 = a.j1;
  const double j2 = a.j2;
  const double n1 = nn - 1.0;
  const double g = ll * n1 * n1 - 2.0 * nn * n1 - 1.0;
  const double bracket =
      -32.0 * j1 * j1 * j1 * j1 * (2.0 * ll - 3.0) * n1 * n1 -
      8.0 * j1 * j1 * n1 * (4.0 * j2 * (-3.0 * ll * nn + 2.0 * ll + 4.0 * nn - 2.0) +
                            nn * nn * (ll * nn - 2.0)) -
      16.0 * j2 * j2 * g + 8.0 * j2 * nn * g +
      nn * nn * nn * (ll * (nn - 2.0) * n1 * n1 + nn * (2.0 * nn - 3.0) + 2.0);
  return std::max(bracket / (16.0 * (ll - 1.0) * ll * n1 * n1), 0.0);
}

double var_Jsq_rsplit(const MomentAggregates& a, int n, int l, int k) {
  require_even(k, "var_Jsq_rsplit");
  require_l(l, 1, "var_Jsq_rsplit");
  const double n4 = static_cast<double>(n) * n * n * n;
  const double j1 = a.j1;
  return (n4 / 8.0 - 2.0 * j1 * j1 * j1 * j1) / (static_cast<double>(k) * l);
}

double var_Jsq_rsplit_exact(const MomentAggregates& a, int n, int l, int k) {
  const double nn = n;
  const double q = a.sum_single_sq;
  const double j1 = a.j1;
  const double slot = nn * nn * q * q - 16.0 * j1 * j1 * j1 * j1;
  return var_Jsq_rsplit(a, n, l, k) + (k - 2.0) * slot / (16.0 * k * l);
}

// ----------------------------------------------------------------- composition

double var_second_moment(const MomentAggregates& a, Scheme scheme, int n, const Budget& b,
                         const VarianceOptions& opts) {
  switch (scheme) {
    case Scheme::TS:
      return var_J2_ts(a, b.k);
    case Scheme::AP1:
    case Scheme::AP2:
      return var_J2_ap(a, n, b.k);
    case Scheme::RP1:
    case Scheme::RP2:
      return opts.exact_random_slots ? var_J2_rp_exact(a, n, b.l, b.k) : var_J2_rp(a, n, b.l, b.k);
  }
  return 0.0;
}

double var_variance(const MomentAggregates& a, Scheme scheme, int n, const Budget& b,
                    const VarianceOptions& opts) {
  switch (scheme) {
    case Scheme::TS:
      return var_deltaJ2_ts(a, b.k);
    case Scheme::AP1:
      return var_deltaJ2_ap(a, n, b.k);
    case Scheme::AP2:
      // Independent data sets for <J^2> and <J>^2.
      return var_J2_ap(a, n, b.k) + var_Jsq_split(a, n, b.k);
    case Scheme::RP1:
      return var_deltaJ2_rp(a, n, b.l, b.k);
    case Scheme::RP2:
      return opts.exact_random_slots
                 ? var_J2_rp_exact(a, n, b.l, b.k) + var_Jsq_rsplit_exact(a, n, b.l, b.k)
                 : var_J2_rp(a, n, b.l, b.k) + var_Jsq_rsplit(a, n, b.l, b.k);
  }
  return 0.0;
}

VarianceReport var_parameter(const MomentTable& t, Scheme scheme, const Parameter& parameter,
                             const Budget& budget, const VarianceOptions& opts) {
  return var_parameter(t.aggregates(), t.n, scheme, parameter, budget, opts);
}

VarianceReport var_parameter(const DirectionAggregates& aggs, int n, Scheme scheme,
                             const Parameter& parameter, const Budget& budget,
                             const VarianceOptions& opts) {
  parameter.validate();
  validate_budget(scheme, budget);
  VarianceReport r;
  r.scheme = scheme;
  r.parameter = parameter;
  r.n = n;
  r.budget = budget;
  const double w = (n - 1.0) * (n - 1.0);
  for (Direction d : kDirections) {
    const MomentAggregates& a = aggs[index_of(d)];
    r.aggregates[index_of(d)] = a;
    double c = 0.0;
    switch (parameter.kind) {
      case ParameterKind::A:
        c = var_second_moment(a, scheme, n, budget, opts);
        break;
      case ParameterKind::B:
        c = var_variance(a, scheme, n, budget, opts);
        break;
      case ParameterKind::C:
        c = d == parameter.m() ? w * var_variance(a, scheme, n, budget, opts)
                               : var_second_moment(a, scheme, n, budget, opts);
        break;
      case ParameterKind::D:
        c = d == parameter.m() ? var_second_moment(a, scheme, n, budget, opts)
                               : w * var_variance(a, scheme, n, budget, opts);
        break;
    }
    r.contributions[index_of(d)] = c;
  }
  r.value = r.contributions[0] + r.contributions[1] + r.contributions[2];
  return r;
}

double parameter_value(const MomentTable& t, const Parameter& parameter) {
  return parameter_value(t.aggregates(), t.n, parameter);
}

double parameter_value(const DirectionAggregates& aggs, int n, const Parameter& parameter) {
  const auto j2 = [&](Direction d) { return aggs[index_of(d)].j2; };
  const auto var = [&](Direction d) {
    const MomentAggregates& a = aggs[index_of(d)];
    return a.j2 - a.j1 * a.j1;
  };
  const double n1 = n - 1.0;
  switch (parameter.kind) {
    case ParameterKind::A:
      return j2(Direction::X) + j2(Direction::Y) + j2(Direction::Z);
    case ParameterKind::B:
      return var(Direction::X) + var(Direction::Y) + var(Direction::Z);
    case ParameterKind::C:
      return j2(parameter.k()) + j2(parameter.l()) - n1 * var(parameter.m());
    case ParameterKind::D:
      return n1 * (var(parameter.k()) + var(parameter.l())) - j2(parameter.m());
  }
  return 0.0;
}

// ---------------------------------------------------------------- closed forms

std::string to_string(StateFamily f) {
  return f == StateFamily::Singlet ? "singlet" : "dicke_half";
}

namespace {

Rational ipow(const Rational& x, int e) {
  Rational r = 1;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

Rational closed_singlet_b(Scheme s, const Rational& N, const Rational& K, const Rational& L) {
  switch (s) {
    case Scheme::TS:
      return 0;
    case Scheme::AP1:
      return 3 * N *
             (K * (N - 2) * ipow(N - 1, 4) - ipow(N, 5) + 6 * ipow(N, 4) - 13 * ipow(N, 3) +
              14 * N * N - 7 * N + 2) /
             (16 * (K - 1) * K * ipow(N - 1, 4));
    case Scheme::AP2:
      return 3 * N * (3 * N - 2) / (16 * K);
    case Scheme::RP1:
      return 3 * ipow(N, 3) * (L * (N - 2) * (N - 1) * (N - 1) + 2 * N * N - 3 * N + 2) /
             (16 * (L - 1) * L * (N - 1) * (N - 1));
    case Scheme::RP2:
      return 3 * ipow(N, 3) * (3 * N - 2) / (16 * K * L);
  }
  return 0;
}

Rational closed_singlet_d(Scheme s, const Rational& N, const Rational& K, const Rational& L) {
  switch (s) {
    case Scheme::TS:
      return 0;
    case Scheme::AP1:
      return N *
             (K * (N - 1) * (N - 1) * (2 * ipow(N, 3) - 8 * N * N + 11 * N - 6) - 2 * ipow(N, 5) +
              12 * ipow(N, 4) - 27 * ipow(N, 3) + 32 * N * N - 19 * N + 6) /
             (16 * (K - 1) * K * (N - 1) * (N - 1));
    case Scheme::AP2:
      return N * (6 * ipow(N, 3) - 16 * N * N + 15 * N - 6) / (16 * K);
    case Scheme::RP1:
      return ipow(N, 3) * (L * (2 * ipow(N, 3) - 8 * N * N + 11 * N - 6) + 4 * N * N - 7 * N + 6) /
             (16 * (L - 1) * L);
    case Scheme::RP2:
      return ipow(N, 3) * (6 * ipow(N, 3) - 16 * N * N + 15 * N - 6) / (16 * K * L);
  }
  return 0;
}

Rational closed_dicke_c(Scheme s, const Rational& N, const Rational& K, const Rational& L) {
  switch (s) {
    case Scheme::TS:
      return N * (ipow(N, 3) + 4 * N * N - 4 * N - 16) / (64 * K);
    case Scheme::AP1:
      return N *
             (K * (2 * ipow(N, 5) - 10 * ipow(N, 4) + 21 * ipow(N, 3) - 25 * N * N + 16 * N - 4) -
              2 * ipow(N, 5) + 10 * ipow(N, 4) - 19 * ipow(N, 3) + 21 * N * N - 12 * N + 4) /
             (32 * (K - 1) * K * (N - 1) * (N - 1));
    case Scheme::AP2:
      return N * (6 * ipow(N, 4) - 20 * ipow(N, 3) + 25 * N * N - 16 * N + 4) / (32 * K * (N - 1));
    case Scheme::RP1:
      return N * N *
             (L * (2 * ipow(N, 4) - 8 * ipow(N, 3) + 13 * N * N - 12 * N + 4) + 4 * ipow(N, 3) -
              9 * N * N + 12 * N - 4) /
             (32 * (L - 1) * L);
    case Scheme::RP2:
      return N * N * (6 * ipow(N, 4) - 16 * ipow(N, 3) + 17 * N * N - 12 * N + 4) / (32 * K * L);
  }
  return 0;
}

}  // namespace

Rational closed_form_exact(Scheme scheme, const Parameter& parameter, StateFamily family, int n,
                           const Budget& budget) {
  parameter.validate();
  validate_budget(scheme, budget);
  require(n >= 2 && n % 2 == 0, "closed forms need an even N >= 2 (got " + std::to_string(n) + ")");
  if (scheme == Scheme::RP1) {
    require(budget.k == 1, "the random-pairs closed form assumes K = 1");
  }
  const Rational N(n);
  const Rational K(budget.k);
  const Rational L(budget.l);
  if (family == StateFamily::Singlet && parameter.kind == ParameterKind::B) {
    return closed_singlet_b(scheme, N, K, L);
  }
  if (family == StateFamily::Singlet && parameter.kind == ParameterKind::D) {
    return closed_singlet_d(scheme, N, K, L);
  }
  if (family == StateFamily::DickeHalf && parameter.kind == ParameterKind::C) {
    require(parameter.m() == Direction::Z,
            "the Dicke closed form needs the variance axis m = z (the Dicke quantization axis)");
    return closed_dicke_c(scheme, N, K, L);
  }
  throw std::invalid_argument("no closed form for parameter " + to_string(parameter) +
                              " on family " + to_string(family) +
                              " (supported: singlet b/d, dicke_half c)");
}

double closed_form(Scheme scheme, const Parameter& parameter, StateFamily family, int n,
                   const Budget& budget) {
  return closed_form_exact(scheme, parameter, family, n, budget).convert_to<double>();
}

}  // namespace spinsq
