#include "spinsq/montecarlo.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <stdexcept>

#include "spinsq/hypothesis.hpp"
#include "spinsq/moment_table.hpp"
#include "spinsq/rng.hpp"
#include "spinsq/schemes.hpp"

namespace spinsq {

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ----------------------------------------------------------------- histogram

std::vector<double> Histogram::edges() const {
  std::vector<double> e(counts.size() + 1);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = anchor + static_cast<double>(i) * width;
  return e;
}

std::int64_t Histogram::total() const {
  std::int64_t t = underflow + overflow;
  for (auto c : counts) t += c;
  return t;
}

Histogram histogram(const std::vector<double>& values, int bin_count, double bin_width,
                    double anchor) {
  if (bin_count < 1) throw std::invalid_argument("histogram needs at least one bin");
  if (!(bin_width > 0.0)) throw std::invalid_argument("histogram bin width must be positive");
  Histogram h;
  h.anchor = anchor;
  h.width = bin_width;
  h.counts.assign(static_cast<std::size_t>(bin_count), 0);
  for (double v : values) {
    const double pos = std::floor((v - anchor) / bin_width);
    if (pos < 0.0) {
      ++h.underflow;
    } else if (pos >= bin_count) {
      ++h.overflow;
    } else {
      ++h.counts[static_cast<std::size_t>(pos)];
    }
  }
  return h;
}

// -------------------------------------------------------------------- trials

std::string TrialConfig::canonical() const {
  return "state=" + state + ";scheme=" + to_string(scheme) + ";param=" + to_string(parameter) +
         ";k=" + std::to_string(budget.k) + ";l=" + std::to_string(budget.l) +
         ";trials=" + std::to_string(trials) + ";seed=" + std::to_string(seed);
}

namespace {

double one_trial(const StateModel& state, Scheme scheme, const Parameter& parameter,
                 const Budget& budget, std::uint64_t seed, std::int64_t index) {
  Rng rng(mix64(seed, static_cast<std::uint64_t>(index)));
  const SchemeDatasets data = collect_for(state, scheme, parameter, budget, rng);
  return estimate_parameter(scheme, parameter, data).value;
}

TrialStats finish(const StateModel& state, Scheme scheme, const Parameter& parameter,
                  const Budget& budget, std::uint64_t seed, std::vector<double> values,
                  const HistogramSpec& hist) {
  TrialStats s;
  s.config = {state.describe(), scheme, parameter, budget,
              static_cast<std::int64_t>(values.size()), seed};
  s.config_hash = hex64(fnv1a64(s.config.canonical()));
  const MomentTable table = moment_table(state);
  s.analytic_mean = parameter_value(table, parameter);

  // Fixed-order reduction keeps the result independent of the schedule.
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.empirical_variance = ss / static_cast<double>(values.size() - 1);

  double width = hist.width;
  if (width <= 0.0) {
    double sd = std::sqrt(s.empirical_variance);
    try {
      VarianceOptions opts;
      opts.exact_random_slots = true;
      sd = std::sqrt(var_parameter(table, scheme, parameter, budget, opts).value);
    } catch (const UnsupportedAnalyticCase&) {
    }
    width = sd > 0.0 ? 8.0 * sd / hist.bins : 1.0;
  }
  s.histogram =
      histogram(values, hist.bins, width, s.analytic_mean - 0.5 * hist.bins * width);
  s.values = std::move(values);
  return s;
}

void check_run(Scheme scheme, const Parameter& parameter, const Budget& budget,
               std::int64_t trials) {
  if (trials < 2) throw std::invalid_argument("run_trials needs T >= 2");
  parameter.validate();
  validate_budget(scheme, budget);
}

}  // namespace

TrialStats run_trials_serial(const StateModel& state, Scheme scheme, const Parameter& parameter,
                             const Budget& budget, std::int64_t trials, std::uint64_t seed,
                             const HistogramSpec& hist) {
  check_run(scheme, parameter, budget, trials);
  std::vector<double> values(static_cast<std::size_t>(trials));
  for (std::int64_t i = 0; i < trials; ++i) {
    values[static_cast<std::size_t>(i)] = one_trial(state, scheme, parameter, budget, seed, i);
  }
  return finish(state, scheme, parameter, budget, seed, std::move(values), hist);
}

TrialStats run_trials(const StateModel& state, Scheme scheme, const Parameter& parameter,
                      const Budget& budget, std::int64_t trials, std::uint64_t seed, int threads,
                      const HistogramSpec& hist) {
  check_run(scheme, parameter, budget, trials);
  std::vector<double> values(static_cast<std::size_t>(trials));
  std::exception_ptr error;
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(nthreads)
  for (std::int64_t i = 0; i < trials; ++i) {
    try {
      values[static_cast<std::size_t>(i)] = one_trial(state, scheme, parameter, budget, seed, i);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return finish(state, scheme, parameter, budget, seed, std::move(values), hist);
}

// ---------------------------------------------------------------- comparison

Comparison compare_analytic(const TrialStats& stats, const VarianceReport& report,
                            double tolerance) {
  const TrialConfig& c = stats.config;
  if (c.scheme != report.scheme || !(c.parameter == report.parameter) ||
      !(c.budget == report.budget)) {
    throw ConfigMismatch("trial run (" + c.canonical() + ") and variance report (scheme=" +
                         to_string(report.scheme) + ";param=" + to_string(report.parameter) +
                         ";k=" + std::to_string(report.budget.k) +
                         ";l=" + std::to_string(report.budget.l) +
                         ") describe different configurations");
  }
  Comparison r;
  r.empirical = stats.empirical_variance;
  r.analytic = report.value;
  r.tolerance = tolerance;
  if (r.analytic == 0.0) {
    r.relative_deviation = r.empirical == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    r.relative_deviation = r.empirical / r.analytic - 1.0;
  }
  r.pass = std::abs(r.relative_deviation) <= tolerance;
  return r;
}

// -------------------------------------------------------------------- sweeps

NoiseSweep sweep_noise(Scheme scheme, const Parameter& parameter, int n, const Budget& budget,
                       const std::vector<double>& p_grid, std::int64_t trials,
                       std::uint64_t seed, int threads) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("noise sweep needs an even N >= 2");
  NoiseSweep out;
  out.scheme = scheme;
  out.parameter = parameter;
  out.n = n;
  out.budget = budget;
  const auto pure = std::make_shared<DickeState>(n, n / 2);
  const MomentTable base = moment_table(*pure);
  for (std::size_t g = 0; g < p_grid.size(); ++g) {
    const double p = p_grid[g];
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("noise grid values must lie in [0, 1]");
    NoiseSweepRow row;
    row.p = p;
    row.analytic = var_parameter(depolarize(base, p), scheme, parameter, budget).value;
    if (trials > 0) {
      const DepolarizedMixture state(pure, p);
      row.empirical =
          run_trials(state, scheme, parameter, budget, trials, mix64(seed, g), threads)
              .empirical_variance;
    }
    out.rows.push_back(row);
  }
  out.minimum_at_pure = false;
  double best = std::numeric_limits<double>::infinity();
  double best_p = -1.0;
  for (const auto& row : out.rows) {
    if (row.analytic < best || (row.analytic == best && row.p > best_p)) {
      best = row.analytic;
      best_p = row.p;
    }
  }
  out.minimum_at_pure = best_p == 1.0;
  return out;
}

std::vector<SampleSizeRow> sweep_sample_size(const Parameter& parameter, const std::string& t_rule,
                                             double gamma, const std::vector<int>& n_list) {
  std::vector<SampleSizeRow> rows;
  for (int n : n_list) {
    if (n < 4 || n % 2 != 0) {
      throw std::invalid_argument("sample-size sweep needs even N >= 4 (got " +
                                  std::to_string(n) + ")");
    }
    const double t = parse_t_rule(t_rule, n);
    for (Scheme s : kSchemes) {
      const SampleSizeResult r = required_budget(s, parameter, n, t, gamma);
      rows.push_back({n, s, r.budget, r.detail, r.total_preparations, r.worst_case_p});
    }
  }
  return rows;
}

}  // namespace spinsq
